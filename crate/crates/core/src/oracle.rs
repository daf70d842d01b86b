//! Brute-force reference implementations: exact rationals for small cases,
//! scaled-integer decimal summation for the mid range. These provide ground
//! truth for the Euler-Maclaurin pipeline and reproduce the
//! machine-precision failure mode on request.

use rug::ops::Pow;
use rug::{Assign, Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::mpnum::{
    decimal_bits, mantissa_exponent, pow10, ulp, GetMeBehavior, SciNumber, SigValue,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BruteMode {
    /// Exact rational partial sums; denominator growth limits this to a0 <= 4.
    Rational,
    /// Scaled-integer decimal summation with truncation-error tracking.
    Decimal { working_digits: u32 },
}

#[derive(Clone, Debug)]
enum SumRepr {
    Rational(Rational),
    Scaled {
        units: Integer,
        scale: u32,
        /// Count of truncated divisions; the true sum exceeds `units` by
        /// less than this many last-place units.
        err_units: u64,
    },
}

/// One completed brute-force run: partial sums were accumulated until the
/// first index whose sum exceeds `a0`.
#[derive(Clone, Debug)]
pub struct BruteForceRun {
    pub a0: u32,
    pub n0: u64,
    pub mode: BruteMode,
    sum: SumRepr,
}

impl BruteForceRun {
    /// The sum `s(n0)` as an exact rational (for decimal mode, the stored
    /// truncated value).
    pub fn sum_rational(&self) -> Rational {
        match &self.sum {
            SumRepr::Rational(q) => q.clone(),
            SumRepr::Scaled { units, scale, .. } => {
                Rational::from((units.clone(), pow10(*scale as u64)))
            }
        }
    }
}

/// Accumulate `1/(2k-1)` until the sum exceeds `a0`.
pub fn brute_force_threshold(a0: u32, mode: BruteMode) -> Result<BruteForceRun> {
    if a0 < 1 {
        return Err(Error::Precondition("a0 must be at least 1".into()));
    }
    match mode {
        BruteMode::Rational => {
            if a0 > 4 {
                return Err(Error::BudgetExceeded(format!(
                    "exact rational summation is limited to a0 <= 4 (got {a0})"
                )));
            }
            let target = Rational::from(a0);
            let mut sum = Rational::new();
            let mut k = 0u64;
            loop {
                k += 1;
                sum += Rational::from((1u32, Integer::from(2 * k - 1)));
                if sum > target {
                    return Ok(BruteForceRun {
                        a0,
                        n0: k,
                        mode,
                        sum: SumRepr::Rational(sum),
                    });
                }
            }
        }
        BruteMode::Decimal { working_digits } => {
            if a0 > 10 {
                return Err(Error::BudgetExceeded(format!(
                    "decimal brute force is limited to a0 <= 10 (got {a0})"
                )));
            }
            if working_digits < 70 {
                return Err(Error::Precondition(
                    "decimal brute force needs at least 70 working digits".into(),
                ));
            }
            decimal_threshold(a0, working_digits).map(|r| BruteForceRun { mode, ..r })
        }
    }
}

/// The scaled-integer summation kernel (no precision floor, so the
/// machine-precision demonstration can call it with 16 digits).
fn decimal_threshold(a0: u32, working_digits: u32) -> Result<BruteForceRun> {
    let scale_pow = pow10(working_digits as u64);
    let target = Integer::from(&scale_pow * a0);
    let mut sum = Integer::new();
    let mut term = Integer::new();
    let mut err_units = 0u64;
    let mut prev_err_units;
    let mut next_pow5 = Integer::from(1);
    let mut k = 0u64;
    loop {
        k += 1;
        let odd = 2 * k - 1;
        term.assign(&scale_pow / odd);
        prev_err_units = err_units;
        if next_pow5 == odd {
            // 10^wd is divisible by odd powers of five: the division is exact
            next_pow5 *= 5u32;
        } else {
            err_units += 1;
        }
        sum += &term;
        if sum > target {
            // margins must dominate the truncation error on both sides
            let margin = Integer::from(&sum - &target);
            if margin <= err_units {
                return Err(Error::PrecisionExhausted(format!(
                    "threshold ambiguous at {working_digits} digits for a0 = {a0}"
                )));
            }
            let prev_sum = Integer::from(&sum - &term);
            let prev_plus_err = prev_sum + prev_err_units;
            if prev_plus_err > target {
                return Err(Error::PrecisionExhausted(format!(
                    "previous index ambiguous at {working_digits} digits for a0 = {a0}"
                )));
            }
            return Ok(BruteForceRun {
                a0,
                n0: k,
                mode: BruteMode::Decimal { working_digits },
                sum: SumRepr::Scaled {
                    units: sum,
                    scale: working_digits,
                    err_units,
                },
            });
        }
    }
}

/// A tiny value from the brute-force path: exact rational when the run was
/// rational, certified scientific notation otherwise.
#[derive(Clone, Debug)]
pub enum BruteTiny {
    Rational(Rational),
    Sci(SciNumber),
}

/// `t = (s - a0)^n / (2^(n-1) n! prod a_k)` evaluated on a completed run.
/// Rational runs produce the exact rational; decimal runs accumulate
/// `ln(2k-1)` and `ln k` directly (batched into exact products) and certify
/// the mantissa digits.
pub fn brute_force_tiny(run: &BruteForceRun) -> Result<BruteTiny> {
    match &run.sum {
        SumRepr::Rational(s) => Ok(BruteTiny::Rational(exact_tiny_from_run(
            run.a0, run.n0, s,
        )?)),
        SumRepr::Scaled {
            units,
            scale,
            err_units,
        } => decimal_tiny(run.a0, run.n0, units, *scale, *err_units).map(BruteTiny::Sci),
    }
}

/// Direct product form of the tiny value, exact.
fn exact_tiny_from_run(a0: u32, n0: u64, s: &Rational) -> Result<Rational> {
    let excess = Rational::from(s - &Rational::from(a0));
    if excess.cmp0() != std::cmp::Ordering::Greater {
        return Err(Error::ConditionViolated(
            "sum does not exceed a0; the tiny formula does not apply".into(),
        ));
    }
    let mut odd_product = Integer::from(1);
    for k in 1..=n0 {
        odd_product *= 2 * k - 1;
    }
    let mut numer = Rational::from(excess.pow(n0 as u32));
    numer *= odd_product;
    let mut denom = Integer::from(Integer::factorial(n0 as u32));
    denom <<= (n0 - 1) as u32;
    numer /= denom;
    Ok(numer)
}

/// `sum_{k=1}^{n} ln(2k-1)` with terms batched into exact integer products
/// (one logarithm per batch).
fn sum_ln_odd(n: u64, prec: u32) -> SigValue {
    batched_ln_sum(prec, (1..=n).map(|k| 2 * k - 1))
}

/// `ln(n!) = sum_{k=2}^{n} ln k`, batched the same way.
fn sum_ln_factorial(n: u64, prec: u32) -> SigValue {
    batched_ln_sum(prec, 2..=n.max(1))
}

fn batched_ln_sum(prec: u32, factors: impl Iterator<Item = u64>) -> SigValue {
    const BATCH: usize = 16;
    let mut acc = Float::new(prec);
    let mut product = Integer::from(1);
    let mut in_batch = 0usize;
    let mut batches = 0u64;
    for f in factors {
        product *= f;
        in_batch += 1;
        if in_batch == BATCH {
            acc += Float::with_val(prec, &product).ln();
            product.assign(1);
            in_batch = 0;
            batches += 1;
        }
    }
    if in_batch > 0 && product != 1u32 {
        acc += Float::with_val(prec, &product).ln();
        batches += 1;
    }
    // per batch: one integer->float conversion, one ln, one add
    let mut err = ulp(&acc) * 4u32;
    err += Float::with_val(32, Float::i_exp(1, 4 - prec as i32));
    err *= Float::with_val(32, (batches + 2) as f64);
    SigValue::new(acc, err)
}

fn decimal_tiny(
    a0: u32,
    n0: u64,
    units: &Integer,
    scale: u32,
    err_units: u64,
) -> Result<SciNumber> {
    let prec = decimal_bits(scale + 20);
    let target = Integer::from(pow10(scale as u64) * a0);
    let excess_units = Integer::from(units - &target);
    let excess = Rational::from((excess_units, pow10(scale as u64)));
    let excess_float = Float::with_val(prec, &excess);
    // the true excess lies within [excess, excess + err_units * 10^-scale)
    let excess_err = {
        let mut e = Float::with_val(64, (err_units + 1) as f64);
        e *= crate::mpnum::pow10_float(-(scale as i64), 64);
        let mut e32 = Float::with_val(32, e);
        e32.next_up();
        e32
    };
    let ln_excess = SigValue::new(excess_float, excess_err).ln(prec)?;
    let term1 = ln_excess.mul_exact(&Rational::from(n0), prec);

    let odds = sum_ln_odd(n0, prec);
    let fact = sum_ln_factorial(n0, prec);
    let ln2_term = {
        let ln2 = Float::with_val(prec, 2u32).ln();
        let e = ulp(&ln2) * 2u32;
        SigValue::new(ln2, e).mul_exact(&Rational::from(n0 - 1), prec)
    };

    let ln_t = term1.add(&odds, prec).sub(&ln2_term, prec).sub(&fact, prec);
    let lg_t = {
        let ln10 = Float::with_val(prec, 10u32).ln();
        let value = Float::with_val(prec, ln_t.value() / &ln10);
        let mut err = Float::with_val(32, ln_t.abs_error() / 2u32);
        err += ulp(&value) * 2u32;
        SigValue::new(value, err)
    };
    mantissa_exponent(&lg_t, prec, GetMeBehavior::Signal)
}

/// Decimal digit counts `(P, Q)` of the reduced fraction `t = P/Q`.
///
/// Anything past a0 = 4 forces hundreds of millions of digits of exact
/// arithmetic, so larger inputs require the explicit heavy opt-in (and
/// a0 > 6 is refused outright).
pub fn digit_count_check(a0: u32, allow_heavy: bool) -> Result<(u64, u64)> {
    if a0 > 4 && !allow_heavy {
        return Err(Error::BudgetExceeded(format!(
            "digit counts for a0 = {a0} need the heavy opt-in"
        )));
    }
    if a0 > 6 {
        return Err(Error::BudgetExceeded(
            "digit counts beyond a0 = 6 are not reproducible at desk scale".into(),
        ));
    }
    let t = if a0 <= 4 {
        let run = brute_force_threshold(a0, BruteMode::Rational)?;
        match brute_force_tiny(&run)? {
            BruteTiny::Rational(q) => q,
            BruteTiny::Sci(_) => unreachable!("rational mode yields rational tiny"),
        }
    } else {
        // find n0 cheaply, then redo the sum exactly
        let run = brute_force_threshold(a0, BruteMode::Decimal { working_digits: 70 })?;
        let s = crate::partial_sums::exact_odd_harmonic_sum(run.n0 + 1);
        exact_tiny_from_run(a0, run.n0, &s)?
    };
    let (p, q) = t.into_numer_denom();
    Ok((
        p.to_string().trim_start_matches('-').len() as u64,
        q.to_string().len() as u64,
    ))
}

/// Output of the precision-pitfall demonstration: the same tiny value
/// computed at a working precision far too small, next to a certified
/// reference.
#[derive(Clone, Debug)]
pub struct MachinePrecisionDemo {
    pub a0: u32,
    pub degraded_working_digits: u32,
    pub degraded: SciNumber,
    pub reference: SciNumber,
}

/// Reproduce the catastrophic loss of significance when the sum is carried
/// at roughly machine precision (16 decimal digits): for a0 = 8 even the
/// exponent comes out wrong.
pub fn machine_precision_demo(a0: u32) -> Result<MachinePrecisionDemo> {
    if !(7..=8).contains(&a0) {
        return Err(Error::Precondition(
            "the demonstration reproduces the published a0 = 7 and 8 failures".into(),
        ));
    }
    let degraded_wd = 16u32;
    let run = decimal_threshold(a0, degraded_wd)?;
    let (units, scale) = match &run.sum {
        SumRepr::Scaled { units, scale, .. } => (units.clone(), *scale),
        SumRepr::Rational(_) => unreachable!(),
    };
    // Uncertified evaluation: mimic a straight calculation that trusts its
    // 16-digit sum.
    let prec = decimal_bits(40);
    let target = Integer::from(pow10(scale as u64) * a0);
    let excess = Rational::from((Integer::from(&units - &target), pow10(scale as u64)));
    let mut lg = Float::with_val(prec, &excess).ln();
    lg *= run.n0;
    lg += sum_ln_odd(run.n0, prec).value();
    lg -= Float::with_val(prec, 2u32).ln() * Float::with_val(prec, run.n0 - 1);
    lg -= sum_ln_factorial(run.n0, prec).value();
    lg /= Float::with_val(prec, 10u32).ln();
    let degraded = mantissa_exponent(&SigValue::exact(lg), prec, GetMeBehavior::Signal)?;

    let good_run = brute_force_threshold(a0, BruteMode::Decimal { working_digits: 70 })?;
    let reference = match brute_force_tiny(&good_run)? {
        BruteTiny::Sci(s) => s,
        BruteTiny::Rational(_) => unreachable!(),
    };
    Ok(MachinePrecisionDemo {
        a0,
        degraded_working_digits: degraded_wd,
        degraded,
        reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_thresholds() {
        let run = brute_force_threshold(1, BruteMode::Rational).unwrap();
        assert_eq!(run.n0, 2);
        assert_eq!(run.sum_rational(), Rational::from((4, 3)));
        let run = brute_force_threshold(2, BruteMode::Rational).unwrap();
        assert_eq!(run.n0, 8);
        assert_eq!(run.sum_rational(), Rational::from((91072, 45045)));
        let run = brute_force_threshold(3, BruteMode::Rational).unwrap();
        assert_eq!(run.n0, 57);
    }

    #[test]
    fn budget_limits() {
        assert!(matches!(
            brute_force_threshold(5, BruteMode::Rational),
            Err(Error::BudgetExceeded(_))
        ));
        assert!(matches!(
            brute_force_threshold(11, BruteMode::Decimal { working_digits: 80 }),
            Err(Error::BudgetExceeded(_))
        ));
        assert!(matches!(
            brute_force_threshold(5, BruteMode::Decimal { working_digits: 30 }),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            digit_count_check(6, false),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn decimal_mode_agrees_with_rational() {
        for a0 in 1..=4u32 {
            let r = brute_force_threshold(a0, BruteMode::Rational).unwrap();
            let d =
                brute_force_threshold(a0, BruteMode::Decimal { working_digits: 70 }).unwrap();
            assert_eq!(r.n0, d.n0, "a0 = {a0}");
        }
    }

    #[test]
    fn exact_tiny_small_cases() {
        // a0 = 1: t = 1/12 (the 11 pi / 24 integral)
        let run = brute_force_threshold(1, BruteMode::Rational).unwrap();
        match brute_force_tiny(&run).unwrap() {
            BruteTiny::Rational(q) => assert_eq!(q, Rational::from((1, 12))),
            _ => panic!(),
        }
        // a0 = 2: the published 22/36-digit fraction
        let run = brute_force_threshold(2, BruteMode::Rational).unwrap();
        match brute_force_tiny(&run).unwrap() {
            BruteTiny::Rational(q) => {
                let p: Integer = "3377940044732998170721".parse().unwrap();
                let d: Integer = "168579263752214678679209808915000000".parse().unwrap();
                assert_eq!(q, Rational::from((p, d)));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn digit_counts_small() {
        assert_eq!(digit_count_check(1, false).unwrap(), (1, 2));
        assert_eq!(digit_count_check(2, false).unwrap(), (22, 36));
    }

    #[test]
    fn decimal_tiny_matches_rational_exactly() {
        // same formula, same threshold: the decimal path's certified digits
        // must match the exact rational value
        let run_d = brute_force_threshold(3, BruteMode::Decimal { working_digits: 70 }).unwrap();
        let sci = match brute_force_tiny(&run_d).unwrap() {
            BruteTiny::Sci(s) => s,
            _ => panic!(),
        };
        let run_r = brute_force_threshold(3, BruteMode::Rational).unwrap();
        let exact = match brute_force_tiny(&run_r).unwrap() {
            BruteTiny::Rational(q) => q,
            _ => panic!(),
        };
        let exact_sci = crate::mpnum::rational_to_sci(&exact, 45);
        assert_eq!(sci.exponent(), exact_sci.exponent());
        let agree = crate::mpnum::digits_in_agreement(sci.mantissa(), exact_sci.mantissa());
        assert!(agree >= 42, "only {agree} digits agree");
        assert!(sci.certified_digits() >= 42);
    }

    #[test]
    fn doubling_working_digits_is_stable() {
        // doubling the precision must not change any certified digit
        let a = {
            let run =
                brute_force_threshold(4, BruteMode::Decimal { working_digits: 70 }).unwrap();
            match brute_force_tiny(&run).unwrap() {
                BruteTiny::Sci(s) => s,
                _ => panic!(),
            }
        };
        let b = {
            let run =
                brute_force_threshold(4, BruteMode::Decimal { working_digits: 140 }).unwrap();
            match brute_force_tiny(&run).unwrap() {
                BruteTiny::Sci(s) => s,
                _ => panic!(),
            }
        };
        assert_eq!(a.exponent(), b.exponent());
        let shown = a.certified_digits();
        assert_eq!(
            a.to_string_with_digits(shown),
            b.to_string_with_digits(shown)
        );
    }
}
