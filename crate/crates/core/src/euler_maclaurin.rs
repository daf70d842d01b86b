//! The two Euler-Maclaurin instantiations used by the pipeline: the
//! odd-harmonic tail (`phi` with remainder bound `r_tilde_odd_harmonic`) and
//! log-factorials (`psi` with `r_tilde_log`, composed into `sigma_tilde`).

use rug::{Float, Integer, Rational};

use crate::bernoulli::{bernoulli_number, kernel_integral, KernelKind};
use crate::error::{Error, Result};
use crate::mpnum::{decimal_bits, ulp, PrecisionContext, SigValue};
use crate::partial_sums::{InitialSum, SumKind};

/// Parameter bundle for one Euler-Maclaurin instantiation: split point `m`,
/// number of derivative correction terms `mu`, decimals kept in the initial
/// block, root accuracy goal and working precision (decimal digits).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EMParams {
    pub m: u64,
    pub mu: u32,
    pub n_decimals: u32,
    pub accuracy_goal: u32,
    pub working_digits: u32,
}

impl EMParams {
    pub fn validate(&self) -> Result<()> {
        if self.m < 2 || self.mu < 1 {
            return Err(Error::Precondition(
                "EM parameters require m >= 2 and mu >= 1".into(),
            ));
        }
        if self.working_digits < 2 * self.accuracy_goal {
            return Err(Error::Precondition(
                "working precision must be at least twice the accuracy goal".into(),
            ));
        }
        Ok(())
    }

    pub fn context(&self) -> PrecisionContext {
        PrecisionContext::new(self.working_digits.max(10))
    }

    /// Bit precision for sums that must hold `n_decimals` fractional digits
    /// alongside `int_digits` digits before the point.
    pub fn sum_bits(&self, int_digits: u32) -> u32 {
        decimal_bits(self.n_decimals + int_digits + 20)
    }
}

/// Certified `ln((2n)!) - 2 ln(n!)`, the log of the central binomial
/// coefficient.
#[derive(Clone, Debug)]
pub struct FactorialLogRatio {
    pub value: SigValue,
    pub n: Integer,
}

/// Euler-Maclaurin approximation of the odd-harmonic tail
/// `sum_{k=m}^{x} 1/(2k-1)`, for real `x >= m`:
///
/// `phi = (ln(2x-1) - ln(2m-1) + 1/(2m-1) + 1/(2x-1))/2
///        - sum_j 2^(2j-1) B_2j / (2j) (1/(2x-1)^2j - 1/(2m-1)^2j)`
pub fn phi(mu: u32, m: u64, x: &Float, prec: u32) -> Float {
    let two_x = {
        let mut t = Float::with_val(prec, x * 2u32);
        t -= 1u32;
        t
    };
    let two_m = Float::with_val(prec, 2 * m - 1);
    let ln_x = Float::with_val(prec, two_x.ln_ref());
    let ln_m = Float::with_val(prec, two_m.ln_ref());
    let inv_x = Float::with_val(prec, two_x.recip_ref());
    let inv_m = Float::with_val(prec, two_m.recip_ref());

    let mut acc = ln_x - &ln_m;
    acc += &inv_m;
    acc += &inv_x;
    acc /= 2u32;

    let sq_x = Float::with_val(prec, &inv_x * &inv_x);
    let sq_m = Float::with_val(prec, &inv_m * &inv_m);
    let mut pow_x = sq_x.clone();
    let mut pow_m = sq_m.clone();
    for j in 1..=mu {
        // 2^(2j-1) B_2j / (2j)
        let mut c = bernoulli_number(2 * j as usize);
        c *= Integer::from(1) << (2 * j - 1);
        c /= Integer::from(2 * j);
        let diff = Float::with_val(prec, &pow_x - &pow_m);
        acc -= diff * Float::with_val(prec, &c);
        if j < mu {
            pow_x *= &sq_x;
            pow_m *= &sq_m;
        }
    }
    acc
}

/// d/dx of [`phi`] in the real variable `x`; used by the Newton refinement.
pub fn phi_derivative(mu: u32, m: u64, x: &Float, prec: u32) -> Float {
    let _ = m;
    let two_x = {
        let mut t = Float::with_val(prec, x * 2u32);
        t -= 1u32;
        t
    };
    let inv = Float::with_val(prec, two_x.recip_ref());
    let sq = Float::with_val(prec, &inv * &inv);
    let mut acc = inv.clone();
    acc -= &sq;
    // + sum_j 2^2j B_2j (2x-1)^-(2j+1)
    let mut pow = Float::with_val(prec, &sq * &inv); // (2x-1)^-3
    for j in 1..=mu {
        let mut c = bernoulli_number(2 * j as usize);
        c *= Integer::from(1) << (2 * j);
        acc += Float::with_val(prec, &pow * &Float::with_val(prec, &c));
        if j < mu {
            pow *= &sq;
        }
    }
    acc
}

/// Signed error bound for the odd-harmonic tail:
/// `R~_mu(m, x) = -2^(2mu+1) (x - m) int_0^1 B_{2mu+1}(t) / [2(m+t)-1]^(2mu+2) dt`.
pub fn r_tilde_odd_harmonic(
    mu: u32,
    m: u64,
    x: &Float,
    ctx: &PrecisionContext,
) -> Result<SigValue> {
    let kernel = kernel_integral(mu, &Integer::from(m), KernelKind::OddHarmonic, ctx)?;
    let prec = ctx.bits();
    let span = {
        let mut t = Float::with_val(prec, x);
        t -= Float::with_val(prec, m);
        t
    };
    let mut scale = Float::with_val(prec, Integer::from(1) << (2 * mu + 1));
    scale = -scale;
    scale *= &span;
    let value = Float::with_val(prec, kernel.value() * &scale);
    let mut err = Float::with_val(32, kernel.abs_error() * &scale);
    err.abs_mut();
    err.next_up();
    let err = err + ulp(&value) * 2u32;
    Ok(SigValue::new(value, err))
}

/// Euler-Maclaurin approximation of `sum_{k=m}^{n} ln k`:
///
/// `psi = n(ln n - 1) - m(ln m - 1) + (ln m + ln n)/2
///        + sum_j B_2j / (2j(2j-1)) (1/n^(2j-1) - 1/m^(2j-1))`
pub fn psi(mu: u32, m: &Integer, n: &Integer, prec: u32) -> Float {
    let mf = Float::with_val(prec, m);
    let nf = Float::with_val(prec, n);
    let ln_m = Float::with_val(prec, mf.ln_ref());
    let ln_n = Float::with_val(prec, nf.ln_ref());

    let mut acc = {
        let mut t = ln_n.clone();
        t -= 1u32;
        t * &nf
    };
    acc -= {
        let mut t = ln_m.clone();
        t -= 1u32;
        t * &mf
    };
    acc += Float::with_val(prec, &ln_m + &ln_n) / 2u32;

    let inv_m = Float::with_val(prec, mf.recip_ref());
    let inv_n = Float::with_val(prec, nf.recip_ref());
    let sq_m = Float::with_val(prec, &inv_m * &inv_m);
    let sq_n = Float::with_val(prec, &inv_n * &inv_n);
    let mut pow_m = inv_m.clone();
    let mut pow_n = inv_n.clone();
    for j in 1..=mu {
        let mut c = bernoulli_number(2 * j as usize);
        c /= Rational::from((2 * j) * (2 * j - 1));
        let diff = Float::with_val(prec, &pow_n - &pow_m);
        acc += diff * Float::with_val(prec, &c);
        if j < mu {
            pow_m *= &sq_m;
            pow_n *= &sq_n;
        }
    }
    acc
}

/// Signed error bound for the log-factorial sum:
/// `R~*_mu(m, n) = (n - m)/(2mu+1) int_0^1 B_{2mu+1}(x)/(m+x)^(2mu+1) dx`.
pub fn r_tilde_log(mu: u32, m: &Integer, n: &Integer, ctx: &PrecisionContext) -> Result<SigValue> {
    let kernel = kernel_integral(mu, m, KernelKind::Logarithm, ctx)?;
    let factor = Rational::from((Integer::from(n - m), Integer::from(2 * mu + 1)));
    Ok(kernel.mul_exact(&factor, ctx.bits()))
}

/// Certified `sigma(n) = ln((2n)!) - 2 ln(n!)` through the split
/// `-sum_{k<m} ln k - psi(m, n) + psi(n+1, 2n)`, with the error bound
/// `|R~*(m,n)| + |R~*(n+1,2n)|` plus the initial block's own bound.
pub fn sigma_tilde(
    params: &EMParams,
    n: &Integer,
    log_sum: &InitialSum,
) -> Result<FactorialLogRatio> {
    params.validate()?;
    if log_sum.kind != SumKind::LogSum || log_sum.m != params.m {
        return Err(Error::Precondition(
            "sigma_tilde needs the log initial block for the same split point".into(),
        ));
    }
    let m_int = Integer::from(params.m);
    if *n < m_int {
        return Err(Error::Precondition("sigma_tilde requires n >= m".into()));
    }
    let n_digits = n.to_string().len() as u32;
    let prec = params.sum_bits(n_digits + 3);
    let ctx = params.context();

    let n_plus_1 = Integer::from(n + 1u32);
    let two_n = Integer::from(n * 2u32);
    let psi_low = psi(params.mu, &m_int, n, prec);
    let psi_high = psi(params.mu, &n_plus_1, &two_n, prec);

    let r_low = r_tilde_log(params.mu, &m_int, n, &ctx)?;
    let r_high = r_tilde_log(params.mu, &n_plus_1, &two_n, &ctx)?;

    let mut value = Float::with_val(prec, &psi_high - &psi_low);
    value -= log_sum.value.value();

    let mut err = Float::with_val(32, log_sum.value.abs_error());
    for r in [&r_low, &r_high] {
        let mag = Float::with_val(32, r.value().abs_ref());
        err += mag;
        err += r.abs_error();
    }
    err += ulp(&value) * 4u32;
    err.next_up();

    Ok(FactorialLogRatio {
        value: SigValue::new(value, err),
        n: n.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpnum::digits_in_agreement;
    use crate::partial_sums::{exact_odd_harmonic_sum, initial_log_sum};

    #[test]
    fn phi_at_lower_endpoint_is_single_term() {
        // phi(mu, m, m) = 1/(2m-1)
        let prec = 256;
        for m in [2u64, 101, 100001] {
            let x = Float::with_val(prec, m);
            for mu in [1u32, 3, 10] {
                let got = phi(mu, m, &x, prec);
                let want = Float::with_val(prec, Rational::from((1u64, 2 * m - 1)));
                let diff = Float::with_val(prec, &got - &want).abs();
                assert!(diff < Float::with_val(32, 1e-60), "m={m} mu={mu}");
            }
        }
    }

    #[test]
    fn r_tilde_vanishes_at_lower_endpoint() {
        let ctx = PrecisionContext::new(30);
        let x = Float::with_val(128, 101u32);
        let r = r_tilde_odd_harmonic(2, 101, &x, &ctx).unwrap();
        assert_eq!(r.value().cmp0(), Some(std::cmp::Ordering::Equal));
        let m = Integer::from(101);
        let r = r_tilde_log(2, &m, &m, &ctx).unwrap();
        assert_eq!(r.value().cmp0(), Some(std::cmp::Ordering::Equal));
    }

    #[test]
    fn psi_at_lower_endpoint_is_ln_m() {
        let prec = 256;
        let m = Integer::from(1234);
        let got = psi(4, &m, &m, prec);
        let want = Float::with_val(prec, Float::with_val(prec, &m).ln_ref());
        let diff = Float::with_val(prec, &got - &want).abs();
        assert!(diff < Float::with_val(32, 1e-60));
    }

    #[test]
    fn phi_brackets_exact_tails() {
        // the exact rational tail lies within phi +- |R~|
        let prec = 320;
        let ctx = PrecisionContext::new(40);
        for (m, n) in [(11u64, 1000u64), (101, 2000), (1001, 100000)] {
            for mu in [1u32, 2, 5] {
                let exact = exact_odd_harmonic_sum(n + 1) - exact_odd_harmonic_sum(m);
                let xf = Float::with_val(prec, n);
                let approx = phi(mu, m, &xf, prec);
                let r = r_tilde_odd_harmonic(mu, m, &xf, &ctx).unwrap();
                let bound = Float::with_val(64, r.value().abs_ref()) + r.abs_error();
                let diff = Float::with_val(prec, &approx - &Float::with_val(prec, &exact)).abs();
                assert!(
                    diff <= bound,
                    "m={m} n={n} mu={mu}: diff={diff} bound={bound}"
                );
            }
        }
    }

    #[test]
    fn psi_brackets_exact_log_sums() {
        let prec = 512;
        let ctx = PrecisionContext::new(40);
        for (m, n) in [(11u64, 500u64), (101, 5000), (1001, 100000)] {
            let mut exact = Float::new(prec);
            for k in m..=n {
                exact += Float::with_val(prec, k).ln();
            }
            for mu in [1u32, 3, 5] {
                let mi = Integer::from(m);
                let ni = Integer::from(n);
                let approx = psi(mu, &mi, &ni, prec);
                let r = r_tilde_log(mu, &mi, &ni, &ctx).unwrap();
                let mut bound = Float::with_val(64, r.value().abs_ref());
                bound += r.abs_error();
                // slack for the float reference sum itself
                bound += ulp(&exact) * 4u32 * Float::with_val(32, (n - m + 1) as f64);
                let diff = Float::with_val(prec, &approx - &exact).abs();
                assert!(
                    diff <= bound,
                    "m={m} n={n} mu={mu}: diff={diff} bound={bound}"
                );
            }
        }
    }

    #[test]
    fn remainder_shrinks_with_mu_and_m() {
        let ctx = PrecisionContext::new(40);
        let x = Float::with_val(256, 100000u32);
        // mu-monotonicity at fixed m
        let mut prev: Option<Float> = None;
        for mu in 1..=10u32 {
            let r = r_tilde_odd_harmonic(mu, 1001, &x, &ctx).unwrap();
            let mag = Float::with_val(64, r.value().abs_ref());
            if let Some(p) = prev {
                assert!(mag < p, "mu={mu}");
            }
            prev = Some(mag);
        }
        // m-monotonicity at fixed mu
        let mut prev: Option<Float> = None;
        for m in [11u64, 101, 1001, 10001] {
            let r = r_tilde_odd_harmonic(3, m, &x, &ctx).unwrap();
            let mag = Float::with_val(64, r.value().abs_ref());
            if let Some(p) = prev {
                assert!(mag < p, "m={m}");
            }
            prev = Some(mag);
        }
    }

    #[test]
    fn psi_mu_refinement_is_within_old_bound() {
        // psi at mu=5 and mu=10 differ by less than |R~*_5|
        let prec = 512;
        let ctx = PrecisionContext::new(40);
        let m = Integer::from(100001);
        let n = Integer::from(2_000_000);
        let a = psi(5, &m, &n, prec);
        let b = psi(10, &m, &n, prec);
        let r = r_tilde_log(5, &m, &n, &ctx).unwrap();
        let bound = Float::with_val(64, r.value().abs_ref()) + r.abs_error();
        let diff = Float::with_val(prec, &a - &b).abs();
        assert!(diff < bound);
    }

    #[test]
    fn r_tilde_log_sign_matches_summand_integrals() {
        // every per-k integral has the sign of the total bound
        let ctx = PrecisionContext::new(30);
        let mu = 2;
        let m = Integer::from(50);
        let n = Integer::from(80);
        let total = r_tilde_log(mu, &m, &n, &ctx).unwrap();
        for k in [50u32, 51, 60, 79] {
            let ki = Integer::from(k);
            let kernel =
                kernel_integral(mu, &ki, KernelKind::Logarithm, &ctx).unwrap();
            assert_eq!(kernel.value().cmp0(), total.value().cmp0(), "k={k}");
        }
    }

    #[test]
    fn sigma_tilde_central_binomial() {
        // n = 10^6: (n!)^2/(2n)! ~ 1.8082023454706427717 * 10^-602057
        let params = EMParams {
            m: 100001,
            mu: 5,
            n_decimals: 100,
            accuracy_goal: 20,
            working_digits: 40,
        };
        let log_sum = initial_log_sum(params.m, params.n_decimals);
        let n = Integer::from(1_000_000);
        let sigma = sigma_tilde(&params, &n, &log_sum).unwrap();
        assert!(sigma.value.certified_positive());

        // lg((n!)^2 / (2n)!) = -sigma / ln 10
        let prec = sigma.value.value().prec();
        let ln10 = Float::with_val(prec, 10u32).ln();
        let lg = Float::with_val(prec, sigma.value.value() / &ln10);
        let want = Float::with_val(
            256,
            Float::parse("602056.742752971756550312709").unwrap(),
        );
        assert!(digits_in_agreement(&lg, &want) >= 26, "lg = {lg}");

        let lg_sig = SigValue::new(-lg, Float::with_val(32, 1e-40));
        let sci =
            crate::mpnum::mantissa_exponent(&lg_sig, 256, crate::mpnum::GetMeBehavior::Signal)
                .unwrap();
        assert_eq!(sci.exponent(), &Integer::from(-602057i64));
        let (m20, _) = sci.rounded(20);
        assert_eq!(m20, "1.8082023454706427717");
    }
}
