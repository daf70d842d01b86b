//! The full pipeline producing `t`: exact rationals for small `a0`, the
//! log-domain Euler-Maclaurin path for large `a0`, dual-checked in the band
//! where both are feasible, and cross-checked against the Stirling bracket.

use std::path::Path;

use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::euler_maclaurin::{sigma_tilde, EMParams, FactorialLogRatio};
use crate::mpnum::{
    decimal_bits, digits_in_agreement, mantissa_exponent, rational_to_sci, ulp, GetMeBehavior,
    SciNumber, SigValue,
};
use crate::oracle::{self, BruteMode, BruteTiny};
use crate::partial_sums::{cache_lookup_or_compute, CacheOutcome, SumKind};
use crate::threshold_solver::{certify_n0, solve_root, ThresholdResult};

/// Which computation produced a result.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    ExactRational,
    BruteDecimal,
    EulerMaclaurin,
    StirlingBracket,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ExactRational => "exact-rational",
            Method::BruteDecimal => "brute-decimal",
            Method::EulerMaclaurin => "euler-maclaurin",
            Method::StirlingBracket => "stirling-bracket",
        }
    }
}

/// How the integral is reported: the tiny number is the deficit in
/// `(Pi/2) * (1 - t)`.
pub const INTEGRAL_FORM: &str = "(Pi/2) * (1 - t)";

/// A certified tiny value with its provenance.
#[derive(Clone, Debug)]
pub struct TinyResult {
    pub a0: u32,
    pub n0: Integer,
    pub t: SciNumber,
    pub certified_digits: u32,
    pub method: Method,
    pub integral_form: &'static str,
    /// `s(n0) - a0` with its certificate (Euler-Maclaurin path only).
    pub sum_excess: Option<SigValue>,
    /// `|R~_mu(m, n0)|` (Euler-Maclaurin path only).
    pub remainder_magnitude: Option<Float>,
    /// Cache activity observed while computing (for user-facing warnings).
    pub cache_notes: Vec<CacheOutcome>,
}

/// Knobs for the full pipeline; defaults mirror the published parameter
/// block (m1 = 100001, mu1 = 10, 100 decimals, accuracy goal 20, working
/// precision 40; m2 = 100001, mu2 = 5).
#[derive(Clone, Copy, Debug)]
pub struct PipelineConfig {
    pub sum_params: EMParams,
    pub fact_params: EMParams,
    /// Working digits for the brute-force oracle runs (decimal mode).
    pub oracle_working_digits: u32,
    pub getme: GetMeBehavior,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sum_params: EMParams {
                m: 100001,
                mu: 10,
                n_decimals: 100,
                accuracy_goal: 20,
                working_digits: 40,
            },
            fact_params: EMParams {
                m: 100001,
                mu: 5,
                n_decimals: 100,
                accuracy_goal: 20,
                working_digits: 40,
            },
            oracle_working_digits: 70,
            getme: GetMeBehavior::Signal,
        }
    }
}

impl PipelineConfig {
    /// Every knob doubled; reproducing a table with this configuration must
    /// not change any printed digit.
    pub fn doubled(&self) -> PipelineConfig {
        PipelineConfig {
            sum_params: EMParams {
                m: 2 * self.sum_params.m,
                mu: 2 * self.sum_params.mu,
                n_decimals: 2 * self.sum_params.n_decimals,
                accuracy_goal: 2 * self.sum_params.accuracy_goal,
                working_digits: 2 * self.sum_params.working_digits,
            },
            fact_params: EMParams {
                m: 2 * self.fact_params.m,
                mu: 2 * self.fact_params.mu,
                n_decimals: 2 * self.fact_params.n_decimals,
                accuracy_goal: 2 * self.fact_params.accuracy_goal,
                working_digits: 2 * self.fact_params.working_digits,
            },
            oracle_working_digits: 2 * self.oracle_working_digits,
            getme: self.getme,
        }
    }
}

/// Exact `t = (s - a0)^n0 (2 n0)! / (2^(2 n0 - 1) (n0!)^2)` — the factorial
/// form of the product formula.
pub fn exact_tiny_rational(a0: u32, n0: u64, s: &Rational) -> Result<Rational> {
    let excess = Rational::from(s - &Rational::from(a0));
    if excess.cmp0() != std::cmp::Ordering::Greater {
        return Err(Error::ConditionViolated(
            "sum does not exceed a0; the tiny formula does not apply".into(),
        ));
    }
    use rug::ops::Pow;
    let two_n_fact = Integer::from(Integer::factorial(2 * n0 as u32));
    let n_fact = Integer::from(Integer::factorial(n0 as u32));
    let mut denom = Rational::from(Integer::from(&n_fact * &n_fact));
    denom *= Integer::from(1) << (2 * n0 as u32 - 1);
    let mut t = Rational::from(excess.pow(n0 as u32));
    t *= two_n_fact;
    t /= denom;
    Ok(t)
}

/// Certified `ln t = n ln(s(n) - a0) - (2n - 1) ln 2 + sigma(n)`.
pub fn ln_tiny(
    a0: u32,
    threshold: &ThresholdResult,
    sigma: &FactorialLogRatio,
    prec: u32,
) -> Result<SigValue> {
    let _ = a0;
    if sigma.n != threshold.n0 {
        return Err(Error::Precondition(
            "factorial ratio was computed for a different n".into(),
        ));
    }
    if !threshold.sum_excess.certified_positive() {
        return Err(Error::Precondition(
            "threshold excess is not certified positive".into(),
        ));
    }
    let n_rat = Rational::from(threshold.n0.clone());
    let ln_excess = threshold.sum_excess.ln(prec)?;
    let term1 = ln_excess.mul_exact(&n_rat, prec);
    let term2 = {
        let ln2 = Float::with_val(prec, 2u32).ln();
        let e = ulp(&ln2) * 2u32;
        let mut c = Rational::from(threshold.n0.clone());
        c *= 2u32;
        c -= 1u32;
        SigValue::new(ln2, e).mul_exact(&c, prec)
    };
    let ln_t = term1.sub(&term2, prec).add(&sigma.value, prec);
    if *ln_t.abs_error() >= Float::with_val(32, 1e-3) {
        return Err(Error::PrecisionExhausted(
            "no mantissa digit of t is certifiable with these parameters".into(),
        ));
    }
    Ok(ln_t)
}

/// `ln t` converted to base 10 with the error bound carried along.
fn lg_from_ln(ln_t: &SigValue, prec: u32) -> SigValue {
    let ln10 = Float::with_val(prec, 10u32).ln();
    let value = Float::with_val(prec, ln_t.value() / &ln10);
    let mut err = Float::with_val(32, ln_t.abs_error() / 2u32);
    err += ulp(&value) * 2u32;
    SigValue::new(value, err)
}

fn regime_checks(a0: u32, n0: &Integer) -> Result<()> {
    // 2 a_k >= a_n for k < n: with a_k = 1/(2k-1) decreasing it suffices at
    // k = n-1, i.e. 2(2n-1) >= 2n-3; and 2 a_0 >= a_n trivially.
    let two_n = Integer::from(n0 * 2u32);
    let lhs = Integer::from(&two_n - 1u32) * 2u32;
    let rhs = Integer::from(&two_n - 3u32);
    if lhs < rhs || a0 < 1 {
        return Err(Error::ConditionViolated(
            "frequency conditions do not hold".into(),
        ));
    }
    Ok(())
}

/// Euler-Maclaurin pipeline: threshold, factorial ratio, `ln t`, mantissa.
fn em_tiny(
    a0: u32,
    config: &PipelineConfig,
    cache_dir: &Path,
) -> Result<(TinyResult, ThresholdResult)> {
    let sum_params = config.sum_params;
    let fact_params = config.fact_params;
    sum_params.validate()?;
    fact_params.validate()?;

    let mut cache_notes = Vec::new();
    let (s_init, outcome) = cache_lookup_or_compute(
        SumKind::OddHarmonic,
        sum_params.m,
        sum_params.n_decimals,
        cache_dir,
    )?;
    cache_notes.push(outcome);

    let root = solve_root(a0, &sum_params, &s_init)?;
    let threshold = certify_n0(a0, &root, &sum_params, &s_init)?;
    regime_checks(a0, &threshold.n0)?;

    let (log_sum, outcome) = cache_lookup_or_compute(
        SumKind::LogSum,
        fact_params.m,
        fact_params.n_decimals,
        cache_dir,
    )?;
    cache_notes.push(outcome);

    let sigma = sigma_tilde(&fact_params, &threshold.n0, &log_sum)?;

    let n_digits = threshold.n0.to_string().len() as u32;
    let prec = decimal_bits(
        sum_params
            .n_decimals
            .max(fact_params.n_decimals)
            .max(sum_params.working_digits)
            + 2 * n_digits
            + 20,
    );
    let ln_t = ln_tiny(a0, &threshold, &sigma, prec)?;
    let lg_t = lg_from_ln(&ln_t, prec);
    let t = mantissa_exponent(&lg_t, prec, config.getme)?;

    let result = TinyResult {
        a0,
        n0: threshold.n0.clone(),
        certified_digits: t.certified_digits(),
        t,
        method: Method::EulerMaclaurin,
        integral_form: INTEGRAL_FORM,
        sum_excess: Some(threshold.sum_excess.clone()),
        remainder_magnitude: Some(threshold.remainder_magnitude.clone()),
        cache_notes,
    };
    Ok((result, threshold))
}

/// Compute `t` for one `a0`, dispatching on feasibility:
///
/// * `a0 <= 4`: exact rationals, checked against the factorial identity;
/// * `a0 <= 8`: certified decimal brute force;
/// * `a0 in {9, 10}`: Euler-Maclaurin *and* decimal brute force, which must
///   agree to at least 40 digits;
/// * `a0 >= 10`: Euler-Maclaurin, contained in the Stirling bracket.
pub fn compute_tiny(a0: u32, config: &PipelineConfig, cache_dir: &Path) -> Result<TinyResult> {
    if a0 < 1 {
        return Err(Error::Precondition("a0 must be at least 1".into()));
    }
    if a0 <= 4 {
        let run = oracle::brute_force_threshold(a0, BruteMode::Rational)?;
        let t_product_form = match oracle::brute_force_tiny(&run)? {
            BruteTiny::Rational(q) => q,
            BruteTiny::Sci(_) => unreachable!(),
        };
        // dual route: direct product form against the factorial form
        let t_factorial_form = exact_tiny_rational(a0, run.n0, &run.sum_rational())?;
        if t_product_form != t_factorial_form {
            return Err(Error::ConditionViolated(
                "product and factorial forms disagree".into(),
            ));
        }
        regime_checks(a0, &Integer::from(run.n0))?;
        let display = 41; // 40 decimal places, as tabulated
        let t = rational_to_sci(&t_factorial_form, display);
        return Ok(TinyResult {
            a0,
            n0: Integer::from(run.n0),
            t,
            certified_digits: display,
            method: Method::ExactRational,
            integral_form: INTEGRAL_FORM,
            sum_excess: None,
            remainder_magnitude: None,
            cache_notes: Vec::new(),
        });
    }
    if a0 <= 8 {
        let (n0, t) = oracle_decimal_tiny(a0, config)?;
        regime_checks(a0, &Integer::from(n0))?;
        return Ok(TinyResult {
            a0,
            n0: Integer::from(n0),
            certified_digits: t.certified_digits(),
            t,
            method: Method::BruteDecimal,
            integral_form: INTEGRAL_FORM,
            sum_excess: None,
            remainder_magnitude: None,
            cache_notes: Vec::new(),
        });
    }

    let (result, threshold) = em_tiny(a0, config, cache_dir)?;

    if a0 <= 10 {
        // dual-method band: the brute-force oracle must agree
        let (n0, brute) = oracle_decimal_tiny(a0, config)?;
        if Integer::from(n0) != result.n0 {
            return Err(Error::ConditionViolated(format!(
                "oracle threshold {n0} disagrees with certified {}",
                result.n0
            )));
        }
        if brute.exponent() != result.t.exponent() {
            return Err(Error::ConditionViolated(
                "oracle and Euler-Maclaurin exponents disagree".into(),
            ));
        }
        let agree = digits_in_agreement(brute.mantissa(), result.t.mantissa());
        if agree < 40 {
            return Err(Error::ConditionViolated(format!(
                "oracle and Euler-Maclaurin mantissas agree to only {agree} digits"
            )));
        }
    }
    if a0 >= 10 {
        stirling_containment(&result, &threshold, config)?;
    }
    Ok(result)
}

fn oracle_decimal_tiny(a0: u32, config: &PipelineConfig) -> Result<(u64, SciNumber)> {
    let wd = config.oracle_working_digits.max(70);
    let run = oracle::brute_force_threshold(a0, BruteMode::Decimal { working_digits: wd })?;
    match oracle::brute_force_tiny(&run)? {
        BruteTiny::Sci(s) => Ok((run.n0, s)),
        BruteTiny::Rational(_) => unreachable!(),
    }
}

/// Assert the Euler-Maclaurin `lg t` lies inside the Stirling bracket.
fn stirling_containment(
    result: &TinyResult,
    threshold: &ThresholdResult,
    config: &PipelineConfig,
) -> Result<()> {
    let ctx = config.fact_params.context();
    let (lo, hi) =
        crate::stirling::tiny_bounds_stirling(result.a0, &result.n0, &threshold.sum_excess, &ctx)?;
    // reconstruct lg t from the result's mantissa and exponent
    let prec = result.t.mantissa().prec();
    let mut lg = Float::with_val(prec, result.t.mantissa().log10_ref());
    lg += Float::with_val(prec, result.t.exponent());
    let lg_lo = {
        let mut v = Float::with_val(prec, lo.mantissa().log10_ref());
        v += Float::with_val(prec, lo.exponent());
        v
    };
    let lg_hi = {
        let mut v = Float::with_val(prec, hi.mantissa().log10_ref());
        v += Float::with_val(prec, hi.exponent());
        v
    };
    // the bracket holds the true value; our lg t sits within its own
    // certified error of the truth
    let slack = crate::mpnum::pow10_float(-(result.certified_digits as i64), 32) * 2u32;
    if lg < Float::with_val(prec, &lg_lo - &slack) || lg > Float::with_val(prec, &lg_hi + &slack) {
        return Err(Error::ConditionViolated(format!(
            "Stirling bracket does not contain the Euler-Maclaurin value for a0 = {}",
            result.a0
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp_cache(tag: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("tinysinc-tiny-{tag}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        dir
    }

    #[test]
    fn exact_tiny_examples() {
        // a0 = 1, n0 = 2, s = 4/3: t = 1/12
        let t = exact_tiny_rational(1, 2, &Rational::from((4, 3))).unwrap();
        assert_eq!(t, Rational::from((1, 12)));
        // a0 = 2, n0 = 8: the published fraction
        let s = Rational::from((91072, 45045));
        let t = exact_tiny_rational(2, 8, &s).unwrap();
        let p: Integer = "3377940044732998170721".parse().unwrap();
        let q: Integer = "168579263752214678679209808915000000".parse().unwrap();
        assert_eq!(t, Rational::from((p, q)));
        // violated condition
        assert!(matches!(
            exact_tiny_rational(2, 7, &Rational::from((88069, 45045))),
            Err(Error::ConditionViolated(_))
        ));
    }

    #[test]
    fn tiny_decimal_rendering_small() {
        let t = exact_tiny_rational(1, 2, &Rational::from((4, 3))).unwrap();
        let sci = rational_to_sci(&t, 41);
        assert_eq!(
            sci.to_string_with_digits(41),
            "8.3333333333333333333333333333333333333333e-2"
        );
    }

    #[test]
    fn compute_tiny_small_table_rows() {
        let cfg = PipelineConfig::default();
        let cache = tmp_cache("small");
        let r = compute_tiny(3, &cfg, &cache).unwrap();
        assert_eq!(r.n0, Integer::from(57));
        assert_eq!(r.method, Method::ExactRational);
        assert_eq!(
            r.t.to_string_with_digits(41),
            "4.2814541036242680424608725308114449824436e-143"
        );
        let r = compute_tiny(5, &cfg, &cache).unwrap();
        assert_eq!(r.n0, Integer::from(3092));
        assert_eq!(r.method, Method::BruteDecimal);
        assert_eq!(
            r.t.to_string_with_digits(41),
            "2.5899544469237193354708111256703110686749e-13544"
        );
        let _ = std::fs::remove_dir_all(&cache);
    }
}
