//! Certified computation of the threshold index `n0` at which the
//! odd-harmonic sum first exceeds the integer `a0`.

use rug::{Float, Integer};

use crate::error::{BindingKnob, Error, Result};
use crate::euler_maclaurin::{phi, phi_derivative, r_tilde_odd_harmonic, EMParams};
use crate::mpnum::{decimal_bits, pow10, pow10_float, ulp, SigValue};
use crate::partial_sums::{InitialSum, SumKind};

/// A certified threshold: `s(n0 - 1) < a0 < s(n0)`, with the sum excess
/// `s(n0) - a0` strictly positive beyond its own error bound.
#[derive(Clone, Debug)]
pub struct ThresholdResult {
    pub a0: u32,
    pub n0: Integer,
    pub sum_excess: SigValue,
    /// `|R~_mu(m, n0)|`, the Euler-Maclaurin remainder magnitude at `n0`.
    pub remainder_magnitude: Float,
    /// The real root of `s(m-1) + phi(m, x) = a0`.
    pub root: Float,
}

fn check_preconditions(a0: u32, params: &EMParams, s_init: &InitialSum) -> Result<()> {
    params.validate()?;
    if s_init.kind != SumKind::OddHarmonic || s_init.m != params.m {
        return Err(Error::Precondition(
            "threshold solving needs the odd-harmonic initial block for the same m".into(),
        ));
    }
    if Float::with_val(32, a0) <= *s_init.value.value() {
        return Err(Error::Precondition(format!(
            "a0 = {a0} does not exceed the initial block; the Euler-Maclaurin path needs a0 > s(m-1)"
        )));
    }
    Ok(())
}

/// Bit precision for the root search: enough digits for the root magnitude,
/// the accuracy goal, and slack.
fn root_bits(a0: u32, params: &EMParams, s_init: &InitialSum) -> u32 {
    let s0 = s_init.value.value().to_f64();
    let ln_r = 2.0 * (a0 as f64 - s0) + (params.m as f64).ln();
    let digits = (ln_r / std::f64::consts::LN_10).ceil().max(1.0) as u32;
    decimal_bits(
        digits + params.accuracy_goal + params.working_digits.max(params.n_decimals) + 10,
    )
}

/// Solve `s(m-1) + phi_mu(m, x) = a0` for real `x`.
///
/// `phi` is strictly increasing in `x`, so a sign change located by bisection
/// (in log space, starting from the safe bracket `[m, 10^a0]`) guarantees the
/// Newton refinement converges; iteration stops once the step drops below
/// `10^-accuracy_goal`.
pub fn solve_root(a0: u32, params: &EMParams, s_init: &InitialSum) -> Result<Float> {
    check_preconditions(a0, params, s_init)?;
    let prec = root_bits(a0, params, s_init);
    let m = params.m;
    let mu = params.mu;
    let s0 = Float::with_val(prec, s_init.value.value());
    let f = |x: &Float| -> Float {
        let mut v = phi(mu, m, x, prec);
        v += &s0;
        v -= Float::with_val(prec, a0);
        v
    };

    let mut lo = Float::with_val(prec, m);
    let mut hi = Float::with_val(prec, pow10(a0 as u64));
    if f(&lo).cmp0() != Some(std::cmp::Ordering::Less) {
        return Err(Error::Precondition(format!(
            "sum already exceeds a0 = {a0} at the split point m = {m}"
        )));
    }
    if f(&hi).cmp0() != Some(std::cmp::Ordering::Greater) {
        return Err(Error::RootDidNotConverge);
    }

    // geometric bisection until the bracket is tight enough for Newton
    for _ in 0..64 {
        let ratio = Float::with_val(prec, &hi / &lo);
        if ratio < 1.001f64 {
            break;
        }
        let mid = Float::with_val(prec, &hi * &lo).sqrt();
        if f(&mid).cmp0() == Some(std::cmp::Ordering::Less) {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let tol = pow10_float(-(params.accuracy_goal as i64), 32);
    let mut x = Float::with_val(prec, &lo + &hi) / 2u32;
    for _ in 0..200 {
        let fx = f(&x);
        match fx.cmp0() {
            Some(std::cmp::Ordering::Less) => lo = x.clone(),
            Some(std::cmp::Ordering::Greater) => hi = x.clone(),
            _ => return Ok(x),
        }
        let deriv = phi_derivative(mu, m, &x, prec);
        let step = Float::with_val(prec, &fx / &deriv);
        let mut next = Float::with_val(prec, &x - &step);
        if next <= lo || next >= hi {
            next = Float::with_val(prec, &lo + &hi) / 2u32;
        }
        let moved = Float::with_val(64, &next - &x).abs();
        x = next;
        if moved < tol {
            return Ok(x);
        }
        let width = Float::with_val(64, &hi - &lo);
        if width < tol {
            return Ok(x);
        }
    }
    Err(Error::RootDidNotConverge)
}

/// Certify that `n0 = floor(r) + 1` satisfies `s(n0 - 1) < a0 < s(n0)`.
///
/// The check point is `floor(r)` when the remainder bound is positive and
/// `floor(r) + 1` when negative; certification demands
/// `|s(m-1) + phi(m, n) - a0| > |R~_mu(m, n)|` there, with every error
/// contribution accounted. On failure the dominating contribution names the
/// binding knob to raise.
pub fn certify_n0(
    a0: u32,
    root: &Float,
    params: &EMParams,
    s_init: &InitialSum,
) -> Result<ThresholdResult> {
    check_preconditions(a0, params, s_init)?;
    let ctx = params.context();
    let prec = params.sum_bits(8);
    let mu = params.mu;
    let m = params.m;

    let floor_r = Float::with_val(root.prec(), root.floor_ref())
        .to_integer()
        .ok_or(Error::InsufficientPrecision)?;

    let sign_probe = r_tilde_odd_harmonic(mu, m, root, &ctx)?;
    let check_n = if sign_probe.value().cmp0() == Some(std::cmp::Ordering::Greater) {
        floor_r.clone()
    } else {
        Integer::from(&floor_r + 1u32)
    };

    let check_x = Float::with_val(prec, &check_n);
    let phi_check = phi(mu, m, &check_x, prec);
    let mut margin_val = Float::with_val(prec, s_init.value.value() + &phi_check);
    margin_val -= Float::with_val(prec, a0);
    let margin_err = {
        let mut e = Float::with_val(32, s_init.value.abs_error());
        e += ulp(&margin_val) * 4u32;
        e
    };

    let r_check = r_tilde_odd_harmonic(mu, m, &check_x, &ctx)?;
    let r_bound = Float::with_val(32, r_check.value().abs_ref()) + r_check.abs_error();

    let margin_abs = Float::with_val(prec, margin_val.abs_ref());
    let certified = {
        let lhs = Float::with_val(prec, &margin_abs - &margin_err);
        lhs > r_bound
    };
    if !certified {
        let rem_mag = Float::with_val(32, r_check.value().abs_ref());
        let binding = if rem_mag >= *s_init.value.abs_error() && rem_mag >= *r_check.abs_error() {
            BindingKnob::MuOrM
        } else if *s_init.value.abs_error() >= *r_check.abs_error() {
            BindingKnob::NDecimals
        } else {
            BindingKnob::WorkingDigits
        };
        return Err(Error::CriterionFailed {
            a0,
            margin: format!("{:e}", margin_abs.to_f64()),
            bound: format!("{:e}", r_bound.to_f64()),
            binding,
        });
    }

    let n0 = Integer::from(&floor_r + 1u32);
    let (phi_n0, r_n0) = if check_n == n0 {
        (phi_check, r_check)
    } else {
        let x0 = Float::with_val(prec, &n0);
        (phi(mu, m, &x0, prec), r_tilde_odd_harmonic(mu, m, &x0, &ctx)?)
    };

    let mut excess_val = Float::with_val(prec, s_init.value.value() + &phi_n0);
    excess_val -= Float::with_val(prec, a0);
    let remainder_magnitude = Float::with_val(32, r_n0.value().abs_ref());
    let excess_err = {
        let mut e = Float::with_val(32, s_init.value.abs_error());
        e += &remainder_magnitude;
        e += r_n0.abs_error();
        e += ulp(&excess_val) * 4u32;
        e
    };
    let sum_excess = SigValue::new(excess_val, excess_err);
    if !sum_excess.certified_positive() {
        return Err(Error::CriterionFailed {
            a0,
            margin: format!("{:e}", sum_excess.value().to_f64()),
            bound: format!("{:e}", sum_excess.abs_error().to_f64()),
            binding: BindingKnob::MuOrM,
        });
    }

    Ok(ThresholdResult {
        a0,
        n0,
        sum_excess,
        remainder_magnitude,
        root: root.clone(),
    })
}

/// Ratios `n0(a0 + 1) / n0(a0)` for a list of consecutive thresholds; these
/// approach e^2.
pub fn e_squared_ratio_check(thresholds: &[(u32, Integer)], prec: u32) -> Vec<Float> {
    let mut out = Vec::new();
    for pair in thresholds.windows(2) {
        let (a_prev, n_prev) = &pair[0];
        let (a_next, n_next) = &pair[1];
        assert_eq!(a_prev + 1, *a_next, "ratios need consecutive a0 values");
        let num = Float::with_val(prec, n_next);
        let den = Float::with_val(prec, n_prev);
        out.push(num / den);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partial_sums::initial_odd_harmonic_sum;

    fn small_params() -> EMParams {
        EMParams {
            m: 1001,
            mu: 5,
            n_decimals: 60,
            accuracy_goal: 20,
            working_digits: 40,
        }
    }

    #[test]
    fn rejects_a0_below_initial_block() {
        let params = small_params();
        let s = initial_odd_harmonic_sum(params.m, params.n_decimals);
        // s(1000) ~ 4.44, so a0 = 4 is out of the EM path's domain
        assert!(matches!(
            solve_root(4, &params, &s),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn certified_threshold_matches_brute_force_small() {
        // a0 = 5 and 6 are cheap enough to confirm against direct summation
        let params = small_params();
        let s = initial_odd_harmonic_sum(params.m, params.n_decimals);
        for a0 in [5u32, 6] {
            let root = solve_root(a0, &params, &s).unwrap();
            let thr = certify_n0(a0, &root, &params, &s).unwrap();
            let brute = crate::oracle::brute_force_threshold(
                a0,
                crate::oracle::BruteMode::Decimal { working_digits: 70 },
            )
            .unwrap();
            assert_eq!(thr.n0, Integer::from(brute.n0), "a0 = {a0}");
        }
    }

    #[test]
    fn phi_is_strictly_increasing() {
        let prec = 256;
        let params = small_params();
        let mut prev: Option<Float> = None;
        for exp in 1..=8u32 {
            let x = Float::with_val(prec, pow10(exp as u64) * 3u32);
            let v = phi(params.mu, params.m, &x, prec);
            if let Some(p) = prev {
                assert!(v > p);
            }
            prev = Some(v);
        }
    }

    #[test]
    fn reruns_with_larger_mu_keep_n0() {
        let s = initial_odd_harmonic_sum(1001, 60);
        let mut n0s = Vec::new();
        let mut errs = Vec::new();
        for mu in [3u32, 6, 10] {
            let params = EMParams {
                mu,
                ..small_params()
            };
            let root = solve_root(6, &params, &s).unwrap();
            let thr = certify_n0(6, &root, &params, &s).unwrap();
            n0s.push(thr.n0.clone());
            errs.push(Float::with_val(32, thr.sum_excess.abs_error()));
        }
        assert!(n0s.windows(2).all(|w| w[0] == w[1]));
        assert!(errs.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn ratio_check_shapes() {
        let prec = 64;
        assert!(e_squared_ratio_check(&[(3, Integer::from(57))], prec).is_empty());
        let ratios = e_squared_ratio_check(
            &[
                (4, Integer::from(419)),
                (5, Integer::from(3092)),
                (6, Integer::from(22846)),
            ],
            prec,
        );
        assert_eq!(ratios.len(), 2);
        assert!((ratios[0].to_f64() - 7.37947494).abs() < 1e-6);
        assert!((ratios[1].to_f64() - 7.38874515).abs() < 1e-6);
    }
}
