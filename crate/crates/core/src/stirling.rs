//! Two-sided refined Stirling bounds on `lg(n!)` and `lg((n!)^2/(2n)!)`,
//! with directed rounding throughout so the brackets stay sound in finite
//! precision. These cross-validate the Euler-Maclaurin factorial path and
//! give fast certified leading digits of `t`.

use rug::float::Round;
use rug::ops::AssignRound;
use rug::{Float, Integer};

use crate::error::{Error, Result};
use crate::mpnum::{
    decimal_bits, mantissa_exponent, ulp, GetMeBehavior, PrecisionContext, SciNumber, SigValue,
};

/// A certified two-sided bracket on a base-10 logarithm.
#[derive(Clone, Debug)]
pub struct LogBracket {
    pub lower: Float,
    pub upper: Float,
}

fn rnd<T>(prec: u32, val: T, round: Round) -> Float
where
    Float: AssignRound<T, Round = Round, Ordering = std::cmp::Ordering>,
{
    Float::with_val_round(prec, val, round).0
}

fn opposite(round: Round) -> Round {
    match round {
        Round::Down => Round::Up,
        Round::Up => Round::Down,
        _ => round,
    }
}

/// `lg e = 1/ln 10`, biased in the direction `round`.
fn lg_e(prec: u32, round: Round) -> Float {
    let ln10 = rnd(prec, Float::with_val(prec, 10u32).ln_ref(), opposite(round));
    rnd(prec, ln10.recip_ref(), round)
}

/// Common prefix of both refined Stirling formulas:
/// `n lg(n/e) + lg(2 pi n)/2`, biased in the direction `round`.
fn stirling_main(n: &Integer, prec: u32, round: Round) -> Float {
    let nf = Float::with_val(prec.max(n.significant_bits() + 8), n);
    let lg_n = rnd(prec, nf.log10_ref(), round);
    let lge = lg_e(prec, opposite(round));
    let lg_n_over_e = rnd(prec, &lg_n - &lge, round);
    let t1 = rnd(prec, &lg_n_over_e * n, round);

    let pi = rnd(prec, rug::float::Constant::Pi, round);
    let two_pi_n = rnd(prec, &pi * &Float::with_val(prec, Integer::from(n * 2u32)), round);
    let mut t2 = rnd(prec, two_pi_n.log10_ref(), round);
    t2 /= 2u32; // exact in binary

    rnd(prec, &t1 + &t2, round)
}

/// Lower-bound formula `b1(n) = n lg(n/e) + lg(2 pi n)/2 + lg e/(12n + 3/(4n+2))`,
/// computed so the result is biased in the direction `round`.
fn b1(n: &Integer, prec: u32, round: Round) -> Float {
    let main = stirling_main(n, prec, round);
    let lge = lg_e(prec, round);
    let denom = {
        let inner = rnd(
            prec,
            Float::with_val(prec, Integer::from(n * 4u32) + 2u32).recip_ref(),
            opposite(round),
        );
        let three_over = rnd(prec, &inner * &Float::with_val(prec, 3u32), opposite(round));
        rnd(
            prec,
            &three_over + &Float::with_val(prec, Integer::from(n * 12u32)),
            opposite(round),
        )
    };
    let corr = rnd(prec, &lge / &denom, round);
    rnd(prec, &main + &corr, round)
}

/// Upper-bound formula `b2(n) = n lg(n/e) + lg(2 pi n)/2 + lg e/(12n)`,
/// biased in the direction `round`.
fn b2(n: &Integer, prec: u32, round: Round) -> Float {
    let main = stirling_main(n, prec, round);
    let lge = lg_e(prec, round);
    let denom = Float::with_val(prec, Integer::from(n * 12u32));
    let corr = rnd(prec, &lge / &denom, round);
    rnd(prec, &main + &corr, round)
}

fn bracket_bits(n: &Integer, working_digits: u32) -> u32 {
    let n_digits = n.to_string().len() as u32;
    decimal_bits(working_digits + 2 * n_digits + 25)
}

/// Certified bracket on `lg(n!)`.
pub fn log10_factorial_bounds(n: &Integer, working_digits: u32) -> LogBracket {
    assert!(n.cmp0() == std::cmp::Ordering::Greater);
    let prec = bracket_bits(n, working_digits);
    let bracket = LogBracket {
        lower: b1(n, prec, Round::Down),
        upper: b2(n, prec, Round::Up),
    };
    debug_assert!(bracket.lower <= bracket.upper);
    bracket
}

/// Certified bracket on `lg((n!)^2 / (2n)!)`: lower `2 b1(n) - b2(2n)`,
/// upper `2 b2(n) - b1(2n)`.
pub fn log10_central_ratio_bounds(n: &Integer, working_digits: u32) -> LogBracket {
    assert!(n.cmp0() == std::cmp::Ordering::Greater);
    let prec = bracket_bits(n, working_digits);
    let two_n = Integer::from(n * 2u32);
    let lower = {
        let mut t = b1(n, prec, Round::Down);
        t *= 2u32;
        rnd(prec, &t - &b2(&two_n, prec, Round::Up), Round::Down)
    };
    let upper = {
        let mut t = b2(n, prec, Round::Up);
        t *= 2u32;
        rnd(prec, &t - &b1(&two_n, prec, Round::Down), Round::Up)
    };
    debug_assert!(lower <= upper);
    LogBracket { lower, upper }
}

/// Stirling-bracketed `t`: lower and upper scientific numbers whose mantissa
/// agreement is measured with `digits_in_agreement`.
///
/// `lg t = n lg(s - a0) - (2n - 1) lg 2 - lg((n!)^2/(2n)!)`, so the lower end
/// uses the upper ratio bound and vice versa; every step is rounded in the
/// direction that preserves the bracket.
pub fn tiny_bounds_stirling(
    a0: u32,
    n: &Integer,
    sum_excess: &SigValue,
    ctx: &PrecisionContext,
) -> Result<(SciNumber, SciNumber)> {
    let _ = a0;
    if !sum_excess.certified_positive() {
        return Err(Error::Precondition(
            "Stirling bracket needs a certified-positive sum excess".into(),
        ));
    }
    let prec = bracket_bits(n, ctx.working_digits());
    let ratio = log10_central_ratio_bounds(n, ctx.working_digits());
    let two_n_minus_1 = {
        let mut t = Integer::from(n * 2u32);
        t -= 1u32;
        t
    };

    let z_with = |dir: Round| -> Float {
        let lg_s = rnd(prec, sum_excess.value().log10_ref(), dir);
        let t1 = rnd(prec, &lg_s * n, dir);
        let lg2 = rnd(prec, Float::with_val(prec, 2u32).log10_ref(), opposite(dir));
        let t2 = rnd(
            prec,
            &lg2 * &Float::with_val(prec, &two_n_minus_1),
            opposite(dir),
        );
        let partial = rnd(prec, &t1 - &t2, dir);
        let ratio_term = match dir {
            Round::Down => &ratio.upper,
            _ => &ratio.lower,
        };
        rnd(prec, &partial - ratio_term, dir)
    };
    let z_lo = z_with(Round::Down);
    let z_hi = z_with(Round::Up);

    // certified digits come from the input's error through d(lg t)/d(s):
    // n * abs_error / ((s - a0) ln 10), doubled for safety
    let delta_z = {
        let mut rel = Float::with_val(64, sum_excess.abs_error() / sum_excess.value());
        rel *= Float::with_val(64, n);
        rel /= Float::with_val(64, 10u32).ln();
        rel *= 2u32;
        let mut d = Float::with_val(32, rel);
        d.next_up();
        d += ulp(&z_lo) * 32u32;
        d
    };

    let lo = mantissa_exponent(&SigValue::new(z_lo, delta_z.clone()), prec, GetMeBehavior::Signal)?;
    let hi = mantissa_exponent(&SigValue::new(z_hi, delta_z), prec, GetMeBehavior::Signal)?;
    Ok((lo, hi))
}
