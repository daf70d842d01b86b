//! Arbitrary-precision numeric substrate with explicit significance tracking.
//!
//! The working representation is binary (MPFR via `rug`), but every external
//! contract is stated in decimal digits: values are rounded at decimal
//! positions justified by certified absolute error bounds, and mantissas are
//! extracted from base-10 logarithms whose integer part may have dozens of
//! digits. Ten guard decimal digits are always added internally so the
//! decimal rounding is stable.

pub mod decimal;
mod scinumber;

use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
pub use decimal::{
    float_to_rational, floor_neg_log10, leading_digits, pow10, round_float_at,
    round_rational_at, rounded_digits, Decimal,
};
pub use scinumber::{
    digits_in_agreement, mantissa_exponent, rational_to_sci, GetMeBehavior, SciNumber,
};

/// Extra decimal digits carried beyond the requested working precision so
/// that binary/decimal conversions never eat into the contract digits.
pub const GUARD_DECIMAL_DIGITS: u32 = 10;

const LOG2_10: f64 = 3.321928094887362;

/// Bits needed to carry `decimal_digits` significant decimal digits, plus
/// conversion slack.
pub fn decimal_bits(decimal_digits: u32) -> u32 {
    ((decimal_digits as f64) * LOG2_10).ceil() as u32 + 16
}

/// Decimal digits of precision for all arithmetic performed under a context.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionContext {
    working_digits: u32,
}

impl PrecisionContext {
    pub fn new(working_digits: u32) -> Self {
        assert!(working_digits >= 10, "working precision below 10 digits");
        PrecisionContext { working_digits }
    }

    pub fn working_digits(&self) -> u32 {
        self.working_digits
    }

    /// Bit precision used for floats created under this context.
    pub fn bits(&self) -> u32 {
        decimal_bits(self.working_digits + GUARD_DECIMAL_DIGITS)
    }

    /// A context for values whose integer part needs `int_digits` extra
    /// decimal digits in front of the working digits.
    pub fn widened(&self, int_digits: u32) -> PrecisionContext {
        PrecisionContext {
            working_digits: self.working_digits + int_digits,
        }
    }
}

/// One unit in the last place of `v`, as an upper bound on a single MPFR
/// rounding. Exact zeros cost nothing.
pub fn ulp(v: &Float) -> Float {
    match v.get_exp() {
        Some(e) => {
            let mut u = Float::with_val(32, 1);
            u <<= e - v.prec() as i32;
            u
        }
        None => Float::with_val(32, 0),
    }
}

fn err_add(a: &Float, b: &Float) -> Float {
    let mut e = Float::with_val(32, a + b);
    e.next_up();
    e
}

/// An arbitrary-precision real paired with a certified bound on its absolute
/// error. Error bounds are kept at low precision and always rounded up.
#[derive(Clone, Debug)]
pub struct SigValue {
    value: Float,
    abs_error: Float,
}

impl SigValue {
    pub fn new(value: Float, abs_error: Float) -> Self {
        assert!(abs_error.cmp0() != Some(std::cmp::Ordering::Less));
        let mut abs_error = Float::with_val(32, abs_error);
        abs_error.next_up();
        SigValue { value, abs_error }
    }

    /// A value known exactly (error bound zero).
    pub fn exact(value: Float) -> Self {
        SigValue {
            value,
            abs_error: Float::with_val(32, 0),
        }
    }

    pub fn value(&self) -> &Float {
        &self.value
    }

    pub fn abs_error(&self) -> &Float {
        &self.abs_error
    }

    pub fn is_exact(&self) -> bool {
        self.abs_error.cmp0() == Some(std::cmp::Ordering::Equal)
    }

    /// Certified positive: the value exceeds its own error bound.
    pub fn certified_positive(&self) -> bool {
        self.value > self.abs_error
    }

    /// Widen the error bound by `extra`.
    pub fn with_extra_error(mut self, extra: &Float) -> Self {
        self.abs_error = err_add(&self.abs_error, extra);
        self
    }

    pub fn add(&self, other: &SigValue, prec: u32) -> SigValue {
        let value = Float::with_val(prec, &self.value + &other.value);
        let e = err_add(&self.abs_error, &other.abs_error);
        SigValue {
            abs_error: err_add(&e, &ulp(&value)),
            value,
        }
    }

    pub fn sub(&self, other: &SigValue, prec: u32) -> SigValue {
        let value = Float::with_val(prec, &self.value - &other.value);
        let e = err_add(&self.abs_error, &other.abs_error);
        SigValue {
            abs_error: err_add(&e, &ulp(&value)),
            value,
        }
    }

    /// Multiply by an exactly-known rational constant: the error bound scales
    /// by `|c|`.
    pub fn mul_exact(&self, c: &Rational, prec: u32) -> SigValue {
        let value = Float::with_val(prec, &self.value * c);
        let mut scale = Float::with_val(32, c);
        scale.abs_mut();
        scale.next_up();
        let mut e = Float::with_val(32, &self.abs_error * &scale);
        e.next_up();
        SigValue {
            abs_error: err_add(&e, &ulp(&value)),
            value,
        }
    }

    /// Natural logarithm of a certified-positive value; the error bound maps
    /// through `|ln'| = 1/value` with a factor-two safety margin.
    pub fn ln(&self, prec: u32) -> Result<SigValue> {
        if !self.certified_positive() {
            return Err(Error::Precondition(
                "ln of a value that is not certified positive".into(),
            ));
        }
        let value = Float::with_val(prec, self.value.ln_ref());
        let rel = Float::with_val(32, &self.abs_error / &self.value);
        let mut e = rel * 2u32;
        e.next_up();
        Ok(SigValue {
            abs_error: err_add(&e, &ulp(&value)),
            value,
        })
    }
}

/// Keep only the digits of `v.value` justified by `v.abs_error`.
///
/// With `d = floor(-log10(abs_error))`, the value is rounded half away from
/// zero at `d` fractional decimal digits; digits beyond that position are not
/// certified. Exactly-known values pass through unchanged, as do values whose
/// representation already stops above the rounding position.
pub fn remove_questionable_digits(v: &SigValue) -> Result<Float> {
    if v.is_exact() {
        return Ok(v.value().clone());
    }
    Ok(justified_decimal(v)?.to_float(v.value().prec()))
}

/// Decimal form of [`remove_questionable_digits`]; this is what gets printed
/// and cached.
pub fn justified_decimal(v: &SigValue) -> Result<Decimal> {
    if v.is_exact() {
        return Ok(exact_float_to_decimal(v.value()));
    }
    let abs_value = Float::with_val(v.value().prec(), v.value().abs_ref());
    if *v.abs_error() >= abs_value {
        return Err(Error::NoSignificantDigits);
    }
    let d = floor_neg_log10(v.abs_error());
    Ok(round_float_at(v.value(), d))
}

/// Exact decimal rendering of a binary float: `m 2^-e = m 5^e 10^-e`.
fn exact_float_to_decimal(v: &Float) -> Decimal {
    match v.to_integer_exp() {
        Some((m, e)) => {
            if e >= 0 {
                Decimal {
                    digits: m << e as u32,
                    scale: 0,
                }
            } else {
                let scale = (-e) as u64;
                let five = Integer::from(Integer::u_pow_u(5, scale as u32));
                Decimal {
                    digits: m * five,
                    scale: scale as i64,
                }
            }
        }
        None => Decimal::zero(),
    }
}

/// Exact power of ten as a float error bound, rounded up.
pub fn pow10_error(scale: i64) -> Float {
    let half = Rational::from((1u32, 2u32));
    let q = if scale >= 0 {
        half / pow10(scale as u64)
    } else {
        half * pow10((-scale) as u64)
    };
    let mut e = Float::with_val(32, &q);
    e.next_up();
    e
}

/// 10^k as a float at `prec` bits (k may be negative).
pub fn pow10_float(k: i64, prec: u32) -> Float {
    if k >= 0 {
        Float::with_val(prec, pow10(k as u64))
    } else {
        Float::with_val(prec, Rational::from((Integer::from(1), pow10((-k) as u64))))
    }
}
