//! Exact decimal views of arbitrary-precision binary floats.
//!
//! Everything the library prints, caches or compares against golden tables is
//! a decimal string, while the working representation is binary (MPFR). The
//! conversions in this module are exact: a [`Float`] is turned into a
//! [`Rational`] without rounding, scaled by a power of ten, and only then
//! rounded once, half away from zero.

use std::fmt;
use std::str::FromStr;

use rug::{Float, Integer, Rational};

use crate::error::Error as MpError;

/// A plain decimal number `digits * 10^-scale`.
///
/// `scale` may be negative (value is an integer multiple of `10^|scale|`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decimal {
    pub digits: Integer,
    pub scale: i64,
}

pub fn pow10(k: u64) -> Integer {
    Integer::from(Integer::u_pow_u(10, k as u32))
}

/// Exact rational value of a finite float.
pub fn float_to_rational(v: &Float) -> Rational {
    assert!(v.is_finite(), "non-finite float has no rational value");
    match v.to_integer_exp() {
        Some((m, e)) => {
            if e >= 0 {
                Rational::from(m << e as u32)
            } else {
                Rational::from((m, Integer::from(1) << (-e) as u32))
            }
        }
        None => Rational::new(),
    }
}

/// Nearest integer to `q`, ties away from zero.
pub fn round_rational_half_away(q: &Rational) -> Integer {
    let (num, den) = Rational::from(q).into_numer_denom();
    let (quot, rem) = num.div_rem(den.clone());
    let mut result = quot;
    let double_rem = Integer::from(rem.abs_ref()) * 2u32;
    if double_rem >= den {
        if q.cmp0() == std::cmp::Ordering::Less {
            result -= 1;
        } else {
            result += 1;
        }
    }
    result
}

/// Round an exact rational at `scale` fractional decimal digits.
pub fn round_rational_at(value: &Rational, scale: i64) -> Decimal {
    let scaled = if scale >= 0 {
        Rational::from(value * &pow10(scale as u64))
    } else {
        Rational::from(value / &pow10((-scale) as u64))
    };
    Decimal {
        digits: round_rational_half_away(&scaled),
        scale,
    }
}

/// Round a float at `scale` fractional decimal digits, half away from zero.
/// The float is converted exactly first, so this is a single rounding.
pub fn round_float_at(value: &Float, scale: i64) -> Decimal {
    round_rational_at(&float_to_rational(value), scale)
}

/// `floor(-log10(x))` for a positive value, computed exactly.
///
/// This is the number of fractional decimal digits justified by an absolute
/// error `x`: the largest `d` with `x <= 10^-d`.
pub fn floor_neg_log10(x: &Float) -> i64 {
    assert!(x.is_finite() && x.cmp0() == Some(std::cmp::Ordering::Greater));
    let q = float_to_rational(x);
    // f64 first guess, then exact adjustment by rational comparison.
    let approx = -x.to_f64().log10();
    let mut d = if approx.is_finite() {
        approx.floor() as i64
    } else {
        0
    };
    let le_pow = |d: i64| -> bool {
        // q <= 10^-d
        if d >= 0 {
            Rational::from(&q * &pow10(d as u64)) <= 1u32
        } else {
            q <= pow10((-d) as u64)
        }
    };
    while !le_pow(d) {
        d -= 1;
    }
    while le_pow(d + 1) {
        d += 1;
    }
    d
}

impl Decimal {
    pub fn zero() -> Self {
        Decimal {
            digits: Integer::new(),
            scale: 0,
        }
    }

    pub fn is_negative(&self) -> bool {
        self.digits.cmp0() == std::cmp::Ordering::Less
    }

    pub fn to_rational(&self) -> Rational {
        if self.scale >= 0 {
            Rational::from((self.digits.clone(), pow10(self.scale as u64)))
        } else {
            Rational::from(self.digits.clone() * pow10((-self.scale) as u64))
        }
    }

    /// Binary float carrying this decimal, correctly rounded once at `prec`.
    pub fn to_float(&self, prec: u32) -> Float {
        Float::with_val(prec, &self.to_rational())
    }

    /// Re-round at a coarser scale. Returns `None` when the dropped tail is an
    /// exact rounding tie, in which case re-rounding may disagree with a
    /// direct rounding of the original value and the caller must recompute.
    pub fn round_at(&self, scale: i64) -> Option<Decimal> {
        if scale >= self.scale {
            let shift = pow10((scale - self.scale) as u64);
            return Some(Decimal {
                digits: Integer::from(&self.digits * &shift),
                scale,
            });
        }
        let div = pow10((self.scale - scale) as u64);
        let (quot, rem) = Integer::from(&self.digits).div_rem(div.clone());
        let double_rem = Integer::from(rem.abs_ref()) * 2u32;
        if double_rem == div {
            return None; // exact tie: cannot re-round faithfully
        }
        let mut digits = quot;
        if double_rem > div {
            if self.is_negative() {
                digits -= 1;
            } else {
                digits += 1;
            }
        }
        Some(Decimal { digits, scale })
    }
}

impl fmt::Display for Decimal {
    /// Plain decimal notation with exactly `scale` fractional digits
    /// (no exponent), e.g. `-602056.74275297175655031271186`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let neg = self.is_negative();
        let abs = Integer::from(self.digits.abs_ref());
        let s = if self.scale <= 0 {
            (abs * pow10((-self.scale) as u64)).to_string()
        } else {
            let digits = abs.to_string();
            let scale = self.scale as usize;
            if digits.len() <= scale {
                format!("0.{}{}", "0".repeat(scale - digits.len()), digits)
            } else {
                let (int_part, frac_part) = digits.split_at(digits.len() - scale);
                format!("{int_part}.{frac_part}")
            }
        };
        write!(f, "{}{}", if neg { "-" } else { "" }, s)
    }
}

impl FromStr for Decimal {
    type Err = MpError;

    fn from_str(s: &str) -> Result<Self, MpError> {
        let s = s.trim();
        let bad = || MpError::Parse(format!("invalid decimal literal {s:?}"));
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        if body.is_empty() {
            return Err(bad());
        }
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        let joined: String = int_part.chars().chain(frac_part.chars()).collect();
        if !joined.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let mut digits = Integer::from_str(&joined).map_err(|_| bad())?;
        if neg {
            digits = -digits;
        }
        Ok(Decimal {
            digits,
            scale: frac_part.len() as i64,
        })
    }
}

/// Leading decimal digits of a nonzero float, truncated (never rounded).
///
/// Returns `(negative, exp10, digits)` where the value is
/// `±0.d1 d2 ... * 10^(exp10 + 1)`, i.e. `digits[0]` has weight `10^exp10`.
pub fn leading_digits(v: &Float, len: usize) -> (bool, i64, String) {
    assert!(v.is_finite() && v.cmp0() != Some(std::cmp::Ordering::Equal));
    assert!(len > 0);
    let neg = v.cmp0() == Some(std::cmp::Ordering::Less);
    let q = float_to_rational(v).abs();
    // exp10 = floor(log10 |v|), exact.
    let approx = v.to_f64().abs().log10();
    let mut e = if approx.is_finite() {
        approx.floor() as i64
    } else {
        0
    };
    let ge_pow = |e: i64| -> bool {
        if e >= 0 {
            q >= pow10(e as u64)
        } else {
            Rational::from(&q * &pow10((-e) as u64)) >= 1u32
        }
    };
    while !ge_pow(e) {
        e -= 1;
    }
    while ge_pow(e + 1) {
        e += 1;
    }
    // Truncate to `len` digits: floor(|v| * 10^(len-1-e)).
    let shift = len as i64 - 1 - e;
    let scaled = if shift >= 0 {
        Rational::from(&q * &pow10(shift as u64))
    } else {
        Rational::from(&q / &pow10((-shift) as u64))
    };
    let int = scaled.floor();
    let mut s = int.into_numer_denom().0.to_string();
    // A carry out of the estimate cannot happen (floor of a value < 10^len),
    // but pad pathological short results defensively.
    while s.len() < len {
        s.push('0');
    }
    (neg, e, s)
}

/// Round a positive float to `len` significant digits, half away from zero.
/// Returns `(exp10, digits)`; a carry (e.g. 9.99 -> 10.0) bumps `exp10`.
pub fn rounded_digits(v: &Float, len: usize) -> (bool, i64, String) {
    assert!(len > 0);
    let (neg, e, _) = leading_digits(v, 1);
    let dec = round_float_at(v, len as i64 - 1 - e);
    let mut s = Integer::from(dec.digits.abs_ref()).to_string();
    let mut e = e;
    if s.len() > len {
        // carry: 999.9 -> 1000 at len 3
        debug_assert!(s.len() == len + 1 && s.ends_with('0'));
        s.truncate(len);
        e += 1;
    }
    while s.len() < len {
        s.push('0');
    }
    (neg, e, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Float {
        Float::with_val(256, Float::parse(s).unwrap())
    }

    #[test]
    fn round_float_at_basic() {
        let d = round_float_at(&f("3.14159"), 3);
        assert_eq!(d.to_string(), "3.142");
        let d = round_float_at(&f("-3.14159"), 3);
        assert_eq!(d.to_string(), "-3.142");
        // ties away from zero
        let d = round_float_at(&f("2.5"), 0);
        assert_eq!(d.to_string(), "3");
        let d = round_float_at(&f("-2.5"), 0);
        assert_eq!(d.to_string(), "-3");
    }

    #[test]
    fn round_at_negative_scale() {
        let d = round_float_at(&f("12345.6"), -2);
        assert_eq!(d.to_string(), "12300");
    }

    #[test]
    fn floor_neg_log10_exact_powers() {
        assert_eq!(floor_neg_log10(&f("1e-3")), 3);
        assert_eq!(floor_neg_log10(&f("6.513e-20")), 19);
        assert_eq!(floor_neg_log10(&f("0.5")), 0);
        assert_eq!(floor_neg_log10(&f("10")), -1);
    }

    #[test]
    fn decimal_string_round_trip() {
        for s in ["0.125", "-602056.74275297175655031271186", "5.000", "42"] {
            let d: Decimal = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
    }

    #[test]
    fn leading_digits_truncates() {
        let (neg, e, s) = leading_digits(&f("1.999"), 3);
        assert!(!neg);
        assert_eq!((e, s.as_str()), (0, "199"));
        let (_, e, s) = leading_digits(&f("0.0123"), 2);
        assert_eq!((e, s.as_str()), (-2, "12"));
    }

    #[test]
    fn rounded_digits_carries() {
        let (_, e, s) = rounded_digits(&f("9.997"), 3);
        assert_eq!((e, s.as_str()), (1, "100"));
        let (_, e, s) = rounded_digits(&f("9.649273600428684463479553"), 22);
        assert_eq!((e, s.as_str()), (0, "9649273600428684463480"));
    }

    #[test]
    fn reround_detects_ties() {
        let d: Decimal = "1.2500".parse().unwrap();
        assert!(d.round_at(1).is_none());
        let d: Decimal = "1.2501".parse().unwrap();
        assert_eq!(d.round_at(1).unwrap().to_string(), "1.3");
    }
}
