//! Scientific-notation values whose exponents do not fit machine words.

use std::fmt;
use std::str::FromStr;

use rug::{Float, Integer};

use super::decimal::{leading_digits, rounded_digits, Decimal};
use super::{decimal_bits, floor_neg_log10, SigValue};
use crate::error::{Error, Result};

/// What to do when mantissa extraction runs out of certified digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GetMeBehavior {
    /// Signal `InsufficientPrecision` (the certification-friendly default).
    #[default]
    Signal,
    /// Return mantissa 1 with zero certified digits, as the original
    /// routine this mirrors did.
    CompatMantissaOne,
}

/// `mantissa * 10^exponent` with `1 <= mantissa < 10` and an arbitrary-size
/// decimal exponent. `certified_digits` counts the leading mantissa digits
/// guaranteed correct, rounded in the last place.
#[derive(Clone, Debug)]
pub struct SciNumber {
    mantissa: Float,
    exponent: Integer,
    certified_digits: u32,
}

impl SciNumber {
    pub fn new(mantissa: Float, exponent: Integer, certified_digits: u32) -> Self {
        let mut n = SciNumber {
            mantissa,
            exponent,
            certified_digits,
        };
        n.normalize();
        n
    }

    fn normalize(&mut self) {
        if self.mantissa.cmp0() == Some(std::cmp::Ordering::Equal) {
            return;
        }
        while self.mantissa >= 10u32 {
            self.mantissa /= 10u32;
            self.exponent += 1;
        }
        while self.mantissa < 1u32 {
            self.mantissa *= 10u32;
            self.exponent -= 1;
        }
    }

    pub fn mantissa(&self) -> &Float {
        &self.mantissa
    }

    pub fn exponent(&self) -> &Integer {
        &self.exponent
    }

    pub fn certified_digits(&self) -> u32 {
        self.certified_digits
    }

    /// Greatest number of digits the mantissa's binary precision can honestly
    /// display.
    pub fn capacity(&self) -> u32 {
        ((self.mantissa.prec() as f64) * 0.301_029_995_663_981_2) as u32 - 1
    }

    /// Mantissa rounded half away from zero to `digits` significant digits,
    /// with the exponent adjusted if rounding carries past 10.
    pub fn rounded(&self, digits: u32) -> (String, Integer) {
        let digits = digits.max(1) as usize;
        let (neg, e10, ds) = rounded_digits(&self.mantissa, digits);
        debug_assert!(!neg, "mantissas are positive");
        let mut exponent = self.exponent.clone();
        exponent += e10; // e10 is 1 when rounding carried (9.99 -> 10.0)
        let s = if ds.len() == 1 {
            ds
        } else {
            format!("{}.{}", &ds[..1], &ds[1..])
        };
        (s, exponent)
    }

    /// `<mantissa>e<exponent>` with the mantissa shown to `digits` digits.
    pub fn to_string_with_digits(&self, digits: u32) -> String {
        let (m, e) = self.rounded(digits);
        format!("{m}e{e}")
    }
}

impl fmt::Display for SciNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = self.certified_digits.clamp(1, self.capacity());
        write!(f, "{}", self.to_string_with_digits(digits))
    }
}

impl FromStr for SciNumber {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (mant_str, exp_str) = s
            .split_once(['e', 'E'])
            .ok_or_else(|| Error::Parse(format!("missing exponent in {s:?}")))?;
        let dec: Decimal = mant_str.parse()?;
        let digit_count = dec.digits.to_string().trim_start_matches('-').len() as u32;
        let prec = decimal_bits(digit_count + 4);
        let exponent: Integer = exp_str
            .parse()
            .map_err(|_| Error::Parse(format!("invalid exponent in {s:?}")))?;
        Ok(SciNumber::new(dec.to_float(prec), exponent, digit_count))
    }
}

/// Extract mantissa and exponent from a certified base-10 logarithm:
/// `p = floor(z)`, `mantissa = 10^(z - p)`.
///
/// The subtraction costs precision: if the exponent has `d` digits, the
/// mantissa carries about `d` fewer significant digits than `z` did. The
/// certified digit count is therefore the number of *fractional* digits of
/// `z` justified by its error bound.
pub fn mantissa_exponent(
    log10value: &SigValue,
    prec: u32,
    behavior: GetMeBehavior,
) -> Result<SciNumber> {
    let z = log10value.value();
    if !z.is_finite() {
        return Err(Error::Precondition("non-finite log10 input".into()));
    }
    // floor must be exact: the float has to resolve the integer part.
    if let Some(e) = z.get_exp() {
        if e > z.prec() as i32 {
            return Err(Error::InsufficientPrecision);
        }
    }
    let floor = Float::with_val(z.prec(), z.floor_ref());
    let exponent = floor
        .to_integer()
        .ok_or(Error::InsufficientPrecision)?;
    let insufficient = !log10value.is_exact()
        && *log10value.abs_error() > Float::with_val(32, 1e-2);
    if insufficient {
        return match behavior {
            GetMeBehavior::Signal => Err(Error::InsufficientPrecision),
            GetMeBehavior::CompatMantissaOne => Ok(SciNumber {
                mantissa: Float::with_val(prec, 1),
                exponent,
                certified_digits: 0,
            }),
        };
    }
    let frac = Float::with_val(z.prec(), z - &floor);
    let mantissa = Float::with_val(prec, frac.exp10_ref());
    let capacity = ((prec as f64) * 0.301_029_995_663_981_2) as i64 - 1;
    let certified = if log10value.is_exact() {
        capacity.max(1) as u32
    } else {
        floor_neg_log10(log10value.abs_error())
            .clamp(0, capacity.max(1)) as u32
    };
    Ok(SciNumber::new(mantissa, exponent, certified))
}

/// A positive exact rational as a [`SciNumber`] shown to `display_digits`
/// digits. The mantissa is correctly rounded once from the exact value.
pub fn rational_to_sci(q: &rug::Rational, display_digits: u32) -> SciNumber {
    assert!(q.cmp0() == std::cmp::Ordering::Greater);
    let (p, d) = (q.numer(), q.denom());
    let mut e10 = p.to_string().len() as i64 - d.to_string().len() as i64;
    let ten = rug::Rational::from(10);
    // adjust the estimate so q / 10^e10 lands in [1, 10)
    let scaled = |e: i64| -> rug::Rational {
        let pow = super::decimal::pow10(e.unsigned_abs());
        if e >= 0 {
            rug::Rational::from(q / &pow)
        } else {
            rug::Rational::from(q * &pow)
        }
    };
    let mut mant_q = scaled(e10);
    while mant_q < 1u32 {
        e10 -= 1;
        mant_q *= &ten;
    }
    while mant_q >= ten {
        e10 += 1;
        mant_q /= &ten;
    }
    let prec = decimal_bits(display_digits + 6);
    SciNumber::new(
        Float::with_val(prec, &mant_q),
        Integer::from(e10),
        display_digits,
    )
}

/// Number of leading significant decimal digits shared by `a` and `b`.
///
/// Digit strings are compared position by position (truncated, not rounded),
/// which reproduces how bracket agreement is counted: 1.9 and 2.1 share no
/// digits even though both round to 2.
pub fn digits_in_agreement(a: &Float, b: &Float) -> u32 {
    if a.cmp0() != b.cmp0()
        || a.cmp0() == Some(std::cmp::Ordering::Equal)
        || a.cmp0().is_none()
        || b.cmp0().is_none()
    {
        return 0;
    }
    let cap = |v: &Float| ((v.prec() as f64) * 0.301_029_995_663_981_2) as usize - 1;
    let len = cap(a).min(cap(b)).max(1);
    let (sa, ea, da) = leading_digits(a, len);
    let (sb, eb, db) = leading_digits(b, len);
    if sa != sb || ea != eb {
        return 0;
    }
    da.bytes()
        .zip(db.bytes())
        .take_while(|(x, y)| x == y)
        .count() as u32
}
