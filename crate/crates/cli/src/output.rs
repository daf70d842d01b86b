//! Row model and the three emitters. Exponents and threshold indices are
//! serialized as decimal strings: they overflow both i64 and f64.

use serde::Serialize;
use tinysinc_core::mpnum::{floor_neg_log10, round_float_at, SigValue};
use tinysinc_core::rug::Float;
use tinysinc_core::tiny_eval::TinyResult;

use crate::config::OutputFormat;

#[derive(Clone, Debug, Serialize)]
pub struct OutputRow {
    pub a0: u32,
    pub n: String,
    pub sum_excess: String,
    pub sum_error_bound: String,
    pub t_mantissa: String,
    pub t_exponent: String,
    pub certified_digits: u32,
    pub method: String,
}

/// Scientific rendering of a positive certified value, keeping exactly the
/// digits its error bound justifies.
pub fn sig_to_sci_string(sig: &SigValue) -> String {
    if sig.is_exact() {
        let (_, e10, digits) = tinysinc_core::mpnum::rounded_digits(sig.value(), 40);
        return format!("{}.{}e{}", &digits[..1], &digits[1..], e10);
    }
    if !sig.certified_positive() {
        return String::new();
    }
    let d = floor_neg_log10(sig.abs_error());
    let dec = round_float_at(sig.value(), d);
    decimal_to_sci(&dec)
}

/// `3-significant-digit` rendering for error-bound columns.
pub fn bound_to_string(bound: &Float) -> String {
    if bound.cmp0() != Some(std::cmp::Ordering::Greater) {
        return "0".to_string();
    }
    let (_, e10, digits) = tinysinc_core::mpnum::rounded_digits(bound, 3);
    format!("{}.{}e{}", &digits[..1], &digits[1..], e10)
}

fn decimal_to_sci(dec: &tinysinc_core::mpnum::Decimal) -> String {
    let digits = dec.digits.to_string();
    let (sign, digits) = match digits.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", digits.as_str()),
    };
    let e10 = digits.len() as i64 - 1 - dec.scale;
    let mantissa = if digits.len() == 1 {
        digits.to_string()
    } else {
        format!("{}.{}", &digits[..1], &digits[1..])
    };
    format!("{sign}{mantissa}e{e10}")
}

pub fn row_from_tiny(result: &TinyResult) -> OutputRow {
    let digits = result
        .certified_digits
        .clamp(1, result.t.capacity());
    let (mantissa, exponent) = result.t.rounded(digits);
    OutputRow {
        a0: result.a0,
        n: result.n0.to_string(),
        sum_excess: result
            .sum_excess
            .as_ref()
            .map(sig_to_sci_string)
            .unwrap_or_default(),
        sum_error_bound: result
            .remainder_magnitude
            .as_ref()
            .map(bound_to_string)
            .unwrap_or_default(),
        t_mantissa: mantissa,
        t_exponent: exponent.to_string(),
        certified_digits: digits,
        method: result.method.as_str().to_string(),
    }
}

/// What a subcommand chooses to show in `table` format.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableShape {
    Threshold,
    Sums,
    Tiny,
}

pub fn render(rows: &[OutputRow], format: OutputFormat, shape: TableShape) -> String {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut out = String::from(
                "a0,n,sum_excess,sum_error_bound,t_mantissa,t_exponent,certified_digits,method\n",
            );
            for r in rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.a0,
                    r.n,
                    r.sum_excess,
                    r.sum_error_bound,
                    r.t_mantissa,
                    r.t_exponent,
                    r.certified_digits,
                    r.method
                ));
            }
            out
        }
        OutputFormat::Table => {
            let mut out = String::new();
            for r in rows {
                let line = match shape {
                    TableShape::Threshold => format!("a0 = {}, n = {}", r.a0, r.n),
                    TableShape::Sums => format!(
                        "a0 = {}, sum = {} + {}, bound = {}",
                        r.a0, r.a0, r.sum_excess, r.sum_error_bound
                    ),
                    TableShape::Tiny => format!(
                        "a0 = {}, n = {}, t = {} * 10^{}",
                        r.a0, r.n, r.t_mantissa, r.t_exponent
                    ),
                };
                out.push_str(&line);
                out.push('\n');
            }
            out
        }
    }
}
