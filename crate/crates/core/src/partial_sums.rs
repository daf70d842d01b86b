//! The expensive initial blocks `s(m-1) = sum_{k<m} 1/(2k-1)` and
//! `sum_{k<m} ln k`, computed once to a requested number of decimals and
//! cached on disk as human-auditable text files.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rug::{Assign, Float, Integer, Rational};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mpnum::{
    decimal_bits, float_to_rational, pow10, pow10_error, round_rational_at, ulp, Decimal,
    SigValue,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SumKind {
    OddHarmonic,
    LogSum,
}

impl SumKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SumKind::OddHarmonic => "oddHarmonic",
            SumKind::LogSum => "logSum",
        }
    }
}

impl fmt::Display for SumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SumKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oddHarmonic" => Ok(SumKind::OddHarmonic),
            "logSum" => Ok(SumKind::LogSum),
            other => Err(Error::Parse(format!("unknown sum kind {other:?}"))),
        }
    }
}

/// An initial block `sum over k = 1 .. m-1`, rounded at `n_decimals + 1`
/// fractional digits so its absolute error stays within
/// `0.5 * 10^-(n_decimals+1)`.
#[derive(Clone, Debug)]
pub struct InitialSum {
    pub kind: SumKind,
    pub m: u64,
    pub n_decimals: u32,
    /// Exact decimal stored on disk and shown to users.
    pub decimal: Decimal,
    /// Binary mirror of `decimal` with the certified error bound.
    pub value: SigValue,
}

impl InitialSum {
    fn from_decimal(kind: SumKind, m: u64, n_decimals: u32, decimal: Decimal) -> InitialSum {
        let prec = decimal_bits(n_decimals + 12);
        let float = decimal.to_float(prec);
        let err = pow10_error(n_decimals as i64 + 1);
        let err = err + ulp(&float) * 2u32;
        InitialSum {
            kind,
            m,
            n_decimals,
            value: SigValue::new(float, err),
            decimal,
        }
    }

    /// The value rounded to `digits` fractional decimal digits, as printed.
    pub fn display_decimals(&self, digits: u32) -> String {
        match self.decimal.round_at(digits as i64) {
            Some(d) => d.to_string(),
            None => self.decimal.to_string(),
        }
    }
}

/// Exact rational `sum_{k=1}^{m-1} 1/(2k-1)` by balanced splitting.
pub fn exact_odd_harmonic_sum(m: u64) -> Rational {
    fn split(lo: u64, hi: u64) -> Rational {
        if hi - lo <= 32 {
            let mut acc = Rational::new();
            for k in lo..hi {
                acc += Rational::from((1u32, Integer::from(2 * k - 1)));
            }
            acc
        } else {
            let mid = lo + (hi - lo) / 2;
            split(lo, mid) + split(mid, hi)
        }
    }
    assert!(m >= 2);
    split(1, m)
}

/// Exact rational harmonic number `H_n`.
fn harmonic_number(n: u64) -> Rational {
    fn split(lo: u64, hi: u64) -> Rational {
        if hi - lo <= 32 {
            let mut acc = Rational::new();
            for k in lo..hi {
                acc += Rational::from((1u32, Integer::from(k)));
            }
            acc
        } else {
            let mid = lo + (hi - lo) / 2;
            split(lo, mid) + split(mid, hi)
        }
    }
    if n == 0 {
        Rational::new()
    } else {
        split(1, n + 1)
    }
}

/// The odd-harmonic sum through the harmonic-number identity
/// `H_{2n-1} - H_{n-1}/2`; a cross-check route independent of the direct
/// term-by-term sum.
pub fn odd_harmonic_via_harmonic_numbers(n: u64) -> Rational {
    assert!(n >= 1);
    let h_odd = harmonic_number(2 * n - 1);
    let h_half = harmonic_number(n - 1) / Rational::from(2);
    h_odd - h_half
}

/// `s(m-1)` rounded at `n_decimals + 1` fractional digits. The summation is
/// exact rational arithmetic, so the only error is that single rounding.
pub fn initial_odd_harmonic_sum(m: u64, n_decimals: u32) -> InitialSum {
    assert!(m >= 2);
    let exact = exact_odd_harmonic_sum(m);
    let decimal = round_rational_at(&exact, n_decimals as i64 + 1);
    InitialSum::from_decimal(SumKind::OddHarmonic, m, n_decimals, decimal)
}

/// `sum_{k=1}^{m-1} ln k` rounded at `n_decimals + 1` fractional digits.
///
/// The float summation carries enough guard digits that the rounded decimal
/// provably equals the rounding of the exact sum (the distance to the nearest
/// rounding boundary is checked; on a near-tie the precision is raised).
pub fn initial_log_sum(m: u64, n_decimals: u32) -> InitialSum {
    assert!(m >= 2);
    // ~7 integer digits for m around 10^5..10^6, plus 15 guard decimals as
    // the summation allowance.
    let mut prec = decimal_bits(n_decimals + 30);
    loop {
        let (acc, err) = log_sum_at(m, prec);
        let scale = n_decimals as i64 + 1;
        if rounding_is_stable(&acc, &err, scale) {
            let decimal = round_rational_at(&float_to_rational(&acc), scale);
            return InitialSum::from_decimal(SumKind::LogSum, m, n_decimals, decimal);
        }
        prec += 64;
    }
}

fn log_sum_at(m: u64, prec: u32) -> (Float, Float) {
    let mut acc = Float::new(prec);
    let mut k_float = Float::new(prec);
    for k in 2..m {
        k_float.assign(k);
        acc += Float::with_val(prec, k_float.ln_ref());
    }
    // one ln rounding plus one add rounding per term
    let err = ulp(&acc) * 2u32 * Float::with_val(32, m as f64);
    (acc, err)
}

/// True when every value within `value +- err` rounds to the same decimal at
/// `scale` fractional digits (the scaled value stays clear of any rounding
/// boundary).
fn rounding_is_stable(value: &Float, err: &Float, scale: i64) -> bool {
    let q = float_to_rational(value);
    let (scaled, err_scaled) = {
        let err_q = float_to_rational(err);
        if scale >= 0 {
            let p = pow10(scale as u64);
            (Rational::from(&q * &p), err_q * &p)
        } else {
            let p = pow10((-scale) as u64);
            (Rational::from(&q / &p), err_q / &p)
        }
    };
    // distance of 2*scaled to the nearest integer bounds the distance of
    // scaled to the nearest half-integer rounding boundary
    let twice = Rational::from(&scaled * &Rational::from(2));
    let frac = Rational::from(&twice - &twice.clone().floor());
    let half = Rational::from((1u32, 2u32));
    let dist = if frac <= half {
        frac
    } else {
        Rational::from(1) - frac
    };
    dist > err_scaled * Rational::from(4)
}

/// How a cache request was satisfied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheOutcome {
    Hit,
    /// Served by re-rounding a higher-precision cached entry.
    HitDowngraded,
    ComputedFresh,
    /// A cache file failed its checksum and was recomputed and overwritten.
    RecomputedCorrupt,
}

fn cache_file_name(kind: SumKind, m: u64, n_decimals: u32) -> String {
    format!("{}-m{}-d{}.sum", kind.as_str(), m, n_decimals)
}

fn checksum(lines: &[&str]) -> String {
    let mut hasher = Sha256::new();
    for line in lines {
        hasher.update(line.as_bytes());
        hasher.update(b"\n");
    }
    format!("{:x}", hasher.finalize())
}

fn render_cache_file(sum: &InitialSum) -> String {
    let line1 = "tinysinc-cache v1".to_string();
    let line2 = format!(
        "kind={} m={} nDecimals={}",
        sum.kind.as_str(),
        sum.m,
        sum.n_decimals
    );
    let line3 = sum.decimal.to_string();
    let line4 = format!("sha256={}", checksum(&[&line1, &line2, &line3]));
    format!("{line1}\n{line2}\n{line3}\n{line4}\n")
}

fn parse_cache_file(content: &str, path: &Path) -> Result<InitialSum> {
    let corrupt = |message: &str| Error::Cache {
        path: path.to_path_buf(),
        message: message.to_string(),
    };
    let lines: Vec<&str> = content.lines().collect();
    if lines.len() != 4 {
        return Err(corrupt("expected 4 lines"));
    }
    if lines[0] != "tinysinc-cache v1" {
        return Err(corrupt("bad magic line"));
    }
    let expected = format!("sha256={}", checksum(&lines[0..3]));
    if lines[3] != expected {
        return Err(corrupt("checksum mismatch"));
    }
    let mut kind = None;
    let mut m = None;
    let mut n_decimals = None;
    for field in lines[1].split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| corrupt("malformed key=value field"))?;
        match key {
            "kind" => kind = Some(SumKind::from_str(value)?),
            "m" => m = value.parse::<u64>().ok(),
            "nDecimals" => n_decimals = value.parse::<u32>().ok(),
            _ => return Err(corrupt("unknown field")),
        }
    }
    let (kind, m, n_decimals) = match (kind, m, n_decimals) {
        (Some(k), Some(m), Some(d)) => (k, m, d),
        _ => return Err(corrupt("missing header field")),
    };
    let decimal: Decimal = lines[2].parse()?;
    if decimal.scale != n_decimals as i64 + 1 {
        return Err(corrupt("value scale does not match nDecimals"));
    }
    Ok(InitialSum::from_decimal(kind, m, n_decimals, decimal))
}

fn atomic_write(path: &Path, content: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = dir.join(format!(
        ".tmp-{}-{}",
        std::process::id(),
        path.file_name().unwrap_or_default().to_string_lossy()
    ));
    fs::write(&tmp, content)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn compute(kind: SumKind, m: u64, n_decimals: u32) -> InitialSum {
    match kind {
        SumKind::OddHarmonic => initial_odd_harmonic_sum(m, n_decimals),
        SumKind::LogSum => initial_log_sum(m, n_decimals),
    }
}

/// Return the cached sum when a file for `(kind, m, n_decimals' >= n_decimals)`
/// exists; otherwise compute, store, and return. Corrupt cache files are
/// recomputed and overwritten.
pub fn cache_lookup_or_compute(
    kind: SumKind,
    m: u64,
    n_decimals: u32,
    cache_dir: &Path,
) -> Result<(InitialSum, CacheOutcome)> {
    fs::create_dir_all(cache_dir).map_err(|e| Error::Cache {
        path: cache_dir.to_path_buf(),
        message: format!("cannot create cache directory: {e}"),
    })?;
    let exact_path = cache_dir.join(cache_file_name(kind, m, n_decimals));
    let mut corrupt_seen = false;

    if exact_path.exists() {
        match fs::read_to_string(&exact_path)
            .map_err(Error::from)
            .and_then(|c| parse_cache_file(&c, &exact_path))
        {
            Ok(sum) if sum.kind == kind && sum.m == m && sum.n_decimals == n_decimals => {
                return Ok((sum, CacheOutcome::Hit));
            }
            _ => corrupt_seen = true,
        }
    }

    if !corrupt_seen {
        // any higher-precision entry for the same (kind, m) can serve
        if let Some(candidate) = best_downgrade_candidate(kind, m, n_decimals, cache_dir) {
            if let Ok(content) = fs::read_to_string(&candidate) {
                if let Ok(parsed) = parse_cache_file(&content, &candidate) {
                    if let Some(rerounded) = parsed.decimal.round_at(n_decimals as i64 + 1) {
                        let sum = InitialSum::from_decimal(kind, m, n_decimals, rerounded);
                        return Ok((sum, CacheOutcome::HitDowngraded));
                    }
                    // exact rounding tie: fall through and recompute
                }
            }
        }
    }

    let sum = compute(kind, m, n_decimals);
    atomic_write(&exact_path, &render_cache_file(&sum)).map_err(|e| Error::Cache {
        path: exact_path.clone(),
        message: format!("write failed: {e}"),
    })?;
    let outcome = if corrupt_seen {
        CacheOutcome::RecomputedCorrupt
    } else {
        CacheOutcome::ComputedFresh
    };
    Ok((sum, outcome))
}

fn best_downgrade_candidate(
    kind: SumKind,
    m: u64,
    n_decimals: u32,
    cache_dir: &Path,
) -> Option<PathBuf> {
    let prefix = format!("{}-m{}-d", kind.as_str(), m);
    let mut best: Option<(u32, PathBuf)> = None;
    for entry in fs::read_dir(cache_dir).ok()? {
        let entry = entry.ok()?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if let Some(rest) = name.strip_prefix(&prefix) {
            if let Some(d_str) = rest.strip_suffix(".sum") {
                if let Ok(d) = d_str.parse::<u32>() {
                    if d > n_decimals && best.as_ref().map(|(b, _)| d < *b).unwrap_or(true) {
                        best = Some((d, entry.path()));
                    }
                }
            }
        }
    }
    best.map(|(_, p)| p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_odd_harmonic_sums() {
        // m = 2: the single term 1/1
        assert_eq!(exact_odd_harmonic_sum(2), Rational::from(1));
        let s = initial_odd_harmonic_sum(2, 10);
        assert_eq!(s.display_decimals(10), "1.0000000000");
        // m = 4: 1 + 1/3 + 1/5 = 23/15
        assert_eq!(exact_odd_harmonic_sum(4), Rational::from((23, 15)));
    }

    #[test]
    fn harmonic_identity_examples() {
        assert_eq!(
            odd_harmonic_via_harmonic_numbers(8),
            Rational::from((91072, 45045))
        );
        assert_eq!(
            odd_harmonic_via_harmonic_numbers(7),
            Rational::from((88069, 45045))
        );
        assert_eq!(odd_harmonic_via_harmonic_numbers(1), Rational::from(1));
    }

    #[test]
    fn identity_matches_direct_sum() {
        for n in [1u64, 2, 3, 10, 97, 500, 1000] {
            assert_eq!(
                odd_harmonic_via_harmonic_numbers(n),
                exact_odd_harmonic_sum(n + 1),
                "n = {n}"
            );
        }
    }

    #[test]
    fn sums_strictly_increase_in_m() {
        let mut prev = exact_odd_harmonic_sum(2);
        for m in 3..40u64 {
            let s = exact_odd_harmonic_sum(m);
            assert!(s > prev);
            prev = s;
        }
    }

    #[test]
    fn log_sum_small_cases() {
        // m = 2: empty product, ln 1 = 0
        let s = initial_log_sum(2, 10);
        assert_eq!(s.decimal.to_rational(), Rational::new());
        // m = 3: ln 2, printed at 20 decimals
        let s = initial_log_sum(3, 20);
        assert_eq!(s.display_decimals(20), "0.69314718055994530942");
    }

    #[test]
    fn log_sum_matches_doubled_precision_run() {
        // independent oracle: the same sum at doubled precision
        let a = initial_log_sum(2000, 30);
        let b = initial_log_sum(2000, 60);
        let want = b.decimal.round_at(31).unwrap();
        assert_eq!(a.decimal, want);
    }

    #[test]
    fn initial_sum_error_invariant() {
        // |decimal - exact| <= 0.5 * 10^-(nDecimals+1), checked exactly
        let m = 1001;
        for nd in [10u32, 25, 40] {
            let s = initial_odd_harmonic_sum(m, nd);
            let exact = exact_odd_harmonic_sum(m);
            let diff = (s.decimal.to_rational() - exact).abs();
            let bound = Rational::from((1u32, 2u32)) / Rational::from(pow10(nd as u64 + 1));
            assert!(diff <= bound, "nd = {nd}");
        }
    }

    #[test]
    fn cache_round_trip_and_corruption() {
        let dir = std::env::temp_dir().join(format!("tinysinc-test-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);

        let (a, outcome) = cache_lookup_or_compute(SumKind::OddHarmonic, 101, 30, &dir).unwrap();
        assert_eq!(outcome, CacheOutcome::ComputedFresh);
        let (b, outcome) = cache_lookup_or_compute(SumKind::OddHarmonic, 101, 30, &dir).unwrap();
        assert_eq!(outcome, CacheOutcome::Hit);
        assert_eq!(a.decimal, b.decimal);

        // downgrade: request fewer decimals, get the re-rounded value
        let (c, outcome) = cache_lookup_or_compute(SumKind::OddHarmonic, 101, 12, &dir).unwrap();
        assert_eq!(outcome, CacheOutcome::HitDowngraded);
        let direct = initial_odd_harmonic_sum(101, 12);
        assert_eq!(c.decimal, direct.decimal);

        // corruption is detected and repaired
        let path = dir.join(cache_file_name(SumKind::OddHarmonic, 101, 30));
        let mangled = fs::read_to_string(&path).unwrap().replace('7', "8");
        fs::write(&path, mangled).unwrap();
        let (d, outcome) = cache_lookup_or_compute(SumKind::OddHarmonic, 101, 30, &dir).unwrap();
        assert_eq!(outcome, CacheOutcome::RecomputedCorrupt);
        assert_eq!(d.decimal, a.decimal);
        // the repaired file verifies again
        let (_, outcome) = cache_lookup_or_compute(SumKind::OddHarmonic, 101, 30, &dir).unwrap();
        assert_eq!(outcome, CacheOutcome::Hit);

        let _ = fs::remove_dir_all(&dir);
    }
}
