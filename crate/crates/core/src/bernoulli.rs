//! Exact Bernoulli numbers, Bernoulli polynomials, and certified quadratures
//! of the Bernoulli-polynomial kernels that appear in every remainder bound.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::mpnum::{ulp, PrecisionContext, SigValue};
use crate::quadrature;

/// Largest polynomial index kept in the cache; supports `mu` up to 64 for
/// both remainder kernels (degree `2 mu + 1`).
pub const MAX_INDEX: usize = 130;

struct BernoulliCache {
    numbers: Vec<Rational>,
    /// `polys[k][i]` is the coefficient of `x^i` in `B_k(x)`.
    polys: Vec<Vec<Rational>>,
}

fn cache() -> &'static BernoulliCache {
    static CACHE: OnceLock<BernoulliCache> = OnceLock::new();
    CACHE.get_or_init(|| {
        // B_k from the defining recurrence, with B_1 = -1/2.
        let mut numbers: Vec<Rational> = Vec::with_capacity(MAX_INDEX + 1);
        numbers.push(Rational::from(1));
        for k in 1..=MAX_INDEX {
            // sum_{j=0}^{k-1} C(k+1, j) B_j = -C(k+1, k) B_k
            let mut acc = Rational::new();
            let mut binom = Integer::from(1); // C(k+1, 0)
            for (j, b) in numbers.iter().enumerate().take(k) {
                acc += Rational::from(b * &binom);
                // C(k+1, j+1) = C(k+1, j) * (k+1-j) / (j+1)
                binom *= (k + 1 - j) as u32;
                binom /= (j + 1) as u32;
            }
            acc /= -((k as i64) + 1);
            numbers.push(acc);
        }
        // B_k(x) = sum_i C(k, i) B_{k-i} x^i
        let mut polys = Vec::with_capacity(MAX_INDEX + 1);
        for k in 0..=MAX_INDEX {
            let mut coeffs = Vec::with_capacity(k + 1);
            let mut binom = Integer::from(1); // C(k, 0)
            for i in 0..=k {
                coeffs.push(Rational::from(&numbers[k - i] * &binom));
                if i < k {
                    binom *= (k - i) as u32;
                    binom /= (i + 1) as u32;
                }
            }
            polys.push(coeffs);
        }
        BernoulliCache { numbers, polys }
    })
}

/// The k-th Bernoulli number as an exact rational (B_1 = -1/2 convention).
pub fn bernoulli_number(k: usize) -> Rational {
    assert!(k <= MAX_INDEX, "Bernoulli index {k} beyond cache");
    cache().numbers[k].clone()
}

/// Exact rational coefficients of B_k(x), ascending powers.
pub fn bernoulli_polynomial_coefficients(k: usize) -> &'static [Rational] {
    assert!(k <= MAX_INDEX, "Bernoulli index {k} beyond cache");
    &cache().polys[k]
}

/// B_k(x) at working precision, evaluated by Horner from exact coefficients.
pub fn bernoulli_polynomial(k: usize, x: &Float, prec: u32) -> Float {
    let coeffs = bernoulli_polynomial_coefficients(k);
    let mut acc = Float::with_val(prec, &coeffs[k]);
    for c in coeffs.iter().rev().skip(1) {
        acc *= x;
        acc += Float::with_val(prec, c);
    }
    acc
}

/// Exact evaluation of B_k(x) at a rational point.
pub fn bernoulli_polynomial_rational(k: usize, x: &Rational) -> Rational {
    let coeffs = bernoulli_polynomial_coefficients(k);
    let mut acc = coeffs[k].clone();
    for c in coeffs.iter().rev().skip(1) {
        acc *= x;
        acc += c;
    }
    acc
}

/// Which weight multiplies the Bernoulli kernel under the integral sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// `1 / [2(m+x) - 1]^(2 mu + 2)` — odd-harmonic tail remainders.
    OddHarmonic,
    /// `1 / (m+x)^(2 mu + 1)` — log-factorial remainders.
    Logarithm,
}

const REFINEMENTS: [usize; 5] = [8, 16, 32, 64, 128];

/// Certified value of `int_0^1 B_{2mu+1}(x) g(x) dx` for the selected kernel.
///
/// The integral is split at `x = 1/2` (a zero of the odd Bernoulli
/// polynomial) and each half is integrated by Gauss-Legendre with node-count
/// doubling until two successive estimates agree to the context's working
/// digits. The certified error is the last inter-estimate gap with a safety
/// factor of ten, plus rounding slack.
pub fn kernel_integral(
    mu: u32,
    m: &Integer,
    kind: KernelKind,
    ctx: &PrecisionContext,
) -> Result<SigValue> {
    assert!(mu >= 1 && m.cmp0() == std::cmp::Ordering::Greater);
    type Key = (u32, Integer, KernelKind, u32);
    static CACHE: OnceLock<Mutex<HashMap<Key, (Float, Float)>>> = OnceLock::new();
    let memo = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (mu, m.clone(), kind, ctx.working_digits());
    if let Some((v, e)) = memo.lock().unwrap().get(&key) {
        return Ok(SigValue::new(v.clone(), e.clone()));
    }

    let prec = ctx.bits() + 32;
    let degree = (2 * mu + 1) as usize;
    let coeffs: Vec<Float> = bernoulli_polynomial_coefficients(degree)
        .iter()
        .map(|c| Float::with_val(prec, c))
        .collect();
    let poly = |x: &Float| {
        let mut acc = coeffs[degree].clone();
        for c in coeffs.iter().rev().skip(1) {
            acc *= x;
            acc += c;
        }
        acc
    };
    let two_m_minus_1 = {
        let mut t = Integer::from(m * 2u32);
        t -= 1u32;
        Float::with_val(prec, t)
    };
    let m_float = Float::with_val(prec, m);
    let weight = |x: &Float| -> Float {
        match kind {
            KernelKind::OddHarmonic => {
                let mut base = Float::with_val(prec, x * 2u32);
                base += &two_m_minus_1;
                Float::with_val(prec, (&base).pow(-(2 * mu as i32 + 2)))
            }
            KernelKind::Logarithm => {
                let mut base = Float::with_val(prec, x);
                base += &m_float;
                Float::with_val(prec, (&base).pow(-(2 * mu as i32 + 1)))
            }
        }
    };
    let integrand = |x: &Float| Float::with_val(prec, poly(x) * weight(x));

    let zero = Float::with_val(prec, 0);
    let half = Float::with_val(prec, 0.5);
    let one = Float::with_val(prec, 1);
    let tol = crate::mpnum::pow10_float(-(ctx.working_digits() as i64), 32);

    let mut prev: Option<Float> = None;
    for nodes in REFINEMENTS {
        let mut est = quadrature::integrate(&integrand, &zero, &half, nodes, prec);
        est += quadrature::integrate(&integrand, &half, &one, nodes, prec);
        if let Some(p) = prev {
            let gap = Float::with_val(32, &est - &p).abs();
            let est_abs = Float::with_val(32, est.abs_ref());
            let goal = est_abs * &tol;
            if gap <= goal {
                let mut err = gap * 10u32;
                err += ulp(&est) * (4 * nodes as u32 + 16);
                memo.lock()
                    .unwrap()
                    .insert(key, (est.clone(), err.clone()));
                return Ok(SigValue::new(est, err));
            }
        }
        prev = Some(est);
    }
    Err(Error::QuadratureDidNotConverge {
        refinements: REFINEMENTS.len() as u32,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    #[test]
    fn small_bernoulli_numbers() {
        assert_eq!(bernoulli_number(0), Rational::from(1));
        assert_eq!(bernoulli_number(1), Rational::from((-1, 2)));
        assert_eq!(bernoulli_number(2), Rational::from((1, 6)));
        assert_eq!(bernoulli_number(4), Rational::from((-1, 30)));
        assert_eq!(bernoulli_number(5), Rational::new());
        assert_eq!(bernoulli_number(12), Rational::from((-691, 2730)));
    }

    #[test]
    fn odd_numbers_vanish() {
        for j in 1..30 {
            assert_eq!(bernoulli_number(2 * j + 1), Rational::new(), "B_{}", 2 * j + 1);
        }
    }

    #[test]
    fn polynomial_values() {
        // B_3(x) = x^3 - 3/2 x^2 + 1/2 x
        let half = Rational::from((1, 2));
        assert_eq!(bernoulli_polynomial_rational(3, &half), Rational::new());
        assert_eq!(
            bernoulli_polynomial_rational(3, &Rational::new()),
            Rational::new()
        );
        assert_eq!(
            bernoulli_polynomial_rational(3, &Rational::from((1, 4))),
            Rational::from((3, 64))
        );
        // B_k(0) = B_k
        for k in 0..20 {
            assert_eq!(
                bernoulli_polynomial_rational(k, &Rational::new()),
                bernoulli_number(k)
            );
        }
    }

    #[test]
    fn float_polynomial_matches_rational() {
        let x = Rational::from((3, 7));
        let exact = bernoulli_polynomial_rational(21, &x);
        let xf = Float::with_val(256, &x);
        let got = bernoulli_polynomial(21, &xf, 256);
        let want = Float::with_val(256, &exact);
        let diff = Float::with_val(256, &got - &want).abs();
        assert!(diff < Float::with_val(32, 1e-55));
    }

    #[test]
    fn bernoulli_integral_is_zero() {
        // int_0^1 B_k(x) dx = 0 for k >= 1: run the quadrature machinery on
        // the polynomial alone and compare against the exact zero.
        let prec = 320;
        for k in [3usize, 7, 11, 21] {
            let coeffs: Vec<Float> = bernoulli_polynomial_coefficients(k)
                .iter()
                .map(|c| Float::with_val(prec, c))
                .collect();
            let f = |x: &Float| {
                let mut acc = coeffs[k].clone();
                for c in coeffs.iter().rev().skip(1) {
                    acc *= x;
                    acc += c;
                }
                acc
            };
            let zero = Float::with_val(prec, 0);
            let half = Float::with_val(prec, 0.5);
            let one = Float::with_val(prec, 1);
            let mut est = crate::quadrature::integrate(&f, &zero, &half, 32, prec);
            est += crate::quadrature::integrate(&f, &half, &one, 32, prec);
            assert!(est.abs() < Float::with_val(32, 1e-60), "k = {k}");
        }
    }

    /// Independent oracle: expand B_{2mu+1} into monomials and integrate each
    /// `x^j g(x)` term in closed form.
    fn exact_kernel_integral(mu: u32, m: u64, kind: KernelKind, prec: u32) -> Float {
        let degree = (2 * mu + 1) as usize;
        let coeffs = bernoulli_polynomial_coefficients(degree);
        // substitute u = c + s x with c, s integers; x = (u - c)/s
        let (c, s, k_pow) = match kind {
            KernelKind::OddHarmonic => (2 * m - 1, 2u64, 2 * mu + 2),
            KernelKind::Logarithm => (m, 1u64, 2 * mu + 1),
        };
        let c_int = Integer::from(c);
        let lo = Rational::from(c_int.clone());
        let hi = Rational::from(c_int.clone() + s);
        let mut total = Float::new(prec);
        for (j, coeff) in coeffs.iter().enumerate() {
            if coeff.cmp0() == std::cmp::Ordering::Equal {
                continue;
            }
            // int_0^1 x^j / (c + s x)^K dx
            //   = (1/s^{j+1}) int_lo^hi (u - c)^j u^{-K} du
            let mut inner = Float::new(prec);
            let mut binom = Integer::from(1);
            for i in 0..=j {
                // C(j, i) (-c)^{j-i} int u^{i-K} du
                let p = i as i64 - k_pow as i64;
                let piece = if p == -1 {
                    // ln(hi/lo)
                    let ratio = Rational::from(&hi / &lo);
                    Float::with_val(prec, &ratio).ln()
                } else {
                    let e = p + 1;
                    let term = |q: &Rational| -> Rational {
                        if e >= 0 {
                            Rational::from(q.pow(e as u32))
                        } else {
                            Rational::from(q.pow((-e) as u32)).recip()
                        }
                    };
                    let diff = term(&hi) - term(&lo);
                    Float::with_val(prec, &(diff / Rational::from(e)))
                };
                let mut sign_c = Rational::from(-&c_int);
                sign_c = Rational::from(sign_c.pow((j - i) as u32));
                let factor = Float::with_val(prec, &(Rational::from(&binom) * sign_c));
                inner += factor * piece;
                if i < j {
                    binom *= (j - i) as u32;
                    binom /= (i + 1) as u32;
                }
            }
            let scale = Rational::from(Integer::from(s).pow(j as u32 + 1)).recip();
            inner *= Float::with_val(prec, &(Rational::from(coeff) * scale));
            total += inner;
        }
        total
    }

    #[test]
    fn quadrature_matches_monomial_expansion() {
        // for mu <= 3 and small m, quadrature agrees with the exact
        // closed-form evaluation to working precision
        let ctx = PrecisionContext::new(40);
        for mu in 1..=3u32 {
            for m in [2u64, 5, 17] {
                for kind in [KernelKind::OddHarmonic, KernelKind::Logarithm] {
                    let got = kernel_integral(mu, &Integer::from(m), kind, &ctx).unwrap();
                    let want = exact_kernel_integral(mu, m, kind, 640);
                    let diff = Float::with_val(64, got.value() - &want).abs();
                    let rel = Float::with_val(64, &diff / &want.abs());
                    assert!(
                        rel < Float::with_val(32, 1e-38),
                        "mu={mu} m={m} {kind:?}: rel={rel}"
                    );
                    let err_slack = Float::with_val(64, got.abs_error() * 2u32)
                        + Float::with_val(64, 1e-60);
                    assert!(diff <= err_slack, "certified error too small");
                }
            }
        }
    }
}
