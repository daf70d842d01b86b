//! Fixed-order Gauss-Legendre rules at arbitrary precision.
//!
//! Nodes are Legendre roots refined by Newton iteration from the Chebyshev
//! initial guesses; rules are cached per (order, precision).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rug::Float;

/// Nodes and weights on [-1, 1].
pub(crate) struct GlRule {
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
}

/// P_n(x) and P_{n-1}(x) by the three-term recurrence.
fn legendre_pair(n: usize, x: &Float, prec: u32) -> (Float, Float) {
    let mut p_prev = Float::with_val(prec, 1); // P_0
    let mut p = Float::with_val(prec, x); // P_1
    for k in 2..=n {
        // P_k = ((2k-1) x P_{k-1} - (k-1) P_{k-2}) / k
        let mut next = Float::with_val(prec, &p * x);
        next *= (2 * k - 1) as u32;
        let mut tail = p_prev;
        tail *= (k - 1) as u32;
        next -= &tail;
        next /= k as u32;
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

fn build_rule(n: usize, prec: u32) -> GlRule {
    assert!(n >= 2);
    let work = prec + 32;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let pi = Float::with_val(work, rug::float::Constant::Pi);
    for i in 0..n {
        // Chebyshev-flavoured seed, then Newton on P_n.
        let mut x = Float::with_val(work, &pi * &Float::with_val(work, i as f64 + 0.75));
        x /= Float::with_val(work, n as f64 + 0.5);
        x.cos_mut();
        x = -x; // ascending order
        let tol = Float::with_val(32, Float::i_exp(1, -(prec as i32) - 16));
        let mut p_prev_final = Float::new(work);
        for _ in 0..200 {
            let (p, p_prev) = legendre_pair(n, &x, work);
            // P'_n(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
            let mut num = Float::with_val(work, &x * &p);
            num -= &p_prev;
            num *= n as u32;
            let mut den = Float::with_val(work, &x * &x);
            den -= 1u32;
            let deriv = num / den;
            let step = Float::with_val(work, &p / &deriv);
            x -= &step;
            p_prev_final = p_prev;
            if step.abs() < tol {
                break;
            }
        }
        // w = 2 (1 - x^2) / (n^2 P_{n-1}(x)^2)
        let mut one_minus = Float::with_val(work, 1);
        one_minus -= Float::with_val(work, &x * &x);
        let mut den = Float::with_val(work, &p_prev_final * &p_prev_final);
        den *= (n * n) as u32;
        let mut w = Float::with_val(work, 2);
        w *= &one_minus;
        w /= &den;
        nodes.push(Float::with_val(prec, &x));
        weights.push(Float::with_val(prec, &w));
    }
    GlRule { nodes, weights }
}

fn rule(n: usize, prec: u32) -> Arc<GlRule> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u32), Arc<GlRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry((n, prec))
        .or_insert_with(|| Arc::new(build_rule(n, prec)))
        .clone()
}

/// Gauss-Legendre estimate of the integral of `f` over [a, b] with `n` nodes.
pub(crate) fn integrate<F>(f: F, a: &Float, b: &Float, n: usize, prec: u32) -> Float
where
    F: Fn(&Float) -> Float,
{
    let r = rule(n, prec);
    let half_width = Float::with_val(prec, b - a) / 2u32;
    let center = Float::with_val(prec, a + b) / 2u32;
    let mut acc = Float::new(prec);
    for (x, w) in r.nodes.iter().zip(&r.weights) {
        let mut t = Float::with_val(prec, x * &half_width);
        t += &center;
        acc += Float::with_val(prec, w * &f(&t));
    }
    acc * half_width
}
