use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use super::ClassError;

const BISECTION_TOL: f64 = 1e-12;

/// Growth data of a loop alphabet `L`: the root `rho` of `1 - L(x)`, the
/// growth rate `gamma = 1/rho` and the constant of `|L*_n| ~ c * gamma^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Growth {
    pub rho: f64,
    pub gamma: f64,
    pub c: f64,
}

impl Growth {
    /// Empty loop alphabet: `rho` is infinite and nothing grows.
    pub const EMPTY: Growth = Growth {
        rho: f64::INFINITY,
        gamma: 0.0,
        c: 0.0,
    };
}

fn poly(weights: &[u32], x: f64) -> f64 {
    weights.iter().map(|&w| x.powi(w as i32)).sum()
}

fn poly_derivative(weights: &[u32], x: f64) -> f64 {
    weights
        .iter()
        .map(|&w| w as f64 * x.powi(w as i32 - 1))
        .sum()
}

/// Root of the increasing function `f` on `(lo, hi]`, assuming `f(lo) < 0 <= f(hi)`.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    if f(hi) == 0.0 {
        return hi;
    }
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Growth of the loop language `L*` from the letter weights of `L`.
pub fn growth(weights: &[u32]) -> Result<Growth, ClassError> {
    if weights.is_empty() {
        return Ok(Growth::EMPTY);
    }
    if !weights.contains(&1) {
        return Err(ClassError::NoUnitLetter);
    }
    let rho = bisect(|x| poly(weights, x) - 1.0, 0.0, 1.0);
    Ok(Growth {
        rho,
        gamma: 1.0 / rho,
        c: 1.0 / (rho * poly_derivative(weights, rho)),
    })
}

/// Exact `|L*_n|` for `n = 0..=max`.
pub fn loop_counts(weights: &[u32], max: usize) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); max + 1];
    out[0] = BigUint::one();
    for n in 1..=max {
        let mut acc = BigUint::zero();
        for &w in weights {
            let w = w as usize;
            if w <= n {
                acc += &out[n - w];
            }
        }
        out[n] = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn single_letter() {
        let g = growth(&[1]).unwrap();
        assert_eq!(g.rho, 1.0);
        assert_eq!(g.gamma, 1.0);
        assert_eq!(g.c, 1.0);
    }

    #[test]
    fn golden_ratio() {
        let g = growth(&[1, 2]).unwrap();
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        assert!((g.rho - phi).abs() < 1e-11);
        assert!((g.gamma - 1.0 / phi).abs() < 1e-10);
        assert!((g.c - 0.7236067977).abs() < 1e-9);
        let fib = loop_counts(&[1, 2], 30);
        assert_eq!(fib[6], BigUint::from(13u32));
        let scaled = fib[30].to_f64().unwrap() * g.rho.powi(30);
        assert!((scaled - g.c).abs() < 0.01);
    }

    #[test]
    fn tribonacci() {
        let g = growth(&[1, 2, 3]).unwrap();
        assert!((g.rho - 0.5436890127).abs() < 1e-9);
        assert!((g.gamma - 1.8392867552).abs() < 1e-9);
        let t = loop_counts(&[1, 2, 3], 30);
        let scaled = t[30].to_f64().unwrap() * g.rho.powi(30);
        assert!((scaled - g.c).abs() < 0.01);
    }

    #[test]
    fn several_unit_letters() {
        let g = growth(&[1, 1, 1, 1]).unwrap();
        assert!((g.rho - 0.25).abs() < 1e-11);
        assert!((g.c - 1.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(growth(&[]).unwrap(), Growth::EMPTY);
        assert!(matches!(growth(&[2, 3]), Err(ClassError::NoUnitLetter)));
    }
}
