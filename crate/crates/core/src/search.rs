//! One-dimensional minimization of unimodal functions.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Outcome of a golden-section search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenMin<T> {
    pub x: T,
    pub fx: T,
    pub iterations: usize,
}

/// Golden-section search for the minimizer of `f` on `[lo, hi]`, stopping once the
/// bracket is narrower than `tol`.
pub fn golden_section<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    lo: T,
    hi: T,
    tol: T,
    max_iter: usize,
) -> Result<GoldenMin<T>> {
    let inv_phi = T::c(0.618_033_988_749_894_8);
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut it = 0;
    while b - a > tol {
        if it >= max_iter {
            return Err(Error::ConvergenceFailure("golden-section search".into()));
        }
        it += 1;
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    let (x, fx) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    Ok(GoldenMin { x, fx, iterations: it })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_minimum() {
        let r = golden_section(|x: f64| (x - 0.3).powi(2), -8.0, 8.0, 1e-10, 200).unwrap();
        assert!((r.x - 0.3).abs() < 1e-9);
        assert!(r.iterations < 70);
    }

    #[test]
    fn reports_iteration_cap() {
        assert!(golden_section(|x: f64| x * x, -1.0, 1.0, 1e-10, 5).is_err());
    }
}
