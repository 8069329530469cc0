use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Bisection on a sign-changing bracket `[lo, hi]`.
///
/// Stops once the bracket is no wider than `tol` (`tol = 0` runs to full
/// floating-point resolution) and returns its midpoint. An exact zero at a
/// midpoint moves the upper end there, so the search keeps converging on the
/// leftmost sign change it can see.
pub fn bisect_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    let bracketed = matches!(
        (f_lo * f_hi).partial_cmp(&0.0),
        Some(Ordering::Less | Ordering::Equal)
    );
    if !bracketed || lo.partial_cmp(&hi) == Some(Ordering::Greater) || lo.is_nan() || hi.is_nan() {
        return Err(Error::NoSignChange { lo, hi, f_lo, f_hi });
    }
    for _ in 0..2100 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 || f_mid.signum() != f_lo.signum() {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_and_quadratic() {
        let r = bisect_root(|u| u - 0.5, 0.0, 1.0, 1e-12).unwrap();
        assert!((r - 0.5).abs() <= 1e-12);
        let r = bisect_root(|u| u * u - 2.0, 0.0, 2.0, 0.0).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn no_sign_change() {
        assert!(matches!(
            bisect_root(|u| u * u + 1.0, -1.0, 1.0, 1e-9),
            Err(Error::NoSignChange { .. })
        ));
    }

    #[test]
    fn zero_at_left_endpoint() {
        assert_eq!(bisect_root(|u| u, 0.0, 1.0, 1e-9).unwrap(), 0.0);
    }
}
