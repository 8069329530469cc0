use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Standard normal cumulative distribution function.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Scaled complementary error function `exp(x^2) * erfc(x)` for `x >= 0`.
///
/// Used wherever `erfc` would underflow while its exponential prefactor
/// overflows, e.g. the second term of the inverse Gaussian cdf.
pub fn erfcx(x: f64) -> f64 {
    debug_assert!(x >= 0.0, "erfcx is only evaluated on the non-negative axis");
    if x < 2.0 {
        return (x * x).exp() * libm::erfc(x);
    }
    // Continued fraction erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))),
    // evaluated with the modified Lentz recurrence.
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = 0.5 * k as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / (SQRT_PI * f)
}

/// Exponential integral `E1(x) = ∫_x^∞ e^{-t}/t dt`, so that `Ei(-x) = -E1(x)`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    check_e1_domain(x)?;
    if x <= 1.0 {
        Ok(e1_series(x))
    } else {
        Ok(e1_scaled_fraction(x) * (-x).exp())
    }
}

/// `exp(x) * E1(x)`, finite for every positive `x` even when `exp(x)` overflows.
pub fn exp_scaled_e1(x: f64) -> Result<f64> {
    check_e1_domain(x)?;
    if x <= 1.0 {
        Ok(e1_series(x) * x.exp())
    } else {
        Ok(e1_scaled_fraction(x))
    }
}

fn check_e1_domain(x: f64) -> Result<()> {
    if x > 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain {
            function: "E1",
            value: x,
        })
    }
}

// -γ - ln x + Σ_{k≥1} (-1)^{k+1} x^k / (k k!)
fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..100 {
        let k = k as f64;
        term *= -x / k;
        let contribution = -term / k;
        sum += contribution;
        if contribution.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    -EULER_GAMMA - x.ln() + sum
}

// Continued fraction for e^x E1(x), converging quickly for x > 1.
fn e1_scaled_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// `p ln p` with the continuity convention `0 ln 0 = 0`.
#[inline]
pub fn xlogx(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}

/// Binary entropy in nats.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain {
            function: "binary entropy",
            value: p,
        });
    }
    // Evaluating both halves in a fixed order keeps h(p) == h(1 - p) bitwise
    // whenever 1 - p is exact.
    let (lo, hi) = if p <= 0.5 { (p, 1.0 - p) } else { (1.0 - p, p) };
    Ok((-(xlogx(lo) + xlogx(hi))).clamp(0.0, LN_2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate, QuadratureSpec};

    // Maclaurin series of erf; accurate for moderate |x| in double precision.
    fn erf_series(x: f64) -> f64 {
        let mut sum = 0.0;
        let mut power = x;
        let mut factorial = 1.0;
        for n in 0..80 {
            if n > 0 {
                factorial *= n as f64;
                power *= -x * x;
            }
            sum += power / (factorial * (2 * n + 1) as f64);
        }
        2.0 / SQRT_PI * sum
    }

    #[test]
    fn normal_cdf_reference_points() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        let oracle = 0.5 * (1.0 - erf_series(2.0 * FRAC_1_SQRT_2));
        assert!((std_normal_cdf(-2.0) - oracle).abs() < 1e-13);
        assert!((std_normal_cdf(-2.0) - 0.022_750_131_948_179_2).abs() < 1e-15);
        assert!(std_normal_cdf(8.0) >= 1.0 - 1e-14);
    }

    #[test]
    fn normal_cdf_symmetry() {
        let mut x = -8.0;
        while x <= 8.0 {
            let s = std_normal_cdf(x) + std_normal_cdf(-x);
            assert!((s - 1.0).abs() < 1e-12, "x = {x}");
            x += 0.01;
        }
    }

    #[test]
    fn erfcx_is_continuous_across_branch_point() {
        let below = erfcx(2.0 - 1e-12);
        let above = erfcx(2.0);
        assert!((below - above).abs() < 1e-12);
        // Large-x asymptote 1/(x sqrt(pi)) (1 - 1/(2x^2)).
        let x = 1e4;
        let asym = 1.0 / (x * SQRT_PI) * (1.0 - 0.5 / (x * x));
        assert!((erfcx(x) / asym - 1.0).abs() < 1e-12);
    }

    #[test]
    fn e1_matches_quadrature_oracle() {
        let spec = QuadratureSpec::new(1e-14, 1e-13, 4000).unwrap();
        for &x in &[0.05, 0.5, 1.0, 1.5, 2.0, 7.5, 30.0] {
            let oracle = integrate(|t| (-t).exp() / t, x, f64::INFINITY, &spec).unwrap();
            let e1 = exp_integral_e1(x).unwrap();
            assert!(
                (e1 - oracle).abs() < 1e-12 * oracle.max(1e-3),
                "x = {x}: {e1} vs {oracle}"
            );
        }
        assert!((exp_integral_e1(1.0).unwrap() - 0.219_383_934_395_520_27).abs() < 1e-15);
        assert!((exp_integral_e1(2.0).unwrap() - 0.048_900_510_708_061_12).abs() < 1e-15);
    }

    #[test]
    fn e1_vanishes_in_tail_and_respects_bound() {
        assert!(exp_integral_e1(700.0).unwrap() < 1e-300);
        let mut x: f64 = 1e-3;
        let mut prev = f64::INFINITY;
        while x < 50.0 {
            let e1 = exp_integral_e1(x).unwrap();
            assert!(e1 > 0.0 && e1 < prev);
            assert!(e1 < (-x).exp() / x, "x = {x}");
            prev = e1;
            x *= 1.07;
        }
    }

    #[test]
    fn e1_domain() {
        assert!(exp_integral_e1(0.0).is_err());
        assert!(exp_integral_e1(-1.0).is_err());
        assert!(exp_scaled_e1(f64::NAN).is_err());
    }

    #[test]
    fn scaled_e1_large_argument() {
        // e^x E1(x) ~ 1/x (1 - 1/x + 2/x^2 - ...)
        let x = 2e6;
        let asym = (1.0 - 1.0 / x + 2.0 / (x * x)) / x;
        assert!((exp_scaled_e1(x).unwrap() / asym - 1.0).abs() < 1e-14);
    }

    #[test]
    fn binary_entropy_values() {
        assert!((binary_entropy(0.5).unwrap() - LN_2).abs() < 1e-16);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.1).unwrap() - 0.325_082_973_391_448_24).abs() < 1e-15);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    proptest::proptest! {
        #[test]
        fn binary_entropy_symmetric(k in 0u32..=1 << 20) {
            // dyadic p so that 1 - p is exact
            let p = k as f64 / (1u32 << 20) as f64;
            proptest::prop_assert_eq!(binary_entropy(p).unwrap(), binary_entropy(1.0 - p).unwrap());
        }
    }
}
