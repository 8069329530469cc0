//! Globally adaptive Gauss–Legendre quadrature.
//!
//! Each panel carries a 15-point Gauss–Legendre estimate over the whole panel
//! and over its two halves. The finer one is what gets summed, and a multiple
//! of their difference serves as its error estimate. The panel with the largest
//! error is bisected until the total error meets the tolerance.
//!
//! A semi-infinite range `[lo, ∞)` is mapped onto `[0, 1)` with
//! `t = lo + u / (1 - u)`, `dt = du / (1 - u)^2`. Gauss nodes are interior, so
//! the singular endpoint `u = 1` is never evaluated.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{positive, Error, Result};

const ORDER: usize = 15;

// Near an algebraic endpoint singularity the halved estimate improves only by
// a constant factor, so the raw difference understates its error.
const ERROR_SAFETY: f64 = 4.0;

/// Tolerances and budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        positive("abs_tol", abs_tol)?;
        positive("rel_tol", rel_tol)?;
        if max_subdivisions == 0 {
            return Err(Error::InvalidParameter {
                name: "max_subdivisions",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        })
    }

    /// Same budget, tolerances scaled by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            max_subdivisions: self.max_subdivisions,
        }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 2000,
        }
    }
}

struct Rule {
    nodes: [f64; ORDER],
    weights: [f64; ORDER],
}

// Gauss–Legendre nodes on [-1, 1] by Newton iteration on P_n.
fn rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut derivative = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                derivative = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / derivative;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * derivative * derivative);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Rule { nodes, weights }
    })
}

fn gauss<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<f64> {
    let rule = rule();
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let t = center + half * x;
        let y = f(t);
        if !y.is_finite() {
            return Err(Error::NonFiniteIntegrand { at: t });
        }
        sum += w * y;
    }
    Ok(sum * half)
}

struct Panel {
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    error: f64,
}

impl Panel {
    fn new<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64) -> Result<Self> {
        let mid = 0.5 * (a + b);
        let left = gauss(f, a, mid)?;
        let right = gauss(f, mid, b)?;
        Ok(Self {
            a,
            b,
            left,
            right,
            error: ERROR_SAFETY * (whole - (left + right)).abs(),
        })
    }

    fn value(&self) -> f64 {
        self.left + self.right
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[lo, hi]`; `hi` may be `f64::INFINITY`.
///
/// On budget exhaustion the error carries the best estimate so far.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<f64> {
    integrate_with_breaks(f, lo, hi, &[], spec)
}

/// Like [`integrate`], seeding the panel set at the given interior points.
///
/// Gauss nodes never touch panel edges, so a narrow feature needs break
/// points on both sides of it, not just at its centre. Points outside
/// `(lo, hi)` are ignored.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !lo.is_finite() || hi.is_nan() || hi < lo {
        return Err(Error::InvalidParameter {
            name: "integration range",
            value: hi,
            reason: "requires finite lo and hi >= lo",
        });
    }
    if hi == lo {
        return Ok(0.0);
    }
    let mut points: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x > lo && x < hi)
        .collect();
    if hi.is_infinite() {
        let to_unit = |t: f64| {
            let s = t - lo;
            s / (1.0 + s)
        };
        for p in &mut points {
            *p = to_unit(*p);
        }
        let g = |u: f64| {
            let v = 1.0 - u;
            f(lo + u / v) / (v * v)
        };
        adaptive(&g, 0.0, 1.0, &mut points, spec)
    } else {
        adaptive(&f, lo, hi, &mut points, spec)
    }
}

fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    points: &mut Vec<f64>,
    spec: &QuadratureSpec,
) -> Result<f64> {
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut edges = Vec::with_capacity(points.len() + 2);
    edges.push(lo);
    edges.extend(points.iter().copied());
    edges.push(hi);

    let mut heap = BinaryHeap::with_capacity(spec.max_subdivisions + edges.len());
    for w in edges.windows(2) {
        let whole = gauss(f, w[0], w[1])?;
        heap.push(Panel::new(f, w[0], w[1], whole)?);
    }
    let mut total: f64 = heap.iter().map(Panel::value).sum();
    let mut error: f64 = heap.iter().map(|p| p.error).sum();

    while error > spec.abs_tol.max(spec.rel_tol * total.abs()) {
        if heap.len() >= spec.max_subdivisions {
            return Err(Error::NoConvergence {
                estimate: total,
                error_estimate: error,
            });
        }
        let worst = heap.pop().expect("panel set is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Cannot bisect further in floating point.
            return Err(Error::NoConvergence {
                estimate: total,
                error_estimate: error,
            });
        }
        let left = Panel::new(f, worst.a, mid, worst.left)?;
        let right = Panel::new(f, mid, worst.b, worst.right)?;
        total += left.value() + right.value() - worst.value();
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if error < 0.0 {
            error = heap.iter().map(|p| p.error).sum();
        }
    }
    // Re-sum to shed drift from the running updates.
    Ok(heap.iter().map(Panel::value).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_is_exact_for_polynomials() {
        let r = rule();
        let w: f64 = r.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
        // degree 28 monomial: ∫_{-1}^1 x^28 = 2/29
        let q: f64 = r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(x, w)| w * x.powi(28))
            .sum();
        assert!((q - 2.0 / 29.0).abs() < 1e-14);
    }

    #[test]
    fn constant_and_exponential() {
        let spec = QuadratureSpec::default();
        assert!((integrate(|_| 1.0, 0.0, 1.0, &spec).unwrap() - 1.0).abs() < 1e-15);
        let e = integrate(|t| (-t).exp(), 0.0, f64::INFINITY, &spec).unwrap();
        assert!((e - 1.0).abs() < spec.abs_tol);
    }

    #[test]
    fn empty_and_reversed_ranges() {
        let spec = QuadratureSpec::default();
        assert_eq!(integrate(|t| t, 2.0, 2.0, &spec).unwrap(), 0.0);
        assert!(integrate(|t| t, 2.0, 1.0, &spec).is_err());
        assert!(integrate(|t| t, f64::NEG_INFINITY, 1.0, &spec).is_err());
    }

    #[test]
    fn integrable_endpoint_singularity() {
        let spec = QuadratureSpec::default();
        let v = integrate(|t| 1.0 / t.sqrt(), 0.0, 1.0, &spec).unwrap();
        assert!((v - 2.0).abs() < 1e-8);
    }

    #[test]
    fn break_points_resolve_narrow_peak() {
        let spec = QuadratureSpec::default();
        let width = 1e-4;
        let peak = |t: f64| (-0.5 * ((t - 7.3) / width).powi(2)).exp();
        let exact = width * (2.0 * std::f64::consts::PI).sqrt();
        let breaks = [7.3 - 10.0 * width, 7.3, 7.3 + 10.0 * width];
        let v = integrate_with_breaks(peak, 0.0, f64::INFINITY, &breaks, &spec).unwrap();
        assert!((v - exact).abs() < 1e-10);
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let spec = QuadratureSpec::new(1e-14, 1e-14, 3).unwrap();
        match integrate(|t| (1.0 / t).sin(), 1e-3, 1.0, &spec) {
            Err(Error::NoConvergence {
                estimate,
                error_estimate,
            }) => {
                assert!(estimate.is_finite());
                assert!(error_estimate > 0.0);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let spec = QuadratureSpec::default();
        assert!(matches!(
            integrate(|_| f64::NAN, 0.0, 1.0, &spec),
            Err(Error::NonFiniteIntegrand { .. })
        ));
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::new(0.0, 1e-8, 10).is_err());
        assert!(QuadratureSpec::new(1e-10, -1.0, 10).is_err());
        assert!(QuadratureSpec::new(1e-10, 1e-8, 0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn linearity(
            alpha in -3.0f64..3.0,
            beta in -3.0f64..3.0,
            c1 in 0.1f64..4.0,
            c2 in 0.1f64..4.0,
            hi in 0.5f64..6.0,
        ) {
            let spec = QuadratureSpec::default();
            let f = |t: f64| (c1 * t).sin() + 1.0 / (1.0 + t * t);
            let g = |t: f64| (-c2 * t).exp() * t.cos();
            let both = integrate(|t| alpha * f(t) + beta * g(t), 0.0, hi, &spec).unwrap();
            let fi = integrate(f, 0.0, hi, &spec).unwrap();
            let gi = integrate(g, 0.0, hi, &spec).unwrap();
            let combined = alpha * fi + beta * gi;
            let tol = (1.0 + alpha.abs() + beta.abs()) * (spec.abs_tol + spec.rel_tol * combined.abs().max(1.0));
            proptest::prop_assert!((both - combined).abs() <= tol);
        }
    }
}
