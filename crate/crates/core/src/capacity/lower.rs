use std::cell::Cell;

use super::BoundSettings;
use crate::channel::{sum_distribution_on, LinkSet, SumDist, SumGrid, Topology};
use crate::error::{positive, Error, Result};
use crate::ig::IgParams;
use crate::numerics::{binary_entropy, integrate_with_breaks, QuadratureSpec};

/// Input tail mass dropped by truncating the outer integral at `m·ln(1/EXPONENTIAL_TAIL_MASS)`.
pub const EXPONENTIAL_TAIL_MASS: f64 = 1e-12;

/// Mutual information `I(X; B) = h(B) − h(B|X)` of the in-slot detector, in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundResult {
    /// `F_Y(0) = Pr(B = 0)`.
    pub f_y0: f64,
    pub h_b: f64,
    pub h_b_given_x: f64,
    pub value: f64,
}

impl LowerBoundResult {
    pub fn value_bits(&self) -> f64 {
        self.value / std::f64::consts::LN_2
    }
}

/// Receiver that only reports `B = 1{Z > 0}`.
#[derive(Debug, Clone)]
pub struct BinaryReceiver {
    clock_rx: IgParams,
    sum: SumDist,
    quad: QuadratureSpec,
    outer: QuadratureSpec,
}

impl BinaryReceiver {
    pub fn new(links: &LinkSet, settings: &BoundSettings) -> Result<Self> {
        let (n, e_t) = (&links.info, &links.clock_tx);
        let grid = settings
            .grid
            .unwrap_or_else(|| SumGrid::default_for(n, e_t));
        let sum = sum_distribution_on(n, e_t, &grid, &settings.quadrature)?;
        Ok(Self {
            clock_rx: links.clock_rx,
            sum,
            // Inner integrals run tighter so their jitter stays below the outer tolerance.
            quad: settings.quadrature.tightened(1e-2),
            outer: settings.quadrature,
        })
    }

    pub fn sum_distribution(&self) -> &SumDist {
        &self.sum
    }

    /// `F_{Y|X=x}(0) = Pr(E_R ≥ x + N + E_T) = ∫_x^∞ f_{E_R}(e) F_S(e − x) de`.
    pub fn zero_prob_given(&self, x: f64) -> Result<f64> {
        let e_r = &self.clock_rx;
        let value = match &self.sum {
            SumDist::Analytic(_) => {
                let mut breaks = e_r.landmarks();
                breaks.extend(self.sum.landmarks().into_iter().map(|s| x + s));
                integrate_with_breaks(
                    |e| e_r.pdf(e) * self.sum.cdf(e - x),
                    x,
                    f64::INFINITY,
                    &breaks,
                    &self.quad,
                )?
            }
            // A tabulated F_S is piecewise linear, so adaptive quadrature would
            // chase its kinks; the equivalent ∫ f_S(s) Pr(E_R ≥ x + s) ds is
            // summed on the grid instead.
            SumDist::Tabulated(tab) => {
                let pdf = tab.pdf_values();
                let last = pdf.len() - 1;
                pdf.iter()
                    .enumerate()
                    .map(|(k, &f)| {
                        let weight = if k == 0 || k == last { 0.5 } else { 1.0 };
                        weight * f * (1.0 - e_r.cdf(x + k as f64 * tab.step()))
                    })
                    .sum::<f64>()
                    * tab.step()
            }
        };
        Ok(value.clamp(0.0, 1.0))
    }

    /// Lower bound for an exponential input law with mean `m`.
    pub fn lower_bound(&self, m: f64) -> Result<LowerBoundResult> {
        positive("m", m)?;
        let x_max = m * (1.0 / EXPONENTIAL_TAIL_MASS).ln();
        let density = |x: f64| (-x / m).exp() / m;
        let failure: Cell<Option<Error>> = Cell::new(None);
        let conditional = |x: f64| match self.zero_prob_given(x) {
            Ok(p) => p,
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        };
        let e_r = &self.clock_rx;
        let mut breaks = e_r.landmarks();
        breaks.push(m);

        let f_y0 = integrate_with_breaks(
            |x| density(x) * conditional(x),
            0.0,
            x_max,
            &breaks,
            &self.outer,
        );
        let h_b_given_x = integrate_with_breaks(
            |x| {
                let p = conditional(x);
                if p.is_nan() {
                    return p;
                }
                density(x) * binary_entropy(p).expect("clamped to [0, 1]")
            },
            0.0,
            x_max,
            &breaks,
            &self.outer,
        );
        if let Some(e) = failure.take() {
            return Err(e);
        }
        let f_y0 = f_y0?.clamp(0.0, 1.0);
        let h_b_given_x = h_b_given_x?.max(0.0);
        let h_b = binary_entropy(f_y0)?;
        // Jensen guarantees h(B) ≥ h(B|X); only quadrature noise can invert it.
        let value = (h_b - h_b_given_x).max(0.0);
        Ok(LowerBoundResult {
            f_y0,
            h_b,
            h_b_given_x,
            value,
        })
    }
}

/// Binary-receiver lower bound for an exponential input with mean `m`.
pub fn lower_bound(t: &Topology, m: f64, settings: &BoundSettings) -> Result<LowerBoundResult> {
    let links = t.links_with(settings.lambda_r)?;
    BinaryReceiver::new(&links, settings)?.lower_bound(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn common_drift(v: f64) -> Topology {
        Topology::uniform(1.0, v, v, 1.0)
    }

    #[test]
    fn conditional_zero_probability_decreases_with_input_delay() {
        let rx = BinaryReceiver::new(
            &common_drift(5.0).links().unwrap(),
            &BoundSettings::default(),
        )
        .unwrap();
        let mut prev = 1.0;
        for k in 0..40 {
            let p = rx.zero_prob_given(0.02 * k as f64).unwrap();
            assert!(p <= prev + 1e-12);
            prev = p;
        }
        assert!(rx.zero_prob_given(50.0).unwrap() < 1e-12);
    }

    #[test]
    fn zero_input_matches_direct_double_integral() {
        // Pr(E_R ≥ N + E_T) = ∫ f_S(s) (1 − F_R(s)) ds, an independent route.
        let links = common_drift(3.0).links().unwrap();
        let rx = BinaryReceiver::new(&links, &BoundSettings::default()).unwrap();
        let s = links.info.sum(&links.clock_tx).unwrap();
        let q = QuadratureSpec::new(1e-13, 1e-12, 4000).unwrap();
        let direct = integrate_with_breaks(
            |u| s.pdf(u) * (1.0 - links.clock_rx.cdf(u)),
            0.0,
            f64::INFINITY,
            &[s.mode(), s.mean()],
            &q,
        )
        .unwrap();
        assert!((rx.zero_prob_given(0.0).unwrap() - direct).abs() < 1e-9);
    }

    #[test]
    fn bounded_by_ln2_and_vanishes_at_high_drift() {
        for v in [1.0, 5.0, 10.0] {
            let r = lower_bound(&common_drift(v), 0.1, &BoundSettings::default()).unwrap();
            assert!(r.value >= 0.0 && r.value <= LN_2);
            assert!((0.0..=1.0).contains(&r.f_y0));
            assert!((r.value - (r.h_b - r.h_b_given_x)).abs() < 1e-12);
        }
        let r = lower_bound(&common_drift(1e3), 0.1, &BoundSettings::default()).unwrap();
        assert!(r.value < 0.01, "{r:?}");
    }

    #[test]
    fn tabulated_sum_path() {
        let t = Topology::uniform(1.0, 2.0, 4.0, 1.0);
        let r = lower_bound(&t, 0.3, &BoundSettings::default()).unwrap();
        assert!(r.value > 0.0 && r.value < LN_2);
    }

    #[test]
    fn rejects_non_positive_mean() {
        let rx = BinaryReceiver::new(
            &common_drift(5.0).links().unwrap(),
            &BoundSettings::default(),
        )
        .unwrap();
        assert!(rx.lower_bound(0.0).is_err());
    }
}
