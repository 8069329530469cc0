//! Physical topology, per-link hitting-time laws, and the law of `S = N + E_T`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ig::IgParams;
use crate::numerics::{integrate_with_breaks, xlogx, QuadratureSpec};

/// Minimum probability mass a tabulated density must capture.
pub const MIN_TABULATED_MASS: f64 = 1.0 - 1e-4;

/// Grid points per mean of `N + E_T` in the default tabulation grid.
pub const DEFAULT_STEPS_PER_MEAN: f64 = 4096.0;

/// Standard deviations beyond the mean covered by the default grid.
pub const DEFAULT_TAIL_SDS: f64 = 12.0;

/// Geometry and transport parameters of the clock–transmitter–receiver network.
///
/// Lengths, times and `sigma2` (length²/time) must use one consistent unit system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Topology {
    /// Transmitter–receiver distance.
    pub d: f64,
    /// Clock–transmitter distance.
    pub d_t: f64,
    /// Clock–receiver distance.
    pub d_r: f64,
    /// Drift velocity on the information link.
    pub v_i: f64,
    /// Drift velocity on both clock links.
    pub v_c: f64,
    /// Variance of the position increments per unit time.
    pub sigma2: f64,
}

impl Topology {
    pub fn new(d: f64, d_t: f64, d_r: f64, v_i: f64, v_c: f64, sigma2: f64) -> Self {
        Self {
            d,
            d_t,
            d_r,
            v_i,
            v_c,
            sigma2,
        }
    }

    /// All three distances equal.
    pub fn uniform(distance: f64, v_i: f64, v_c: f64, sigma2: f64) -> Self {
        Self::new(distance, distance, distance, v_i, v_c, sigma2)
    }

    /// Variance taken from a diffusion coefficient, `σ² = D / 2`.
    pub fn with_diffusion_coefficient(
        d: f64,
        d_t: f64,
        d_r: f64,
        v_i: f64,
        v_c: f64,
        diffusion: f64,
    ) -> Self {
        Self::new(d, d_t, d_r, v_i, v_c, diffusion / 2.0)
    }

    /// Per-link inverse Gaussian laws with the standard `λ_R = d_R² / σ²`.
    pub fn links(&self) -> Result<LinkSet> {
        self.links_with(LambdaRConvention::Squared)
    }

    pub fn links_with(&self, convention: LambdaRConvention) -> Result<LinkSet> {
        let info = IgParams::from_link(self.d, self.v_i, self.sigma2)?;
        let clock_tx = IgParams::from_link(self.d_t, self.v_c, self.sigma2)?;
        let clock_rx = match convention {
            LambdaRConvention::Squared => IgParams::from_link(self.d_r, self.v_c, self.sigma2)?,
            LambdaRConvention::Linear => {
                let base = IgParams::from_link(self.d_r, self.v_c, self.sigma2)?;
                IgParams::new(base.mu(), self.d_r / self.sigma2)?
            }
        };
        Ok(LinkSet {
            info,
            clock_tx,
            clock_rx,
        })
    }
}

/// Shape parameter used for the clock→receiver delay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LambdaRConvention {
    /// `λ_R = d_R² / σ²`, consistent with the other two links.
    #[default]
    Squared,
    /// `λ_R = d_R / σ²`, a dimensionally inconsistent variant kept for comparison.
    Linear,
}

/// Hitting-time laws of the three links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSet {
    /// `N`: transmitter → receiver.
    pub info: IgParams,
    /// `E_T`: clock → transmitter.
    pub clock_tx: IgParams,
    /// `E_R`: clock → receiver.
    pub clock_rx: IgParams,
}

/// Uniform tabulation grid `0, step, 2·step, …` up to at least `t_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumGrid {
    pub t_max: f64,
    pub step: f64,
}

impl SumGrid {
    pub fn new(t_max: f64, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "step must be positive, got {step}"
            )));
        }
        if !(t_max.is_finite() && t_max > step) {
            return Err(Error::InvalidGrid(format!(
                "t_max must exceed the step, got t_max = {t_max}, step = {step}"
            )));
        }
        Ok(Self { t_max, step })
    }

    /// `step = (μ_N + μ_T)/4096`, `t_max = μ_N + μ_T + 12·sd(N + E_T)`.
    pub fn default_for(n: &IgParams, e_t: &IgParams) -> Self {
        let mean = n.mean() + e_t.mean();
        let sd = (n.variance() + e_t.variance()).sqrt();
        Self {
            t_max: mean + DEFAULT_TAIL_SDS * sd,
            step: mean / DEFAULT_STEPS_PER_MEAN,
        }
    }

    fn points(&self) -> usize {
        (self.t_max / self.step).ceil() as usize + 1
    }
}

/// Density of `S = N + E_T` sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDensity {
    step: f64,
    pdf: Vec<f64>,
    cdf: Vec<f64>,
}

impl TabulatedDensity {
    pub fn step(&self) -> f64 {
        self.step
    }

    /// Last grid point.
    pub fn t_max(&self) -> f64 {
        (self.pdf.len() - 1) as f64 * self.step
    }

    pub fn pdf_values(&self) -> &[f64] {
        &self.pdf
    }

    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }

    /// Probability mass captured by the grid.
    pub fn mass(&self) -> f64 {
        *self.cdf.last().expect("grid has at least two points")
    }

    fn interpolate(values: &[f64], step: f64, t: f64) -> f64 {
        let pos = t / step;
        let k = pos.floor() as usize;
        if k + 1 >= values.len() {
            return *values.last().expect("non-empty grid");
        }
        let frac = pos - k as f64;
        values[k] + frac * (values[k + 1] - values[k])
    }

    pub fn pdf(&self, t: f64) -> f64 {
        if t <= 0.0 || t > self.t_max() {
            0.0
        } else {
            Self::interpolate(&self.pdf, self.step, t)
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            Self::interpolate(&self.cdf, self.step, t)
        }
    }

    /// `−Σ f ln f · Δ` over the grid.
    pub fn entropy(&self) -> f64 {
        -self.pdf.iter().map(|&f| xlogx(f)).sum::<f64>() * self.step
    }
}

/// Law of `N + E_T`: closed form when the two laws add, otherwise tabulated.
#[derive(Debug, Clone, PartialEq)]
pub enum SumDist {
    Analytic(IgParams),
    Tabulated(TabulatedDensity),
}

impl SumDist {
    pub fn is_analytic(&self) -> bool {
        matches!(self, SumDist::Analytic(_))
    }

    /// Differential entropy `h(N + E_T)` in nats (may be negative).
    pub fn entropy(&self) -> f64 {
        match self {
            SumDist::Analytic(p) => p.entropy(),
            SumDist::Tabulated(t) => t.entropy(),
        }
    }

    pub fn pdf(&self, t: f64) -> f64 {
        match self {
            SumDist::Analytic(p) => p.pdf(t),
            SumDist::Tabulated(tab) => tab.pdf(t),
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        match self {
            SumDist::Analytic(p) => p.cdf(t),
            SumDist::Tabulated(tab) => tab.cdf(t),
        }
    }

    /// Points worth seeding an integration over this law with.
    pub fn landmarks(&self) -> Vec<f64> {
        match self {
            SumDist::Analytic(p) => p.landmarks(),
            SumDist::Tabulated(tab) => {
                let peak = tab
                    .pdf
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .map_or(0.0, |(k, _)| k as f64 * tab.step);
                vec![peak, tab.t_max()]
            }
        }
    }
}

/// Law of `N + E_T` on the default grid.
pub fn sum_distribution(n: &IgParams, e_t: &IgParams) -> Result<SumDist> {
    sum_distribution_on(
        n,
        e_t,
        &SumGrid::default_for(n, e_t),
        &QuadratureSpec::default(),
    )
}

/// Law of `N + E_T`; the grid is only used when no closed form exists.
pub fn sum_distribution_on(
    n: &IgParams,
    e_t: &IgParams,
    grid: &SumGrid,
    quad: &QuadratureSpec,
) -> Result<SumDist> {
    SumGrid::new(grid.t_max, grid.step)?;
    match n.sum(e_t) {
        Some(p) => Ok(SumDist::Analytic(p)),
        None => tabulate_sum(n, e_t, grid, quad).map(SumDist::Tabulated),
    }
}

/// Numerical convolution `f_S(t) = ∫₀ᵗ f_N(u) f_{E_T}(t − u) du` at every grid point.
///
/// Grid points are independent and evaluated in parallel; the result does not
/// depend on the thread count.
pub fn tabulate_sum(
    n: &IgParams,
    e_t: &IgParams,
    grid: &SumGrid,
    quad: &QuadratureSpec,
) -> Result<TabulatedDensity> {
    let grid = SumGrid::new(grid.t_max, grid.step)?;
    let step = grid.step;
    let pdf = (0..grid.points())
        .into_par_iter()
        .map(|k| {
            let t = k as f64 * step;
            if t == 0.0 {
                return Ok(0.0);
            }
            let mut breaks = n.landmarks();
            breaks.extend(e_t.landmarks().into_iter().map(|e| t - e));
            integrate_with_breaks(|u| n.pdf(u) * e_t.pdf(t - u), 0.0, t, &breaks, quad)
                .map(|v| v.max(0.0))
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut cdf = Vec::with_capacity(pdf.len());
    let mut acc = 0.0;
    cdf.push(0.0);
    for w in pdf.windows(2) {
        acc += 0.5 * (w[0] + w[1]) * step;
        cdf.push(acc.min(1.0));
    }
    let tab = TabulatedDensity { step, pdf, cdf };
    let captured_mass = tab.mass();
    if captured_mass < MIN_TABULATED_MASS {
        return Err(Error::Coverage {
            t_max: tab.t_max(),
            captured_mass,
        });
    }
    Ok(tab)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ig(mu: f64, lambda: f64) -> IgParams {
        IgParams::new(mu, lambda).unwrap()
    }

    #[test]
    fn derive_links_substitution() {
        let t = Topology::new(1.0, 1.0, 1.0, 2.0, 4.0, 1.0);
        let links = t.links().unwrap();
        assert_eq!(links.info, ig(0.5, 1.0));
        assert_eq!(links.clock_tx, ig(0.25, 1.0));
        assert_eq!(links.clock_rx, ig(0.25, 1.0));
    }

    #[test]
    fn unit_geometry_has_expected_shapes() {
        for v in [1.0, 2.5, 4.0, 10.0] {
            let links = Topology::uniform(1.0, v, 2.0 * v, 1.0).links().unwrap();
            assert_eq!(links.info.lambda(), 1.0);
            assert_eq!(links.clock_tx.lambda(), 1.0);
            assert_eq!(links.clock_rx.lambda(), 1.0);
            assert_eq!(links.info.mu(), 1.0 / v);
        }
    }

    #[test]
    fn zero_clock_drift_rejected() {
        let t = Topology::new(1.0, 1.0, 1.0, 2.0, 0.0, 1.0);
        assert!(matches!(t.links(), Err(Error::NonPositiveDrift { .. })));
    }

    #[test]
    fn literal_lambda_r_convention() {
        let t = Topology::new(1.0, 1.0, 0.5, 2.0, 4.0, 2.0);
        let squared = t.links().unwrap().clock_rx;
        let literal = t.links_with(LambdaRConvention::Linear).unwrap().clock_rx;
        assert_eq!(squared.lambda(), 0.125);
        assert_eq!(literal.lambda(), 0.25);
        assert_eq!(squared.mu(), literal.mu());
    }

    #[test]
    fn diffusion_coefficient_halved() {
        let t = Topology::with_diffusion_coefficient(1.0, 1.0, 1.0, 1.0, 1.0, 3.0);
        assert_eq!(t.sigma2, 1.5);
    }

    #[test]
    fn matched_ratios_give_closed_form() {
        let s = sum_distribution(&ig(1.0, 1.0), &ig(2.0, 4.0)).unwrap();
        assert_eq!(s, SumDist::Analytic(ig(3.0, 9.0)));
        assert_eq!(s.entropy(), ig(3.0, 9.0).entropy());
        assert_eq!(s.cdf(3.0), ig(3.0, 9.0).cdf(3.0));
        assert_eq!(s.cdf(0.0), 0.0);
    }

    #[test]
    fn equal_velocities_always_analytic() {
        for v in [0.7, 1.0, 3.0, 9.5] {
            let links = Topology::new(0.3, 1.7, 1.0, v, v, 0.8).links().unwrap();
            assert!(sum_distribution(&links.info, &links.clock_tx)
                .unwrap()
                .is_analytic());
        }
    }

    #[test]
    fn unmatched_pair_is_tabulated_with_full_mass() {
        let (n, e_t) = (ig(0.5, 1.0), ig(0.25, 1.0));
        let s = sum_distribution(&n, &e_t).unwrap();
        let SumDist::Tabulated(tab) = &s else {
            panic!("expected tabulated");
        };
        assert!(tab.mass() >= 0.9999 && tab.mass() <= 1.0);
        assert!(tab.pdf_values().iter().all(|&f| f >= 0.0));
        assert!(tab.cdf_values().windows(2).all(|w| w[1] >= w[0]));
        assert!(s.cdf(tab.t_max()) >= 0.9999);
        let mean: f64 = tab
            .pdf_values()
            .iter()
            .enumerate()
            .map(|(k, f)| k as f64 * tab.step() * f)
            .sum::<f64>()
            * tab.step();
        assert!((mean / 0.75 - 1.0).abs() < 1e-3, "mean {mean}");
    }

    #[test]
    fn invalid_grid() {
        let (n, e_t) = (ig(0.5, 1.0), ig(0.25, 1.0));
        let q = QuadratureSpec::default();
        assert!(matches!(
            sum_distribution_on(
                &n,
                &e_t,
                &SumGrid {
                    t_max: 5.0,
                    step: 0.0
                },
                &q
            ),
            Err(Error::InvalidGrid(_))
        ));
        assert!(SumGrid::new(5.0, -1.0).is_err());
    }

    #[test]
    fn short_grid_reports_captured_mass() {
        let (n, e_t) = (ig(0.5, 1.0), ig(0.25, 1.0));
        let grid = SumGrid::new(0.75, 0.75 / 512.0).unwrap();
        match tabulate_sum(&n, &e_t, &grid, &QuadratureSpec::default()) {
            Err(Error::Coverage { captured_mass, .. }) => {
                assert!(captured_mass > 0.3 && captured_mass < 0.9);
            }
            other => panic!("expected coverage error, got {other:?}"),
        }
    }

    #[test]
    fn tabulated_matches_closed_form_for_matched_pair() {
        let (a, b) = (ig(1.0, 1.0), ig(2.0, 4.0));
        let exact = ig(3.0, 9.0);
        let tab = tabulate_sum(
            &a,
            &b,
            &SumGrid::default_for(&a, &b),
            &QuadratureSpec::default(),
        )
        .unwrap();
        let l1: f64 = tab
            .pdf_values()
            .iter()
            .enumerate()
            .map(|(k, f)| (f - exact.pdf(k as f64 * tab.step())).abs())
            .sum::<f64>()
            * tab.step();
        assert!(l1 < 1e-3, "L1 = {l1}");
        assert!((tab.entropy() - exact.entropy()).abs() < 1e-4);
    }

    #[test]
    fn near_deterministic_sum_has_negative_entropy() {
        let s = sum_distribution(&ig(0.01, 100.0), &ig(0.02, 400.0)).unwrap();
        assert!(s.is_analytic());
        assert!(s.entropy() < 0.0);
    }
}
