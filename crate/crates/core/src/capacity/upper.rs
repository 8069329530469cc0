use super::{BoundSettings, Constraints};
use crate::channel::{sum_distribution_on, LinkSet, SumGrid, Topology};
use crate::error::Result;
use crate::ig::IgParams;
use crate::numerics::{bisect_root, integrate_with_breaks, xlogx, QuadratureSpec};

/// Leftmost point where the information-link density reaches 1, or 0 if it never does.
pub fn c_star(n: &IgParams) -> f64 {
    let mode = n.mode();
    if n.pdf(mode) < 1.0 {
        return 0.0;
    }
    // The density rises monotonically from 0 to its peak on (0, mode].
    bisect_root(|u| n.pdf(u) - 1.0, 0.0, mode, 0.0).expect("pdf(0) - 1 < 0 <= pdf(mode) - 1")
}

/// Pieces of `g(c*) = min(h(N)·1{h(N) < 0}, −∫_{c*}^∞ f_N ln f_N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GTerm {
    /// `h(N)`.
    pub entropy: f64,
    pub c_star: f64,
    /// `−∫_{c*}^∞ f_N(u) ln f_N(u) du`.
    pub tail_entropy: f64,
    pub value: f64,
}

pub fn g_of_cstar(n: &IgParams, quad: &QuadratureSpec) -> Result<GTerm> {
    let entropy = n.entropy();
    let c = c_star(n);
    let breaks = n.landmarks();
    let tail_entropy =
        -integrate_with_breaks(|u| xlogx(n.pdf(u)), c, f64::INFINITY, &breaks, quad)?;
    let negative_part = if entropy < 0.0 { entropy } else { 0.0 };
    Ok(GTerm {
        entropy,
        c_star: c,
        tail_entropy,
        value: negative_part.min(tail_entropy),
    })
}

/// `∫₀^m f_{E_R}(u) (1 − u/m)² du`, the synchronization penalty weight.
pub fn sync_penalty_integral(e_r: &IgParams, m: f64, quad: &QuadratureSpec) -> Result<f64> {
    let breaks = e_r.landmarks();
    let value = integrate_with_breaks(
        |u| {
            let w = 1.0 - u / m;
            e_r.pdf(u) * w * w
        },
        0.0,
        m,
        &breaks,
        quad,
    )?;
    Ok(value.clamp(0.0, 1.0))
}

/// Every term of the upper bound, in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperBoundBreakdown {
    /// `ln(m + μ_N + μ_T)`.
    pub log_term: f64,
    pub unit_term: f64,
    /// `min(g(c*), 0)`, the quantity subtracted in the bound.
    pub g_term: f64,
    /// `g(c*)` itself; subtracting it instead gives [`Self::total_proof_form`].
    pub g_raw: f64,
    pub c_star: f64,
    pub penalty_integral: f64,
    /// `h(N + E_T)`.
    pub sum_entropy: f64,
    pub sum_is_analytic: bool,
    /// `m² / a`.
    pub variance_ratio: f64,
    pub total: f64,
    pub total_proof_form: f64,
}

impl UpperBoundBreakdown {
    fn assemble(
        log_term: f64,
        unit_term: f64,
        g: f64,
        sum_entropy: f64,
        ratio: f64,
        penalty: f64,
    ) -> f64 {
        log_term + unit_term - g - sum_entropy * ratio * penalty
    }

    /// Recomputes `total` from the stored terms.
    pub fn reassemble(&self) -> f64 {
        Self::assemble(
            self.log_term,
            self.unit_term,
            self.g_term,
            self.sum_entropy,
            self.variance_ratio,
            self.penalty_integral,
        )
    }

    /// Total in bits.
    pub fn total_bits(&self) -> f64 {
        self.total / std::f64::consts::LN_2
    }
}

/// Upper bound with default settings.
pub fn upper_bound(t: &Topology, c: &Constraints) -> Result<UpperBoundBreakdown> {
    upper_bound_with(t, c, &BoundSettings::default())
}

pub fn upper_bound_with(
    t: &Topology,
    c: &Constraints,
    settings: &BoundSettings,
) -> Result<UpperBoundBreakdown> {
    let links = t.links_with(settings.lambda_r)?;
    upper_bound_for_links(&links, c, settings)
}

pub fn upper_bound_for_links(
    links: &LinkSet,
    c: &Constraints,
    settings: &BoundSettings,
) -> Result<UpperBoundBreakdown> {
    UpperBoundModel::new(links, settings)?.evaluate(c)
}

/// The constraint-independent parts of the upper bound for one topology.
///
/// Building it tabulates `N + E_T` when needed; [`Self::evaluate`] is then
/// cheap, which suits sweeps over `m` and `a`.
#[derive(Debug, Clone)]
pub struct UpperBoundModel {
    links: LinkSet,
    quad: QuadratureSpec,
    sum_entropy: f64,
    sum_is_analytic: bool,
    g: GTerm,
}

impl UpperBoundModel {
    pub fn new(links: &LinkSet, settings: &BoundSettings) -> Result<Self> {
        let quad = settings.quadrature;
        let (n, e_t) = (&links.info, &links.clock_tx);
        let grid = settings
            .grid
            .unwrap_or_else(|| SumGrid::default_for(n, e_t));
        let sum = sum_distribution_on(n, e_t, &grid, &quad)?;
        Ok(Self {
            links: *links,
            quad,
            sum_entropy: sum.entropy(),
            sum_is_analytic: sum.is_analytic(),
            g: g_of_cstar(n, &quad)?,
        })
    }

    pub fn sum_entropy(&self) -> f64 {
        self.sum_entropy
    }

    pub fn evaluate(&self, c: &Constraints) -> Result<UpperBoundBreakdown> {
        let (n, e_t, e_r) = (&self.links.info, &self.links.clock_tx, &self.links.clock_rx);
        let (m, a) = (c.m(), c.a());
        let penalty_integral = sync_penalty_integral(e_r, m, &self.quad)?;

        let log_term = (m + n.mean() + e_t.mean()).ln();
        let unit_term = 1.0;
        let g_term = self.g.value.min(0.0);
        let variance_ratio = m * m / a;
        let sum_entropy = self.sum_entropy;
        let total = UpperBoundBreakdown::assemble(
            log_term,
            unit_term,
            g_term,
            sum_entropy,
            variance_ratio,
            penalty_integral,
        );
        let total_proof_form = UpperBoundBreakdown::assemble(
            log_term,
            unit_term,
            self.g.value,
            sum_entropy,
            variance_ratio,
            penalty_integral,
        );
        Ok(UpperBoundBreakdown {
            log_term,
            unit_term,
            g_term,
            g_raw: self.g.value,
            c_star: self.g.c_star,
            penalty_integral,
            sum_entropy,
            sum_is_analytic: self.sum_is_analytic,
            variance_ratio,
            total,
            total_proof_form,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ig(mu: f64, lambda: f64) -> IgParams {
        IgParams::new(mu, lambda).unwrap()
    }

    // First grid point where the density reaches 1, scanning at step h.
    fn scan_first_crossing(n: &IgParams, h: f64, upto: f64) -> Option<f64> {
        let mut u = h;
        while u <= upto {
            if n.pdf(u) >= 1.0 {
                return Some(u);
            }
            u += h;
        }
        None
    }

    #[test]
    fn c_star_unit_law() {
        let n = ig(1.0, 1.0);
        let c = c_star(&n);
        let scanned = scan_first_crossing(&n, 1e-5, 1.0).unwrap();
        assert!(
            c <= scanned && scanned - c <= 1e-5,
            "c* {c}, scan {scanned}"
        );
        assert!((c - 0.231_394_873_803_13).abs() < 1e-12);
        assert!((n.pdf(c) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn c_star_zero_when_peak_below_one() {
        let n = ig(3.0, 1.0);
        assert!((n.pdf(n.mode()) - 0.633_755_013_770_777).abs() < 1e-12);
        assert_eq!(c_star(&n), 0.0);
    }

    #[test]
    fn c_star_defining_property_on_grid() {
        for &mu in &[0.05, 0.1, 0.25, 0.5, 1.0, 2.0] {
            for &lambda in &[0.05, 0.3, 1.0, 4.0, 20.0] {
                let n = ig(mu, lambda);
                let c = c_star(&n);
                if c == 0.0 {
                    assert!(n.pdf(n.mode()) < 1.0);
                    continue;
                }
                assert!((n.pdf(c) - 1.0).abs() < 1e-9, "({mu},{lambda})");
                let steps = 2000;
                for k in 0..steps {
                    let u = c * k as f64 / steps as f64;
                    assert!(n.pdf(u) < 1.0);
                }
            }
        }
    }

    #[test]
    fn g_term_cases() {
        let q = QuadratureSpec::default();
        let g = g_of_cstar(&ig(3.0, 1.0), &q).unwrap();
        assert!(g.entropy > 0.0);
        assert_eq!(g.c_star, 0.0);
        assert!((g.tail_entropy - g.entropy).abs() < 1e-6);
        assert_eq!(g.value, 0.0);

        let g = g_of_cstar(&ig(1.0, 1.0), &q).unwrap();
        assert!((g.tail_entropy - 0.839_463_659_790_741_5).abs() < 1e-7);
        assert_eq!(g.value, 0.0);

        let g = g_of_cstar(&ig(0.25, 1.0), &q).unwrap();
        assert!((g.entropy - -0.828_922_467_355_412_2).abs() < 1e-10);
        assert!((g.value - -0.838_185_445_923_715_8).abs() < 1e-7);
    }

    #[test]
    fn penalty_limits_and_monotonicity() {
        let q = QuadratureSpec::default();
        let e_r = ig(0.25, 1.0);
        assert!(sync_penalty_integral(&e_r, 1e-6, &q).unwrap() < 1e-12);
        assert!((sync_penalty_integral(&e_r, 1e6, &q).unwrap() - 1.0).abs() < 1e-5);
        let mut prev = 0.0;
        for k in 1..60 {
            let p = sync_penalty_integral(&e_r, 0.05 * k as f64, &q).unwrap();
            assert!((0.0..=1.0).contains(&p));
            assert!(p >= prev - 1e-12);
            prev = p;
        }
    }

    #[test]
    fn penalty_against_monte_carlo() {
        let q = QuadratureSpec::default();
        let (e_r, m) = (ig(0.25, 1.0), 3.0);
        let exact = sync_penalty_integral(&e_r, m, &q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let e = e_r.sample(&mut rng);
            let w = if e <= m { (1.0 - e / m).powi(2) } else { 0.0 };
            s += w;
            s2 += w * w;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((exact - mean).abs() < 3.0 * se, "{exact} vs {mean} ± {se}");
    }

    #[test]
    fn reference_config_against_term_by_term_oracle() {
        // Frozen from an independent 40-digit assembly of every term.
        let t = Topology::uniform(1.0, 4.0, 4.0, 1.0);
        let b = upper_bound(&t, &Constraints::new(3.0, 18.0).unwrap()).unwrap();
        assert!((b.log_term - 1.252_762_968_495_368).abs() < 1e-15);
        assert!((b.c_star - 0.080_398_665_554_566_05).abs() < 1e-12);
        assert!((b.g_term - -0.838_185_445_923_715_8).abs() < 1e-7);
        assert!((b.penalty_integral - 0.842_013_888_888_839).abs() < 1e-9);
        assert!((b.sum_entropy - -0.402_441_573_608_025_2).abs() < 1e-12);
        assert!((b.total - 3.260_379_111_641_202_4).abs() < 1e-6);
        assert_eq!(b.total, b.reassemble());
        assert!(b.sum_is_analytic);
    }

    #[test]
    fn printed_and_proof_forms_coincide_since_g_is_nonpositive() {
        let b = upper_bound(
            &Topology::uniform(1.0, 2.0, 4.0, 1.0),
            &Constraints::new(3.0, 18.0).unwrap(),
        )
        .unwrap();
        assert!(b.g_raw <= 0.0);
        assert_eq!(b.total, b.total_proof_form);
    }

    #[test]
    fn rejects_zero_drift() {
        let t = Topology::uniform(1.0, 0.0, 4.0, 1.0);
        assert!(upper_bound(&t, &Constraints::new(3.0, 18.0).unwrap()).is_err());
    }
}
