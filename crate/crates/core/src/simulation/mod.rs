//! Monte Carlo oracles for the channel and its bounds.
//!
//! Every sample `i` draws from its own ChaCha8 stream, selected by `(seed, i)`,
//! so results are bit-identical regardless of how work is split across threads.

mod ks;
mod wiener;

pub use ks::ks_statistic;
pub use wiener::{
    simulate_first_hits, simulate_first_hits_unchecked, wiener_first_hit, FirstHit, FirstHitBatch,
    WienerLink, MAX_PATH_STEPS,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::capacity::{BinaryReceiver, BoundSettings};
use crate::channel::LinkSet;
use crate::error::{positive, Error, Result};
use crate::ig::IgParams;
use crate::numerics::binary_entropy;

/// Generator behind every simulation.
pub type SimRng = ChaCha8Rng;

/// Independent stream number `index` under `seed`.
pub fn substream(seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Sample count, seed and path-simulation step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n_samples: usize,
    pub seed: u64,
    /// `None` selects `(d/v)/10⁴` for each simulated link.
    pub wiener_dt: Option<f64>,
}

impl SimConfig {
    pub fn new(n_samples: usize, seed: u64) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::InvalidParameter {
                name: "n_samples",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        Ok(Self {
            n_samples,
            seed,
            wiener_dt: None,
        })
    }

    pub fn with_wiener_dt(mut self, dt: f64) -> Result<Self> {
        self.wiener_dt = Some(positive("wiener_dt", dt)?);
        Ok(self)
    }
}

/// Law of the transmitted delay `X`.
pub trait InputLaw: Sync {
    fn sample(&self, rng: &mut SimRng) -> f64;
}

/// Exponential delays with the given mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialInput {
    mean: f64,
}

impl ExponentialInput {
    pub fn new(mean: f64) -> Result<Self> {
        Ok(Self {
            mean: positive("m", mean)?,
        })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }
}

impl InputLaw for ExponentialInput {
    fn sample(&self, rng: &mut SimRng) -> f64 {
        let e: f64 = rng.sample(Exp1);
        self.mean * e
    }
}

/// A deterministic delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedInput(pub f64);

impl InputLaw for FixedInput {
    fn sample(&self, _rng: &mut SimRng) -> f64 {
        self.0
    }
}

/// One channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSample {
    pub x: f64,
    pub e_t: f64,
    pub e_r: f64,
    pub n: f64,
    /// `x + e_t + n − e_r`, negative when the molecule beats the receiver's clock.
    pub y: f64,
    /// `max(y, 0)`.
    pub z: f64,
    /// `1` iff `z > 0`.
    pub b: u8,
}

impl ChannelSample {
    fn draw<L: InputLaw + ?Sized>(links: &LinkSet, law: &L, rng: &mut SimRng) -> Self {
        let x = law.sample(rng);
        let e_t = links.clock_tx.sample(rng);
        let e_r = links.clock_rx.sample(rng);
        let n = links.info.sample(rng);
        let y = x + e_t + n - e_r;
        let z = y.max(0.0);
        Self {
            x,
            e_t,
            e_r,
            n,
            y,
            z,
            b: u8::from(z > 0.0),
        }
    }
}

/// `cfg.n_samples` independent channel uses.
pub fn simulate_channel<L: InputLaw + ?Sized>(
    links: &LinkSet,
    law: &L,
    cfg: &SimConfig,
) -> Vec<ChannelSample> {
    (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| ChannelSample::draw(links, law, &mut substream(cfg.seed, i as u64)))
        .collect()
}

/// `Pr(Z = 0 | X = x, E_T = e_t, E_R = e_r) = Pr(N < e_r − x − e_t)`.
pub fn conditional_atom_mass(x: f64, e_t: f64, e_r: f64, n: &IgParams) -> f64 {
    n.cdf(e_r - x - e_t)
}

/// Frequency of `Z = 0` with `(x, e_t, e_r)` held fixed and only `N` resampled.
pub fn grouped_atom_frequency(x: f64, e_t: f64, e_r: f64, n: &IgParams, cfg: &SimConfig) -> f64 {
    let zeros = (0..cfg.n_samples)
        .into_par_iter()
        .filter(|&i| {
            let draw = n.sample(&mut substream(cfg.seed, i as u64));
            x + e_t + draw - e_r <= 0.0
        })
        .count();
    zeros as f64 / cfg.n_samples as f64
}

/// Monte Carlo estimate of the binary-receiver mutual information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    /// Empirical `Pr(B = 0)`.
    pub p_zero: f64,
    pub h_b: f64,
    pub h_b_given_x: f64,
    pub value: f64,
    /// Delta-method standard error of `value`.
    pub std_error: f64,
    pub n_samples: usize,
}

/// Grid size above which the conditional zero probability is interpolated
/// rather than integrated once per sample.
pub const CONDITIONAL_GRID_POINTS: usize = 4097;

// `F_{Y|X=x}(0)` on a uniform grid over `[0, hi]`, read back by cubic Lagrange
// interpolation; the function is smooth in `x`, so the error is O(step⁴).
struct ConditionalTable {
    step: f64,
    values: Vec<f64>,
}

impl ConditionalTable {
    fn build(receiver: &BinaryReceiver, hi: f64) -> Result<Self> {
        let step = hi / (CONDITIONAL_GRID_POINTS - 1) as f64;
        let values = (0..CONDITIONAL_GRID_POINTS)
            .into_par_iter()
            .map(|k| receiver.zero_prob_given(k as f64 * step))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self { step, values })
    }

    fn eval(&self, x: f64) -> f64 {
        let last = self.values.len() - 1;
        let pos = x / self.step;
        let base = (pos.floor() as usize).saturating_sub(1).min(last - 3);
        let mut value = 0.0;
        for i in 0..4 {
            let mut weight = 1.0;
            for j in 0..4 {
                if i != j {
                    weight *= (pos - (base + j) as f64) / (i as f64 - j as f64);
                }
            }
            value += weight * self.values[base + i];
        }
        value.clamp(0.0, 1.0)
    }
}

/// Estimates `I(X; B)` for an exponential input with mean `m`.
///
/// `h(B)` comes from the empirical frequency of `B = 0`; `h(B|X)` averages
/// the binary entropy of the conditional `F_{Y|X=x}(0)` over the sampled
/// inputs. Past [`CONDITIONAL_GRID_POINTS`] samples the conditional is
/// interpolated from a grid instead of integrated per sample.
pub fn empirical_binary_mi(
    links: &LinkSet,
    m: f64,
    cfg: &SimConfig,
    settings: &BoundSettings,
) -> Result<MiEstimate> {
    let law = ExponentialInput::new(m)?;
    let receiver = BinaryReceiver::new(links, settings)?;
    let samples = simulate_channel(links, &law, cfg);
    let n = samples.len() as f64;

    let conditional: Vec<f64> = if samples.len() > CONDITIONAL_GRID_POINTS {
        let hi = samples.iter().map(|s| s.x).fold(0.0, f64::max);
        let table = ConditionalTable::build(&receiver, hi)?;
        samples
            .par_iter()
            .map(|s| binary_entropy(table.eval(s.x)))
            .collect::<Result<_>>()?
    } else {
        samples
            .par_iter()
            .map(|s| receiver.zero_prob_given(s.x).and_then(binary_entropy))
            .collect::<Result<_>>()?
    };

    let zeros = samples.iter().filter(|s| s.b == 0).count();
    let p_zero = zeros as f64 / n;
    let h_b = binary_entropy(p_zero)?;
    let h_b_given_x = conditional.iter().sum::<f64>() / n;

    // Influence of each sample on h(p̂) − mean(h_i).
    let slope = if zeros == 0 || zeros == samples.len() {
        0.0
    } else {
        ((1.0 - p_zero) / p_zero).ln()
    };
    let var = samples
        .iter()
        .zip(&conditional)
        .map(|(s, h)| {
            let indicator = if s.b == 0 { 1.0 } else { 0.0 };
            let psi = slope * (indicator - p_zero) - (h - h_b_given_x);
            psi * psi
        })
        .sum::<f64>()
        / (n - 1.0).max(1.0);

    Ok(MiEstimate {
        p_zero,
        h_b,
        h_b_given_x,
        value: h_b - h_b_given_x,
        std_error: (var / n).sqrt(),
        n_samples: samples.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Topology;

    fn common_drift_links(v: f64) -> LinkSet {
        Topology::uniform(1.0, v, v, 1.0).links().unwrap()
    }

    #[test]
    fn samples_respect_channel_definition() {
        let links = common_drift_links(2.0);
        let cfg = SimConfig::new(5_000, 9).unwrap();
        for s in simulate_channel(&links, &ExponentialInput::new(0.5).unwrap(), &cfg) {
            assert!(s.z >= 0.0 && s.z == s.y.max(0.0));
            assert_eq!(s.b == 1, s.z > 0.0);
            assert!(s.e_t > 0.0 && s.e_r > 0.0 && s.n > 0.0);
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let links = common_drift_links(3.0);
        let cfg = SimConfig::new(2_000, 77).unwrap();
        let law = ExponentialInput::new(0.3).unwrap();
        let a = simulate_channel(&links, &law, &cfg);
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| simulate_channel(&links, &law, &cfg));
        assert_eq!(a, b);
    }

    #[test]
    fn huge_input_delay_never_lands_before_slot() {
        let links = common_drift_links(5.0);
        let cfg = SimConfig::new(100_000, 1).unwrap();
        let samples = simulate_channel(&links, &FixedInput(1e6), &cfg);
        let zeros = samples.iter().filter(|s| s.b == 0).count() as f64;
        assert!(zeros / 1e5 < 1e-4);
    }

    #[test]
    fn atom_mass_cases() {
        let n = IgParams::new(1.0, 1.0).unwrap();
        assert_eq!(conditional_atom_mass(0.5, 0.5, 1.0, &n), 0.0);
        assert_eq!(conditional_atom_mass(1.0, 0.5, 0.2, &n), 0.0);
        assert!((conditional_atom_mass(0.0, 0.0, 1.0, &n) - 0.668_102_001_223_170_6).abs() < 1e-13);
        let mut prev = 0.0;
        for k in 0..100 {
            let p = conditional_atom_mass(0.2, 0.1, 0.05 * k as f64, &n);
            assert!(p >= prev);
            prev = p;
        }
    }

    #[test]
    fn mean_of_z_below_exponential_reference() {
        let links = common_drift_links(2.0);
        let m = 0.5;
        let cfg = SimConfig::new(100_000, 5).unwrap();
        let samples = simulate_channel(&links, &ExponentialInput::new(m).unwrap(), &cfg);
        let n = samples.len() as f64;
        let mean = samples.iter().map(|s| s.z).sum::<f64>() / n;
        let var = samples.iter().map(|s| (s.z - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let reference = m + links.info.mean() + links.clock_tx.mean();
        assert!(mean <= reference + 3.0 * (var / n).sqrt());
    }

    #[test]
    fn interpolated_conditional_matches_direct_evaluation() {
        let links = common_drift_links(5.0);
        let receiver = BinaryReceiver::new(&links, &BoundSettings::default()).unwrap();
        let table = ConditionalTable::build(&receiver, 1.5).unwrap();
        for k in 0..=300 {
            let x = 0.005 * k as f64;
            let direct = receiver.zero_prob_given(x).unwrap();
            assert!((table.eval(x) - direct).abs() < 1e-9, "x = {x}");
        }
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(0, 1).is_err());
        assert!(SimConfig::new(1, 1).unwrap().with_wiener_dt(0.0).is_err());
    }
}
