//! Euler path simulation of a drifted Wiener process up to its first passage.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{substream, SimConfig};
use crate::error::{positive, Error, Result};
use crate::ig::IgParams;

/// Paths still short of the boundary after this many steps are abandoned.
pub const MAX_PATH_STEPS: u64 = 10_000_000;

/// Outcome of a single path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FirstHit {
    Hit(f64),
    /// The path exhausted [`MAX_PATH_STEPS`].
    Truncated,
}

/// One transport link simulated as a Wiener process with drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WienerLink {
    distance: f64,
    velocity: f64,
    sigma2: f64,
}

impl WienerLink {
    pub fn new(distance: f64, velocity: f64, sigma2: f64) -> Result<Self> {
        if velocity.is_nan() || velocity <= 0.0 {
            return Err(Error::NonPositiveDrift { velocity });
        }
        Ok(Self {
            distance: positive("distance", distance)?,
            velocity: positive("velocity", velocity)?,
            sigma2: positive("sigma2", sigma2)?,
        })
    }

    pub fn mean_hit_time(&self) -> f64 {
        self.distance / self.velocity
    }

    /// `(d/v) / 10⁴`.
    pub fn default_dt(&self) -> f64 {
        self.mean_hit_time() / 1e4
    }

    /// Coarsest admissible step, `(d/v) / 10³`.
    pub fn max_dt(&self) -> f64 {
        self.mean_hit_time() / 1e3
    }

    /// Exact law of the first passage time.
    pub fn hitting_law(&self) -> IgParams {
        IgParams::from_link(self.distance, self.velocity, self.sigma2)
            .expect("validated on construction")
    }

    /// Runs one path with step `dt`, without the resolution check.
    ///
    /// Increments are `N(v·dt, σ²·dt)`; the reported time is the end of the
    /// first step at which the position reaches the boundary.
    pub fn first_hit_unchecked<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> FirstHit {
        let drift = self.velocity * dt;
        let scale = (self.sigma2 * dt).sqrt();
        let mut position = 0.0;
        for step in 1..=MAX_PATH_STEPS {
            let z: f64 = rng.sample(StandardNormal);
            position += drift + scale * z;
            if position >= self.distance {
                return FirstHit::Hit(step as f64 * dt);
            }
        }
        FirstHit::Truncated
    }

    pub fn first_hit<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> Result<FirstHit> {
        self.check_dt(dt)?;
        Ok(self.first_hit_unchecked(dt, rng))
    }

    fn check_dt(&self, dt: f64) -> Result<()> {
        positive("wiener_dt", dt)?;
        let limit = self.max_dt();
        if dt > limit {
            return Err(Error::StepTooCoarse { dt, limit });
        }
        Ok(())
    }
}

/// Single first-passage time of a drifted Wiener process.
pub fn wiener_first_hit<R: Rng + ?Sized>(
    distance: f64,
    velocity: f64,
    sigma2: f64,
    dt: f64,
    rng: &mut R,
) -> Result<FirstHit> {
    WienerLink::new(distance, velocity, sigma2)?.first_hit(dt, rng)
}

/// Hitting times of `cfg.n_samples` independent paths.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstHitBatch {
    pub times: Vec<f64>,
    pub truncated: usize,
}

impl FirstHitBatch {
    pub fn truncation_fraction(&self) -> f64 {
        let total = self.times.len() + self.truncated;
        if total == 0 {
            0.0
        } else {
            self.truncated as f64 / total as f64
        }
    }
}

/// Simulates `cfg.n_samples` paths with `cfg.wiener_dt` (or the link default).
pub fn simulate_first_hits(link: &WienerLink, cfg: &SimConfig) -> Result<FirstHitBatch> {
    let dt = cfg.wiener_dt.unwrap_or_else(|| link.default_dt());
    link.check_dt(dt)?;
    Ok(simulate_first_hits_unchecked(link, dt, cfg))
}

/// [`simulate_first_hits`] without the step-size resolution check.
pub fn simulate_first_hits_unchecked(link: &WienerLink, dt: f64, cfg: &SimConfig) -> FirstHitBatch {
    let outcomes: Vec<FirstHit> = (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| link.first_hit_unchecked(dt, &mut substream(cfg.seed, i as u64)))
        .collect();
    let mut times = Vec::with_capacity(outcomes.len());
    let mut truncated = 0;
    for o in outcomes {
        match o {
            FirstHit::Hit(t) => times.push(t),
            FirstHit::Truncated => truncated += 1,
        }
    }
    FirstHitBatch { times, truncated }
}
