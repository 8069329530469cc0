//! Inverse Gaussian law of the first time a drifted Wiener process reaches a
//! fixed level.
//!
//! A molecule released at distance `d` from an absorbing boundary, drifting
//! at velocity `v` with diffusion variance `σ²` per unit time, is absorbed at
//! a time distributed as `IG(μ = d / v, λ = d² / σ²)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{positive, Error, Result};
use crate::numerics::{erfcx, exp_scaled_e1, std_normal_cdf};

/// Relative tolerance on `λ/μ²` under which two laws are treated as summable.
pub const ADDITIVITY_RTOL: f64 = 1e-9;

/// Mean `mu` and shape `lambda` of an inverse Gaussian law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IgParams {
    mu: f64,
    lambda: f64,
}

impl IgParams {
    pub fn new(mu: f64, lambda: f64) -> Result<Self> {
        Ok(Self {
            mu: positive("mu", mu)?,
            lambda: positive("lambda", lambda)?,
        })
    }

    /// Hitting-time law of a link of the given length, drift and diffusion variance.
    pub fn from_link(distance: f64, velocity: f64, sigma2: f64) -> Result<Self> {
        positive("distance", distance)?;
        positive("sigma2", sigma2)?;
        if velocity.is_nan() || velocity <= 0.0 {
            return Err(Error::NonPositiveDrift { velocity });
        }
        positive("velocity", velocity)?;
        Self::new(distance / velocity, distance * distance / sigma2)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mean(&self) -> f64 {
        self.mu
    }

    pub fn variance(&self) -> f64 {
        self.mu.powi(3) / self.lambda
    }

    /// `λ/μ²`, which equals `v²/σ²` for a physical link; laws sharing it add.
    pub fn shape_ratio(&self) -> f64 {
        self.lambda / (self.mu * self.mu)
    }

    /// Location of the density maximum.
    pub fn mode(&self) -> f64 {
        let k = 1.5 * self.mu / self.lambda;
        // μ(√(1 + k²) − k), rewritten to avoid cancellation when k is large.
        self.mu / ((1.0 + k * k).sqrt() + k)
    }

    /// Break points that bracket the bulk of the density on every scale.
    ///
    /// Gauss nodes never touch panel edges, so a narrow peak needs points on
    /// both of its sides, and a long range needs points out into the tail.
    pub fn landmarks(&self) -> Vec<f64> {
        let (mode, mean) = (self.mode(), self.mean());
        let sd = self.variance().sqrt();
        let width = sd.min(mode);
        let mut points = vec![0.25 * mode, mode - width, mode, mode + width, mean];
        points.extend([1.0, 3.0, 10.0, 30.0].map(|k| mean + k * sd));
        points.retain(|&p| p > 0.0);
        points.sort_by(f64::total_cmp);
        points.dedup();
        points
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let (mu, lambda) = (self.mu, self.lambda);
        0.5 * (lambda / (2.0 * PI)).ln()
            - 1.5 * x.ln()
            - lambda * (x - mu) * (x - mu) / (2.0 * mu * mu * x)
    }

    /// Density; zero off the positive half-line.
    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            self.ln_pdf(x).exp()
        }
    }

    /// Closed-form distribution function.
    ///
    /// The second term `e^{2λ/μ} Φ(−b)` is evaluated as
    /// `½ erfcx(b/√2) exp(−λ(x−μ)²/(2μ²x))`, which stays finite for any shape.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let (mu, lambda) = (self.mu, self.lambda);
        let root = (lambda / x).sqrt();
        let a = root * (x / mu - 1.0);
        let b = root * (x / mu + 1.0);
        let gauss_exponent = -lambda * (x - mu) * (x - mu) / (2.0 * mu * mu * x);
        let reflected = 0.5 * erfcx(b * FRAC_1_SQRT_2) * gauss_exponent.exp();
        (std_normal_cdf(a) + reflected).min(1.0)
    }

    /// Differential entropy in nats:
    /// `½ ln(2πμ³/λ) + (3/2) e^{2λ/μ} Ei(−2λ/μ) + ½`.
    pub fn entropy(&self) -> f64 {
        let (mu, lambda) = (self.mu, self.lambda);
        let scaled = exp_scaled_e1(2.0 * lambda / mu).expect("2λ/μ is positive for valid params");
        0.5 * (2.0 * PI * mu.powi(3) / lambda).ln() - 1.5 * scaled + 0.5
    }

    /// Exact transformation sampler (one normal and one uniform variate).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mu = self.mu;
        let z: f64 = rng.sample(StandardNormal);
        let r = mu * z * z / (2.0 * self.lambda);
        // Smaller root of the quadratic, μ(1 + r − √(r² + 2r)), in cancellation-free form.
        let x = mu / (1.0 + r + (r * (2.0 + r)).sqrt());
        let u: f64 = rng.random();
        if u * (mu + x) <= mu {
            x
        } else {
            mu * mu / x
        }
    }

    /// Law of the sum of independent `self` and `other`, when it is inverse Gaussian.
    ///
    /// That holds when `λ/μ²` agrees (to [`ADDITIVITY_RTOL`]); the sum is then
    /// `IG(μ₁+μ₂, (λ/μ²)(μ₁+μ₂)²)`.
    pub fn sum(&self, other: &IgParams) -> Option<IgParams> {
        let (r1, r2) = (self.shape_ratio(), other.shape_ratio());
        if (r1 - r2).abs() > ADDITIVITY_RTOL * r1.max(r2) {
            return None;
        }
        let ratio = 0.5 * (r1 + r2);
        let mu = self.mu + other.mu;
        IgParams::new(mu, ratio * mu * mu).ok()
    }
}
