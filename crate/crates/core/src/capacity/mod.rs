//! Variance-constrained capacity bounds.
//!
//! The capacity is `max I(X; Z)` over input delay laws with `E[X] = m` and
//! `m² ≤ E[X²] ≤ a`. [`upper_bound`] evaluates a closed-form bound built from
//! the entropies of the link delays; [`lower_bound`] evaluates the mutual
//! information seen by a receiver that only detects whether the molecule
//! arrived inside its slot, for exponentially distributed input delays.

mod lower;
mod upper;

pub use lower::{lower_bound, BinaryReceiver, LowerBoundResult, EXPONENTIAL_TAIL_MASS};
pub use upper::{
    c_star, g_of_cstar, sync_penalty_integral, upper_bound, upper_bound_for_links,
    upper_bound_with, GTerm, UpperBoundBreakdown, UpperBoundModel,
};

use crate::channel::{LambdaRConvention, SumGrid};
use crate::error::{positive, Error, Result};
use crate::numerics::QuadratureSpec;

/// Input-delay moment constraints `E[X] = m`, `m² ≤ E[X²] ≤ a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraints {
    m: f64,
    a: f64,
}

impl Constraints {
    pub fn new(m: f64, a: f64) -> Result<Self> {
        positive("m", m)?;
        if !a.is_finite() || a < m * m {
            return Err(Error::Constraint { m, a });
        }
        Ok(Self { m, a })
    }

    /// The `a = 2m²` cap met with equality by an exponential input of mean `m`.
    pub fn exponential(m: f64) -> Result<Self> {
        Self::new(m, 2.0 * m * m)
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Smallest peak delay compatible with the moments: `X_peak ≥ E[X²]/E[X] = a/m`.
    pub fn implied_peak_lower(&self) -> f64 {
        self.a / self.m
    }
}

/// Knobs shared by the bound evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundSettings {
    pub lambda_r: LambdaRConvention,
    pub quadrature: QuadratureSpec,
    /// Tabulation grid for `N + E_T`; `None` picks the default for the links.
    pub grid: Option<SumGrid>,
}
