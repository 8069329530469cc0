//! Capacity bounds for the molecular timing channel with synchronization error.
//!
//! A global clock releases synchronization molecules toward the transmitter
//! and the receiver; their random arrival delays `E_T` and `E_R` start the two
//! parties' time slots. The transmitter encodes a message as a release delay
//! `X`, the information molecule travels for a random time `N`, and the
//! receiver observes `Z = max(X + E_T + N − E_R, 0)`. All three delays are
//! inverse Gaussian first-hitting times of drifted Wiener processes.
//!
//! The crate provides
//! - [`numerics`]: normal cdf, exponential integral, quadrature, bisection;
//! - [`ig`]: the inverse Gaussian law, its entropy and an exact sampler;
//! - [`channel`]: topology → link laws, and the law of `N + E_T`;
//! - [`capacity`]: the variance-constrained upper bound and the
//!   binary-receiver lower bound;
//! - [`simulation`]: Monte Carlo oracles for all of the above.

pub mod capacity;
pub mod channel;
pub mod error;
pub mod ig;
pub mod numerics;
pub mod simulation;

pub use capacity::{
    lower_bound, upper_bound, BinaryReceiver, BoundSettings, Constraints, LowerBoundResult,
    UpperBoundBreakdown, UpperBoundModel,
};
pub use channel::{LambdaRConvention, LinkSet, SumDist, SumGrid, Topology};
pub use error::{Error, Result};
pub use ig::IgParams;
pub use numerics::QuadratureSpec;
pub use simulation::{ChannelSample, SimConfig};
