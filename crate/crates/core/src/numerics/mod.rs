//! Special functions, adaptive quadrature and bracketing root finding.
//!
//! Everything here is a pure function of its arguments.

mod quadrature;
mod roots;
mod special;

pub use quadrature::{integrate, integrate_with_breaks, QuadratureSpec};
pub use roots::bisect_root;
pub use special::{
    binary_entropy, erfcx, exp_integral_e1, exp_scaled_e1, std_normal_cdf, xlogx, EULER_GAMMA,
};
