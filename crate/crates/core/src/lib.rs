//! Threshold-safe staging of a fixed load into a leaky reservoir.
//!
//! A reservoir level `A` decays at rate `rho` and jumps at each release. Its
//! growth pressure `g(A) = (beta - mu) + (delta - beta) A` turns positive above
//! the critical level `delta_c = (mu - beta) / (delta - beta)`. The crate
//! provides:
//!
//! - [`model`]: parameters, derived constants and threshold geometry;
//! - [`exposure`]: single-release threshold exposure with derivatives and
//!   quadrature cross-checks;
//! - [`allocation`]: complete-relaxation splitting and the fixed-overhead stage count;
//! - [`recovery`]: finite-recovery peak plans, safe counts and horizon capacity;
//! - [`envelope`]: impulsive simulation of the scalar envelope and of the full
//!   nonlinear system;
//! - [`phase`]: dimensionless phase-diagram tables.
//!
//! Sweeps run on rayon when the `parallel` feature is enabled (the default);
//! see [`Execution`].

pub mod allocation;
pub mod envelope;
pub mod error;
pub mod exposure;
pub mod model;
pub mod par;
pub mod phase;
pub mod quadrature;
pub mod recovery;

pub use error::{Error, Result};
pub use model::{DerivedConstants, DimensionlessPoint, ModelParams};
pub use par::Execution;
