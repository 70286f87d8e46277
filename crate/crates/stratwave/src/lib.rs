//! Two-dimensional rotating, uniformly stratified internal-wave model.
//!
//! The crate provides:
//!
//! - a pseudo-spectral substrate on the doubly periodic torus
//!   ([`grid`], [`spectral`]);
//! - the model equations in stream-function/vorticity form with an RK4
//!   integrator ([`model`]);
//! - closed-form solution families with analytic derivatives, used as
//!   oracles ([`exact`]);
//! - the adjoint system and its reduction to the original equations
//!   ([`adjoint`]);
//! - conserved vectors with pointwise divergence identities and drift
//!   tracking ([`conservation`]);
//! - weak variational-derivative probes for divergence/triviality
//!   verdicts ([`variational`]);
//! - the model's point symmetries and their characteristics
//!   ([`symmetry`]);
//! - seeded verification suites ([`verify`]) and a binary snapshot format
//!   ([`snapshot`]).

pub mod adjoint;
pub mod conservation;
pub mod error;
pub mod exact;
pub mod grid;
pub mod model;
pub mod params;
pub mod rng;
pub mod snapshot;
pub mod spectral;
pub mod symmetry;
pub mod variational;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{Grid2D, ScalarField};
pub use model::{FieldState, Tendencies, Trajectory};
pub use params::PhysicalParams;
