//! Bloch density matrices ⟨x_b|e^{−βH}|x_a⟩ of one-dimensional quantum
//! systems by several independent routes — spectral sums, Crank–Nicolson
//! propagation, Sturm–Liouville Green functions with numerical Laplace
//! inversion, radial-oscillator closed forms, and Feynman–Kac Monte Carlo —
//! plus local-time statistics and low/high-temperature asymptotics.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the common `f64` case.

// `!(x > 0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod bridge;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod laplace;
pub mod physics;
pub mod quadrature;
pub mod radial;
pub mod scalar;
pub mod special;
pub mod spectral;
pub mod sturm;

pub use error::{Error, Result};
pub use scalar::Real;

pub type PhysicalParams = physics::PhysicalParams<f64>;
pub type Potential = physics::Potential<f64>;
pub type System = physics::System<f64>;
pub type GridSpec = physics::GridSpec<f64>;
pub type BlochQuery = physics::BlochQuery<f64>;
pub type DiscreteHamiltonian = spectral::DiscreteHamiltonian<f64>;
pub type SpectralDecomposition = spectral::SpectralDecomposition<f64>;
pub type CauchySolution = sturm::CauchySolution<f64>;
pub type GreenSolver = sturm::GreenSolver<f64>;
pub type MCConfig = bridge::MCConfig<f64>;
pub type MCEstimate = bridge::MCEstimate<f64>;
pub type BridgePath = bridge::BridgePath<f64>;
pub type LocalTimeProfile = bridge::LocalTimeProfile<f64>;
pub type GroundState = asymptotics::GroundState<f64>;
pub type DeterminantResult = asymptotics::DeterminantResult<f64>;
