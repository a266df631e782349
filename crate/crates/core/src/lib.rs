//! Optimistic multiplicative weights on zero-sum matrix games.
//!
//! The crate is organised bottom-up: [`games`] holds payoff matrices and
//! equilibria, [`energy`] the log-sum-exp potential and its geometry,
//! [`metrics`] the distances to equilibrium, [`dynamics`] the MWU and OMWU
//! steppers, and [`verify`] the certification routines that check the
//! quantitative convergence inequalities along simulated trajectories.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! `…F64`/`…F32` aliases below name the concrete instantiations. Certification
//! and reporting work in `f64`.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod energy;
pub mod error;
pub mod games;
pub mod linalg;
pub mod metrics;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod verify;

pub use energy::{DualState, JointStrategy};
pub use error::{Error, Result};
pub use games::{Game, GameSpectral, Instance, InstanceFamily, InstanceParams, NashEquilibrium, PayoffMatrix};
pub use metrics::DistanceRecord;
pub use report::CheckReport;
pub use scalar::Scalar;

pub type PayoffMatrixF64 = PayoffMatrix<f64>;
pub type PayoffMatrixF32 = PayoffMatrix<f32>;
pub type JointStrategyF64 = JointStrategy<f64>;
pub type JointStrategyF32 = JointStrategy<f32>;
pub type DualStateF64 = DualState<f64>;
pub type DualStateF32 = DualState<f32>;
pub type GameF64 = Game<f64>;
pub type GameF32 = Game<f32>;
pub type NashEquilibriumF64 = NashEquilibrium<f64>;
pub type NashEquilibriumF32 = NashEquilibrium<f32>;
pub type TrajectoryF64 = dynamics::Trajectory<f64>;
pub type TrajectoryF32 = dynamics::Trajectory<f32>;
