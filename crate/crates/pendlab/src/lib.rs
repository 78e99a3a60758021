//! Numerical dynamics of the N-link planar pendulum chain.
//!
//! The crate assembles the exact equations of motion of a chain of point
//! masses on massless rods, integrates them with fixed-step RK4, and compares
//! measured pseudo-periods against the linearized analytic period model with
//! amplitude corrections.
//!
//! Module map:
//! - [`chain`]: chain description, state, kinematics, energies
//! - [`dynamics`]: exact EOM assembly A(theta) thetadd = b and the dense solve
//! - [`linear`]: linearized model, normal frequencies, pseudo-period model
//! - [`integrator`]: RK4 stepping, trajectories, convergence diagnostics
//! - [`period`]: pseudo-period measurement protocol and trial runs
//! - [`campaign`]: seeded experiment campaigns with CSV/JSON artifacts

pub mod campaign;
pub mod chain;
pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod linear;
pub mod period;

pub use chain::{CartesianSample, ChainState, PendulumChain, STANDARD_GRAVITY};
pub use error::{Error, Result};
pub use integrator::{IntegrationConfig, Trajectory};
pub use linear::PeriodModel;
pub use period::TrialReport;
