//! Two-patch competitive Lotka-Volterra system with patch diffusion.
//!
//! The crate is organised bottom-up:
//!
//! * [`coeffs`] quasi-periodic coefficient functions and their bounds,
//! * [`model`] the four-component vector field and its paired (product) copy,
//! * [`integrator`] positivity-preserving RK4 / RKF45 with Hermite dense output,
//! * [`bounds`] dispersal hypotheses and the empirical attracting region,
//! * [`stability`] contraction margins, Lyapunov decay and attractivity runs,
//! * [`almostperiod`] numerical ε-almost-period detection,
//! * [`export`] CSV writers for trajectories, reports and scans.
//!
//! Ensemble integrations and shift scans fan out over rayon when the
//! `parallel` feature is enabled (the default); every reduction is
//! order-independent so results are identical in both modes.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod almostperiod;
pub mod bounds;
pub mod coeffs;
mod error;
pub mod exec;
pub mod export;
pub mod integrator;
pub mod model;
pub mod stability;

pub use almostperiod::{almost_period_scan, defect, AlmostPeriodCandidate, ScanOptions, ScanResult};
pub use bounds::{
    check_dispersal_bound, estimate_ultimate_bounds, Components, DispersalReport, InequalityRecord,
    RegionEstimate, RegionOptions,
};
pub use coeffs::{QuasiPeriodicCoefficient, Term, TrigKind};
pub use error::{Error, Result};
pub use exec::Execution;
pub use integrator::{integrate, integrate_paired, solve, IntegrationOptions, Method, Trajectory, VectorField};
pub use model::{adjoint_rhs, example51, rhs, validate_params, PairedState, State, SystemParams};
pub use stability::{
    attractivity_experiment, check_contraction, lyapunov_value, verify_decay, AttractOptions,
    ConditionReport, ConvergenceReport, DecayOptions, DecayReport, PairConvergence,
};
