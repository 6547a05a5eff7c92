//! Finite-time Lyapunov stabilization of ladder n-level quantum systems.
//!
//! A ladder system couples each level only to its neighbours through the
//! control Hamiltonians `H_p = i X_p`. This crate builds those systems,
//! evaluates the fractional-power feedback law together with the standard
//! and bang-bang Lyapunov laws it is compared against, integrates the closed
//! loop with fixed-step RK4, and measures convergence times against the
//! analytic finite-time bounds.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases at the crate root are what most callers want.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod control;
pub mod diagnostics;
mod error;
pub mod propagation;
pub mod scalar;
pub mod state;
pub mod system;

pub use analysis::{
    bound_simulation_form, bound_theorem_form, detect_convergence, lemma1_check,
    ConvergenceCriteria, ConvergenceReport, Lemma1Outcome,
};
pub use control::{
    control, lyapunov_rate_general, lyapunov_rate_ladder, ConstantControl, ControlVector,
    ControllerKind, ControllerParams, FeedbackLaw, OpenLoop,
};
pub use error::{Error, Result};
pub use propagation::{
    integrate_polar, rhs, rhs_polar, simulate, step, IntegratorConfig, Sample, StepOutcome,
    Trajectory,
};
pub use scalar::Scalar;
pub use state::{
    from_polar, lyapunov_value, relative_phase, to_polar, wrap_phase, ComplexState, PolarState,
    TargetState,
};
pub use system::{build_ladder, hermiticity_check, LadderSystem, Matrix};

pub use num_complex::Complex;

pub type ComplexState64 = ComplexState<f64>;
pub type PolarState64 = PolarState<f64>;
pub type LadderSystem64 = LadderSystem<f64>;
pub type ControllerParams64 = ControllerParams<f64>;
pub type ControlVector64 = ControlVector<f64>;
pub type IntegratorConfig64 = IntegratorConfig<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type ConvergenceReport64 = ConvergenceReport<f64>;

pub type ComplexState32 = ComplexState<f32>;
pub type PolarState32 = PolarState<f32>;
pub type LadderSystem32 = LadderSystem<f32>;
pub type ControllerParams32 = ControllerParams<f32>;
pub type IntegratorConfig32 = IntegratorConfig<f32>;
pub type Trajectory32 = Trajectory<f32>;
