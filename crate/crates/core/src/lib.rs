//! Kinematical invariance groups of the free particle and of generalized
//! driven harmonic oscillators: parameter systems, oscillator states, Green
//! functions, group transformations and numerical verification.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision case.

pub mod characteristic;
pub mod coefficients;
pub mod error;
pub mod expr;
pub mod format;
pub mod kernel;
pub mod ode;
pub mod quad;
pub mod scalar;
pub mod scenario;
pub mod states;
mod stencil;
pub mod transforms;
pub mod verify;

pub use characteristic::{solve_characteristic, CharacteristicData};
pub use coefficients::{CoefficientSet, Preset, Regime};
pub use error::{Error, Result};
pub use expr::Expr;
pub use kernel::{
    closed_form_params, ermakov_general, general_solution, riccati_general, system_residual, ClosedFormCase,
    FundamentalPoint, FundamentalSolution, KernelParameters,
};
pub use scalar::Real;
pub use scenario::Scenario;
pub use states::{green_function, hermite, oscillator_state, propagate, Grid, GridState};
pub use transforms::{compose, invert, Context, TransformElement};
pub use verify::{pde_residual, run_suite, Report, SpaceTimeBlock};

pub type CoefficientSet64 = CoefficientSet<f64>;
pub type CoefficientSet32 = CoefficientSet<f32>;
pub type CharacteristicData64 = CharacteristicData<f64>;
pub type CharacteristicData32 = CharacteristicData<f32>;
pub type FundamentalSolution64 = FundamentalSolution<f64>;
pub type FundamentalSolution32 = FundamentalSolution<f32>;
pub type KernelParameters64 = KernelParameters<f64>;
pub type KernelParameters32 = KernelParameters<f32>;
pub type GridState64 = GridState<f64>;
pub type GridState32 = GridState<f32>;
pub type TransformElement64 = TransformElement<f64>;
pub type TransformElement32 = TransformElement<f32>;
