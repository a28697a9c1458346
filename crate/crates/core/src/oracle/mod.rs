//! Closed-form reference solutions and error metrics.
//!
//! The anharmonic oscillator `V = αq²/2 + q⁴/4` started at rest has an exact
//! solution in Jacobi elliptic functions; [`build_coupled_model`] mixes
//! several such oscillators through a rational rotation to get a coupled
//! system with a known solution.

mod anharmonic;
mod coupled;
mod elliptic;
mod metrics;

pub use anharmonic::{exact_anharmonic, AnharmonicSolution, Branch};
pub use coupled::{build_coupled_model, exact_coupled, CoupledModel};
pub use elliptic::{jacobi_elliptic, EllipticTriple};
pub use metrics::{
    fit_error_constant, global_error, global_error_with, linear_fit, power_law_exponent, running_max, LinearFit,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("elliptic modulus must lie in [0, 1), got {0}")]
    Modulus(f64),
    #[error("α = {alpha}, q0 = {q0} lies on the separatrix")]
    Separatrix { alpha: f64, q0: f64 },
    #[error("α = {alpha}, q0 = {q0} does not give a bounded oscillation from rest")]
    Unbounded { alpha: f64, q0: f64 },
    #[error("time grids differ: {0}")]
    GridMismatch(String),
    #[error("expected {expected} components, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("cannot fit: {0}")]
    Fit(&'static str),
    #[error("non-finite argument")]
    NonFinite,
}
