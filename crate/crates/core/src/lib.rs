//! Explicit high-order symplectic splitting integrators, built symbolically.
//!
//! Given a potential `V(q)` for a Hamiltonian `H = ½|p|² + V(q)`, this crate
//! constructs the effective-Hamiltonian corrections and generating-function
//! coefficients of the kick–move–kick family of integrators (orders 2, 4, 6
//! and 8), compiles the derivative expressions they need into straight-line
//! evaluation programs, and integrates Hamilton's equations with them in
//! double or multiprecision arithmetic.
//!
//! The pipeline, bottom to top:
//!
//! * [`symkernel`]: exact symbolic expressions, parsing, differentiation.
//! * [`operators`]: the differential operators the correction terms are
//!   written in.
//! * [`effham`]: the correction terms and generating-function coefficients.
//! * [`lowering`]: compiled evaluation programs and standalone source
//!   emission.
//! * [`integrator`]: the kick–push–move–kick step and trajectory driver.
//! * [`oracle`]: exact elliptic-function solutions and error metrics.
//! * [`modelfile`]: the plain-text model format.
//!
//! ```
//! use hamgen::prelude::*;
//!
//! let model = ModelSpec::parse("beam", &["q"], &["p"], &[], "-q^2/2 + q^4/4").unwrap();
//! let kernel = SolverKernel::build(&model, Order::EIGHT).unwrap();
//! let config = IntegratorConfig::double(0.1, Order::EIGHT);
//! let mut state = State::new(vec![0.5, 1.25]);
//! let mut stepper = Stepper::new(&kernel, &config).unwrap();
//! stepper.step(&mut state).unwrap();
//! assert!((state.z[0] - 0.62690658).abs() < 1e-6);
//! ```

pub mod effham;
pub mod integrator;
pub mod lowering;
pub mod modelfile;
pub mod operators;
pub mod oracle;
pub mod scalar;
pub mod symkernel;

pub mod prelude {
    pub use crate::effham::{EffectiveTerms, Order};
    pub use crate::integrator::{
        angular_momentum, integrate, kimoki_step, IntegratorConfig, Run, RunRecord, State, Stepper,
    };
    pub use crate::lowering::{compile_program, EvalProgram, Scratch, SolverKernel};
    pub use crate::operators::ModelSpec;
    pub use crate::scalar::{Extended, Func, Scalar};
    pub use crate::symkernel::{parse_expression, Expr, Symbol, SymbolTable};
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/expressions.md")]
    mod expressions {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/effective-terms.md")]
    mod effective_terms {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/integrating.md")]
    mod integrating {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    mod command_line {}
}
