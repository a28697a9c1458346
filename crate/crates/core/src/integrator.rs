//! Symplectic kick-move-kick integration with the compiled step programs.
//!
//! One step of size `τ` from `(q, p)`:
//!
//! 1. `p ← p + (τ/2)·kick(q)`
//! 2. solve `P = p − push(q, P)` by fixed-point iteration from `P = p`
//! 3. `q ← q + τP + move(q, P)`, `p ← P`
//! 4. `p ← p + (τ/2)·kick(q)`
//!
//! The iteration count of step 2 is the number of `push` evaluations, so
//! second order always reports 1.

use std::fmt;

use num_rational::BigRational;

use crate::effham::Order;
use crate::lowering::{OrderPrograms, Scratch, SolverKernel};
use crate::scalar::{DomainError, Extended, Scalar};

/// Tolerance of the push solve with `f64`.
pub const DOUBLE_EPSILON: f64 = 1e-12;
/// Tolerance of the push solve with the extended backend.
pub const EXTENDED_EPSILON: f64 = 1e-20;
pub const DEFAULT_MAX_ITERATIONS: usize = 20;

#[derive(Debug, Clone)]
pub struct IntegratorConfig<S: Scalar> {
    pub tau: S,
    pub order: Order,
    pub epsilon: S,
    pub max_iterations: usize,
    pub params: Vec<S>,
}

impl IntegratorConfig<f64> {
    pub fn double(tau: f64, order: Order) -> Self {
        IntegratorConfig {
            tau,
            order,
            epsilon: DOUBLE_EPSILON,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            params: Vec::new(),
        }
    }
}

impl IntegratorConfig<Extended> {
    /// Extended-precision configuration with an exactly converted step.
    pub fn extended(digits: u32, tau: &BigRational, order: Order) -> Self {
        let prec = crate::scalar::bits_for_digits(digits);
        IntegratorConfig {
            tau: Extended::from_rational(prec, tau),
            order,
            epsilon: Extended::from_f64(prec, EXTENDED_EPSILON),
            max_iterations: DEFAULT_MAX_ITERATIONS,
            params: Vec::new(),
        }
    }
}

impl<S: Scalar> IntegratorConfig<S> {
    pub fn with_params(mut self, params: Vec<S>) -> Self {
        self.params = params;
        self
    }

    pub fn with_epsilon(mut self, epsilon: S) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn precision(&self) -> S::Precision {
        self.tau.precision()
    }

    /// Checks the configuration against a kernel. Negative steps are
    /// accepted and integrate backwards in time.
    pub fn validate(&self, kernel: &SolverKernel) -> Result<(), ConfigError> {
        let prec = self.precision();
        if self.tau.is_zero() || !self.tau.is_finite() {
            return Err(ConfigError::Step(self.tau.to_f64()));
        }
        if !(self.epsilon > S::epsilon(prec)) || !self.epsilon.is_finite() {
            return Err(ConfigError::Tolerance(self.epsilon.to_f64()));
        }
        if self.order > kernel.maxorder() {
            return Err(ConfigError::OrderTooHigh {
                order: self.order,
                maxorder: kernel.maxorder(),
            });
        }
        if self.params.len() != kernel.n_params() {
            return Err(ConfigError::Params {
                expected: kernel.n_params(),
                got: self.params.len(),
            });
        }
        if self.max_iterations == 0 {
            return Err(ConfigError::Iterations);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("step size must be finite and nonzero (got {0})")]
    Step(f64),
    #[error("tolerance {0:e} is not above the backend roundoff")]
    Tolerance(f64),
    #[error("order {order} exceeds the kernel's maximum order {maxorder}")]
    OrderTooHigh { order: Order, maxorder: Order },
    #[error("model takes {expected} parameters, {got} given")]
    Params { expected: usize, got: usize },
    #[error("at least one push iteration is required")]
    Iterations,
    #[error("state has {got} components, model needs {expected}")]
    Dimension { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StepError {
    #[error("push iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegrateError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("step {step}: {source}")]
    Step { step: usize, source: StepError },
}

/// A phase-space point `z = [q.., p..]` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State<S> {
    pub z: Vec<S>,
    pub t: S,
}

impl State<f64> {
    pub fn new(z: Vec<f64>) -> Self {
        State { z, t: 0.0 }
    }
}

impl<S: Scalar> State<S> {
    pub fn at(z: Vec<S>, t: S) -> Self {
        State { z, t }
    }

    pub fn q(&self) -> &[S] {
        &self.z[..self.z.len() / 2]
    }

    pub fn p(&self) -> &[S] {
        &self.z[self.z.len() / 2..]
    }
}

/// Reusable stepping state: compiled programs plus all work buffers.
pub struct Stepper<'k, S: Scalar> {
    kernel: &'k SolverKernel,
    programs: &'k OrderPrograms,
    config: IntegratorConfig<S>,
    half_tau: S,
    inputs: Vec<S>,
    kick: (Scratch<S>, Vec<S>),
    push: (Scratch<S>, Vec<S>),
    moves: (Scratch<S>, Vec<S>),
    energy: (Scratch<S>, Vec<S>),
    new_p: Vec<S>,
    residual: S,
    histogram: Vec<u64>,
}

impl<'k, S: Scalar> fmt::Debug for Stepper<'k, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Stepper")
            .field("model", &self.kernel.model().name())
            .field("order", &self.config.order)
            .field("histogram", &self.histogram)
            .finish()
    }
}

impl<'k, S: Scalar> Stepper<'k, S> {
    pub fn new(kernel: &'k SolverKernel, config: &IntegratorConfig<S>) -> Result<Self, ConfigError> {
        config.validate(kernel)?;
        let prec = config.precision();
        let n = kernel.degrees();
        let programs = kernel
            .programs(config.order)
            .expect("validated order is compiled");
        let mut inputs = vec![S::zero(prec); 2 * n];
        inputs.extend(config.params.iter().cloned());
        inputs.push(config.tau.clone());
        let buf = |p: &crate::lowering::EvalProgram| (p.scratch(prec), vec![S::zero(prec); p.n_outputs()]);
        Ok(Stepper {
            kernel,
            programs,
            half_tau: config.tau.clone() / S::from_i64(prec, 2),
            inputs,
            kick: buf(&programs.kick),
            push: buf(&programs.push),
            moves: buf(&programs.moves),
            energy: buf(kernel.energy_program()),
            new_p: vec![S::zero(prec); n],
            residual: S::zero(prec),
            histogram: vec![0; config.max_iterations + 1],
            config: config.clone(),
        })
    }

    pub fn config(&self) -> &IntegratorConfig<S> {
        &self.config
    }

    /// Count of steps by number of push iterations; index `k` holds the
    /// steps that took `k` iterations.
    pub fn histogram(&self) -> &[u64] {
        &self.histogram
    }

    fn check_dim(&self, z: &[S]) -> Result<(), ConfigError> {
        if z.len() != self.kernel.dim() {
            return Err(ConfigError::Dimension {
                expected: self.kernel.dim(),
                got: z.len(),
            });
        }
        Ok(())
    }

    fn half_kick(&mut self, z: &mut [S]) -> Result<(), DomainError> {
        let n = self.kernel.degrees();
        self.inputs[..n].clone_from_slice(&z[..n]);
        let (scratch, out) = &mut self.kick;
        self.programs.kick.run_into(&self.inputs, scratch, out)?;
        for a in 0..n {
            out[a] *= &self.half_tau;
            z[n + a] += &out[a];
        }
        Ok(())
    }

    /// Advances `state` by one step and returns the push iteration count.
    ///
    /// On error `state` may be partially updated. Panics if the state has
    /// the wrong dimension.
    pub fn step(&mut self, state: &mut State<S>) -> Result<usize, StepError> {
        self.check_dim(&state.z).expect("state dimension matches the kernel");
        let n = self.kernel.degrees();
        let z = &mut state.z;

        self.half_kick(z)?;

        self.new_p.clone_from_slice(&z[n..]);
        let mut iterations = 0;
        loop {
            iterations += 1;
            self.inputs[n..2 * n].clone_from_slice(&self.new_p);
            let (scratch, out) = &mut self.push;
            self.programs.push.run_into(&self.inputs, scratch, out)?;
            self.residual.assign_from(&S::zero(self.config.precision()));
            for a in 0..n {
                // out[a] becomes the next iterate p - push
                let next = z[n + a].clone() - &out[a];
                if !next.is_finite() {
                    return Err(DomainError::NonFinite.into());
                }
                let diff = (next.clone() - &self.new_p[a]).abs();
                if diff > self.residual {
                    self.residual = diff;
                }
                self.new_p[a] = next;
            }
            if self.residual <= self.config.epsilon {
                break;
            }
            if iterations >= self.config.max_iterations {
                return Err(StepError::NonConvergence {
                    iterations,
                    residual: self.residual.to_f64(),
                });
            }
        }

        self.inputs[n..2 * n].clone_from_slice(&self.new_p);
        let (scratch, out) = &mut self.moves;
        self.programs.moves.run_into(&self.inputs, scratch, out)?;
        for a in 0..n {
            let step = self.config.tau.clone() * &self.new_p[a];
            z[a] += step;
            z[a] += &out[a];
            z[n + a].assign_from(&self.new_p[a]);
        }

        self.half_kick(z)?;
        if !z.iter().all(Scalar::is_finite) {
            return Err(DomainError::NonFinite.into());
        }
        state.t += &self.config.tau;
        self.histogram[iterations] += 1;
        Ok(iterations)
    }

    /// `H(q, p)` with this stepper's parameters.
    pub fn energy(&mut self, z: &[S]) -> Result<S, DomainError> {
        self.check_dim(z).expect("state dimension matches the kernel");
        let mut x: Vec<S> = z.to_vec();
        x.extend(self.config.params.iter().cloned());
        let (scratch, out) = &mut self.energy;
        self.kernel.energy_program().run_into(&x, scratch, out)?;
        Ok(out[0].clone())
    }
}

/// One step from `state`; returns the new state and the iteration count.
pub fn kimoki_step<S: Scalar>(
    kernel: &SolverKernel,
    state: &State<S>,
    config: &IntegratorConfig<S>,
) -> Result<(State<S>, usize), IntegrateError> {
    let mut stepper = Stepper::new(kernel, config)?;
    stepper.check_dim(&state.z)?;
    let mut next = state.clone();
    let it = stepper
        .step(&mut next)
        .map_err(|source| IntegrateError::Step { step: 1, source })?;
    Ok((next, it))
}

/// `H(q, p)` for a model with parameter values `params`.
pub fn energy<S: Scalar>(kernel: &SolverKernel, z: &[S], params: &[S]) -> Result<S, DomainError> {
    let mut x: Vec<S> = z.to_vec();
    x.extend(params.iter().cloned());
    Ok(crate::lowering::run_program(kernel.energy_program(), &x, z[0].precision())?.remove(0))
}

/// `q1 p2 − q2 p1` for a two-degree-of-freedom state, `None` otherwise.
pub fn angular_momentum<S: Scalar>(z: &[S]) -> Option<S> {
    match z {
        [q1, q2, p1, p2] => Some(q1.clone() * p2 - q2.clone() * p1),
        _ => None,
    }
}

/// One recorded point of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord<S> {
    pub step: usize,
    pub t: S,
    pub z: Vec<S>,
    pub energy: S,
    /// `energy − energy at step 0`
    pub energy_error: S,
    /// Push iterations used by this step (0 for the initial point).
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Run<S> {
    pub records: Vec<RunRecord<S>>,
    pub histogram: Vec<u64>,
}

/// Takes `n_steps` steps from `start`, recording the initial point, every
/// `record_every`-th step and the final step. Time is recomputed as
/// `t0 + k·τ` so it does not drift.
pub fn integrate<S: Scalar>(
    kernel: &SolverKernel,
    start: &State<S>,
    n_steps: usize,
    config: &IntegratorConfig<S>,
    record_every: usize,
) -> Result<Run<S>, IntegrateError> {
    let mut stepper = Stepper::new(kernel, config)?;
    stepper.check_dim(&start.z)?;
    let prec = config.precision();
    let every = record_every.max(1);
    let mut state = start.clone();
    let mut records = Vec::with_capacity(n_steps / every + 2);
    let record = |stepper: &mut Stepper<S>, state: &State<S>, step: usize, iterations: usize, e0: Option<&S>| {
        stepper
            .energy(&state.z)
            .map(|energy| RunRecord {
                step,
                t: state.t.clone(),
                z: state.z.clone(),
                energy_error: match e0 {
                    Some(e0) => energy.clone() - e0,
                    None => S::zero(prec),
                },
                energy,
                iterations,
            })
            .map_err(|e| IntegrateError::Step { step, source: e.into() })
    };
    let first = record(&mut stepper, &state, 0, 0, None)?;
    let e0 = first.energy.clone();
    records.push(first);
    for k in 1..=n_steps {
        let iterations = stepper
            .step(&mut state)
            .map_err(|source| IntegrateError::Step { step: k, source })?;
        state.t = start.t.clone() + config.tau.clone() * S::from_i64(prec, k as i64);
        if k % every == 0 || k == n_steps {
            records.push(record(&mut stepper, &state, k, iterations, Some(&e0))?);
        }
    }
    Ok(Run {
        records,
        histogram: stepper.histogram.clone(),
    })
}
