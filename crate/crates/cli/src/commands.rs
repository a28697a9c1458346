use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use hamgen::effham::Order;
use hamgen::integrator::{
    integrate, IntegrateError, IntegratorConfig, Run, State, Stepper, DEFAULT_MAX_ITERATIONS, DOUBLE_EPSILON,
    EXTENDED_EPSILON,
};
use hamgen::lowering::{emit_source, SolverKernel};
use hamgen::modelfile::read_model_file;
use hamgen::operators::ModelSpec;
use hamgen::oracle::{
    build_coupled_model, fit_error_constant, global_error_with, linear_fit, power_law_exponent, running_max,
    AnharmonicSolution,
};
use hamgen::scalar::{bits_for_digits, Extended, Scalar};
use hamgen::symkernel::BigRational;
use rayon::prelude::*;

use crate::args::{CoupledArgs, GenerateArgs, GlobalErrorArgs, Integration, RunArgs, ScanTauArgs};
use crate::table::{fmt_f64, sidecar, Table};
use crate::{CliError, Command, Exact, Precision};

/// Instantiates a generic function for the chosen backend.
macro_rules! with_backend {
    ($prec:expr, $f:ident($($arg:expr),* $(,)?)) => {
        match $prec {
            Precision::Double => $f::<f64>((), $($arg),*),
            Precision::Extended(d) => $f::<Extended>(bits_for_digits(d), $($arg),*),
        }
    };
}

/// Runs one command; human-readable progress goes to `report`.
pub fn execute(command: Command, report: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Generate(a) => generate(&a, report),
        Command::Run(a) => run(&a, report),
        Command::ScanTau(a) => scan_tau(&a, report),
        Command::GlobalError(a) => global_error(&a, report),
        Command::Coupled(a) => coupled(&a, report),
    }
}

fn say(report: &mut dyn Write, line: std::fmt::Arguments) {
    // A closed report stream is not worth failing a computation over.
    let _ = writeln!(report, "{line}");
}

fn ms(d: Duration) -> String {
    format!("{:.3} ms", d.as_secs_f64() * 1e3)
}

fn config<S: Scalar>(
    prec: S::Precision,
    tau: &BigRational,
    order: Order,
    epsilon: Option<f64>,
    params: &[BigRational],
) -> IntegratorConfig<S> {
    let default = if S::epsilon(prec).to_f64() < 1e-18 {
        EXTENDED_EPSILON
    } else {
        DOUBLE_EPSILON
    };
    IntegratorConfig {
        tau: S::from_rational(prec, tau),
        order,
        epsilon: S::from_f64(prec, epsilon.unwrap_or(default)),
        max_iterations: DEFAULT_MAX_ITERATIONS,
        params: params.iter().map(|p| S::from_rational(prec, p)).collect(),
    }
}

fn exact_values(xs: &[Exact]) -> Vec<BigRational> {
    xs.iter().map(|x| x.0.clone()).collect()
}

fn positive(tau: &Exact) -> Result<(), CliError> {
    if tau.0 > BigRational::from_integer(0.into()) {
        Ok(())
    } else {
        Err(CliError::Value {
            what: "tau",
            value: format!("{tau} (must be positive)"),
        })
    }
}

/// Nearest whole number of steps of size `tau` in `horizon`.
fn steps_for(horizon: &Exact, tau: &Exact) -> Result<usize, CliError> {
    positive(tau)?;
    let n = (&horizon.0 / &tau.0).round();
    let bad = || CliError::Value {
        what: "horizon",
        value: horizon.to_string(),
    };
    let n: usize = n.to_integer().try_into().map_err(|_| bad())?;
    if n == 0 {
        return Err(bad());
    }
    Ok(n)
}

fn to_f64(r: &BigRational) -> f64 {
    <f64 as Scalar>::from_rational((), r)
}

fn load(path: &Path) -> Result<ModelSpec, CliError> {
    Ok(read_model_file(path)?)
}

fn max_order(orders: &[Order]) -> Result<Order, CliError> {
    orders
        .iter()
        .copied()
        .max()
        .ok_or_else(|| CliError::Usage("no orders given".into()))
}

fn generate(a: &GenerateArgs, report: &mut dyn Write) -> Result<(), CliError> {
    let model = load(&a.model)?;
    let kernel = SolverKernel::build(&model, a.maxorder)?;
    say(report, format_args!("model {}", model.name()));
    say(
        report,
        format_args!(
            "degrees of freedom {}, parameters {}, maxorder {}",
            kernel.degrees(),
            kernel.n_params(),
            kernel.maxorder()
        ),
    );
    let terms = kernel.terms();
    for (i, v) in terms.v.iter().enumerate() {
        say(report, format_args!("V{:<2} {:>8} nodes", 2 * i, v.node_count()));
    }
    for (k, g) in terms.g.iter().enumerate() {
        say(report, format_args!("G{k:<2} {:>8} nodes", g.node_count()));
    }
    for order in kernel.maxorder().up_to() {
        if let Some(p) = kernel.programs(order) {
            say(
                report,
                format_args!(
                    "order {order}: kick {} push {} move {} instructions",
                    p.kick.instructions().len(),
                    p.push.instructions().len(),
                    p.moves.instructions().len()
                ),
            );
        }
    }
    for (stage, d) in kernel.timings() {
        say(report, format_args!("{stage:<24} {}", ms(*d)));
    }
    if let Some(lang) = &a.emit {
        let src = emit_source(&kernel, lang)?;
        let path = a.out.clone().unwrap_or_else(|| format!("{}.rs", model.name()).into());
        std::fs::write(&path, src).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        say(report, format_args!("wrote {}", path.display()));
    }
    Ok(())
}

fn start_state<S: Scalar>(prec: S::Precision, kernel: &SolverKernel, z: &[Exact]) -> Result<State<S>, CliError> {
    if z.len() != kernel.dim() {
        return Err(CliError::Usage(format!(
            "initial state has {} values, the model needs {}",
            z.len(),
            kernel.dim()
        )));
    }
    Ok(State::at(z.iter().map(|x| S::from_rational(prec, &x.0)).collect(), S::zero(prec)))
}

fn run(a: &RunArgs, report: &mut dyn Write) -> Result<(), CliError> {
    let model = load(&a.model)?;
    let kernel = SolverKernel::build(&model, a.integration.order)?;
    let (table, histogram, elapsed) = with_backend!(a.integration.precision, run_with(&kernel, a))?;
    table.write(&a.out)?;
    let hist_path = sidecar(&a.out, "histogram");
    histogram.write(&hist_path)?;
    let per_step = if a.n_steps > 0 {
        elapsed / a.n_steps as u32
    } else {
        Duration::ZERO
    };
    say(
        report,
        format_args!("{} steps, {} per step; wrote {} and {}", a.n_steps, ms(per_step), a.out.display(), hist_path.display()),
    );
    Ok(())
}

fn run_with<S: Scalar>(prec: S::Precision, kernel: &SolverKernel, a: &RunArgs) -> Result<(Table, Table, Duration), CliError> {
    if a.record_every == 0 {
        return Err(CliError::Usage("--record-every must be at least 1".into()));
    }
    let i = &a.integration;
    let cfg = config::<S>(prec, &i.tau.0, i.order, i.epsilon, &exact_values(&a.params));
    let start = start_state::<S>(prec, kernel, &a.initial_state)?;
    let clock = Instant::now();
    let Run { records, histogram } = integrate(kernel, &start, a.n_steps, &cfg, a.record_every)?;
    let elapsed = clock.elapsed();

    let symbols = kernel.model().symbols();
    let mut table = Table::new(["step", "t"]);
    table
        .header
        .extend(symbols.coords().iter().chain(symbols.momenta()).map(|s| s.name().to_string()));
    table.header.extend(["energy", "energy_error", "iterations"].map(String::from));
    for r in &records {
        let mut row = vec![r.step.to_string(), r.t.to_full_string()];
        row.extend(r.z.iter().map(Scalar::to_full_string));
        row.push(r.energy.to_full_string());
        row.push(r.energy_error.to_full_string());
        row.push(r.iterations.to_string());
        table.push(row);
    }
    let mut hist = Table::new(["iterations", "steps"]);
    for (k, n) in histogram.iter().enumerate() {
        hist.push(vec![k.to_string(), n.to_string()]);
    }
    Ok((table, hist, elapsed))
}

/// Largest `|E(t) − E(0)|` over `n` steps, returned as text and as `f64`.
#[allow(clippy::too_many_arguments)]
fn max_energy_error<S: Scalar>(
    prec: S::Precision,
    kernel: &SolverKernel,
    z0: &[Exact],
    params: &[BigRational],
    order: Order,
    tau: &BigRational,
    epsilon: Option<f64>,
    n: usize,
) -> Result<(String, f64), CliError> {
    let cfg = config::<S>(prec, tau, order, epsilon, params);
    let mut state = start_state::<S>(prec, kernel, z0)?;
    let mut stepper = Stepper::new(kernel, &cfg).map_err(IntegrateError::from)?;
    let e0 = stepper.energy(&state.z)?;
    let mut worst = S::zero(prec);
    for step in 1..=n {
        stepper
            .step(&mut state)
            .map_err(|source| IntegrateError::Step { step, source })?;
        let de = (stepper.energy(&state.z)? - &e0).abs();
        if de > worst {
            worst = de;
        }
    }
    Ok((worst.to_full_string(), worst.to_f64()))
}

/// `log(e1/e2) / log(τ1/τ2)`, when both errors are positive.
fn exponent(prev: Option<(f64, f64)>, tau: f64, err: f64) -> String {
    match prev {
        Some((t1, e1)) if e1 > 0.0 && err > 0.0 => fmt_f64((e1 / err).ln() / (t1 / tau).ln()),
        _ => String::new(),
    }
}

fn scan_tau(a: &ScanTauArgs, report: &mut dyn Write) -> Result<(), CliError> {
    let model = load(&a.model)?;
    let kernel = SolverKernel::build(&model, max_order(&a.orders)?)?;
    let params = exact_values(&a.params);
    let cells: Vec<(Order, &Exact, usize)> = a
        .orders
        .iter()
        .flat_map(|&o| a.taus.iter().map(move |t| (o, t)))
        .map(|(o, t)| Ok((o, t, steps_for(&a.horizon, t)?)))
        .collect::<Result<_, CliError>>()?;

    let clock = Instant::now();
    let results: Vec<(String, f64)> = cells
        .par_iter()
        .map(|&(order, tau, n)| {
            with_backend!(
                a.precision,
                max_energy_error(&kernel, &a.initial_state, &params, order, &tau.0, a.epsilon, n)
            )
        })
        .collect::<Result<_, _>>()?;

    let mut table = Table::new(["order", "tau", "steps", "max_energy_error", "exponent"]);
    let mut prev: Option<(Order, f64, f64)> = None;
    for ((order, tau, n), (text, err)) in cells.iter().zip(&results) {
        let tau = to_f64(&tau.0);
        let last = prev.filter(|p| p.0 == *order).map(|p| (p.1, p.2));
        table.push(vec![order.to_string(), fmt_f64(tau), n.to_string(), text.clone(), exponent(last, tau, *err)]);
        prev = Some((*order, tau, *err));
    }
    table.write(&a.out)?;
    say(report, format_args!("{} cells in {}; wrote {}", cells.len(), ms(clock.elapsed()), a.out.display()));
    Ok(())
}

/// The anharmonic oscillator `H = p²/2 + αq²/2 + q⁴/4`.
pub fn anharmonic_model() -> ModelSpec {
    ModelSpec::parse("anharmonic", &["q"], &["p"], &["alpha"], "alpha*q^2/2 + q^4/4").expect("fixed model is valid")
}

struct ErrorSeries {
    t: Vec<String>,
    err: Vec<String>,
    t_f: Vec<f64>,
    err_f: Vec<f64>,
}

fn anharmonic_errors<S: Scalar>(
    prec: S::Precision,
    kernel: &SolverKernel,
    a: &GlobalErrorArgs,
    order: Order,
    tau: &BigRational,
    n: usize,
) -> Result<ErrorSeries, CliError> {
    let alpha = S::from_rational(prec, &a.alpha.0);
    let q0 = S::from_rational(prec, &a.q0.0);
    let exact = AnharmonicSolution::new(&alpha, &q0)?;
    let cfg = config::<S>(prec, tau, order, a.epsilon, std::slice::from_ref(&a.alpha.0));
    let start = State::at(vec![q0, S::zero(prec)], S::zero(prec));
    let run = integrate(kernel, &start, n, &cfg, a.record_every)?;
    let errors = global_error_with(&run.records, |t| exact.at(t).map(Vec::from))?;
    Ok(series(&run, &errors))
}

fn series<S: Scalar>(run: &Run<S>, errors: &[S]) -> ErrorSeries {
    ErrorSeries {
        t: run.records.iter().map(|r| r.t.to_full_string()).collect(),
        err: errors.iter().map(Scalar::to_full_string).collect(),
        t_f: run.records.iter().map(|r| r.t.to_f64()).collect(),
        err_f: errors.iter().map(Scalar::to_f64).collect(),
    }
}

/// `C_N` and the R² of a straight line through the running maximum.
fn fit_cells(s: &ErrorSeries, tau: f64, order: usize) -> (String, String) {
    let c = fit_error_constant(&s.t_f, &s.err_f, tau, order).map(fmt_f64).unwrap_or_default();
    let r2 = linear_fit(&s.t_f, &running_max(&s.err_f))
        .map(|f| fmt_f64(f.r2))
        .unwrap_or_default();
    (c, r2)
}

fn global_error(a: &GlobalErrorArgs, report: &mut dyn Write) -> Result<(), CliError> {
    if a.record_every == 0 {
        return Err(CliError::Usage("--record-every must be at least 1".into()));
    }
    let kernel = SolverKernel::build(&anharmonic_model(), max_order(&a.orders)?)?;
    let cells: Vec<(Order, &Exact, usize)> = a
        .orders
        .iter()
        .flat_map(|&o| a.taus.iter().map(move |t| (o, t)))
        .map(|(o, t)| Ok((o, t, steps_for(&a.horizon, t)?)))
        .collect::<Result<_, CliError>>()?;

    let clock = Instant::now();
    let results: Vec<ErrorSeries> = cells
        .par_iter()
        .map(|&(order, tau, n)| with_backend!(a.precision, anharmonic_errors(&kernel, a, order, &tau.0, n)))
        .collect::<Result<_, _>>()?;

    let mut table = Table::new(["order", "tau", "t", "error"]);
    let mut fits = Table::new(["order", "tau", "c_n", "envelope_r2", "final_error"]);
    for ((order, tau, _), s) in cells.iter().zip(&results) {
        let tau_text = fmt_f64(to_f64(&tau.0));
        for (t, e) in s.t.iter().zip(&s.err) {
            table.push(vec![order.to_string(), tau_text.clone(), t.clone(), e.clone()]);
        }
        let (c, r2) = fit_cells(s, to_f64(&tau.0), order.get());
        fits.push(vec![order.to_string(), tau_text, c, r2, s.err.last().cloned().unwrap_or_default()]);
    }
    table.write(&a.out)?;
    let fit_path = sidecar(&a.out, "fit");
    fits.write(&fit_path)?;
    say(
        report,
        format_args!("{} cells in {}; wrote {} and {}", cells.len(), ms(clock.elapsed()), a.out.display(), fit_path.display()),
    );
    Ok(())
}

fn coupled(a: &CoupledArgs, report: &mut dyn Write) -> Result<(), CliError> {
    if a.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    if a.record_every == 0 {
        return Err(CliError::Usage("--record-every must be at least 1".into()));
    }
    let i = &a.integration;
    let n_steps = steps_for(&a.horizon, &i.tau)?;
    let cm = build_coupled_model(a.n, a.seed)?;
    let kernel = SolverKernel::build(&cm.model, i.order)?;
    for (stage, d) in kernel.timings() {
        say(report, format_args!("{stage:<24} {}", ms(*d)));
    }
    let clock = Instant::now();
    let (table, s) = with_backend!(i.precision, coupled_with(&kernel, &cm, i, n_steps, a.record_every))?;
    table.write(&a.out)?;

    let later = |xs: &[f64]| xs.iter().zip(&s.t_f).filter(|(_, t)| **t > 0.0).map(|(x, _)| *x).collect::<Vec<_>>();
    let growth = power_law_exponent(&later(&s.t_f), &later(&s.err_f)).ok();
    let c = fit_error_constant(&s.t_f, &s.err_f, to_f64(&i.tau.0), i.order.get()).map(fmt_f64).unwrap_or_default();
    let mut fit = Table::new(["n", "seed", "order", "tau", "c", "growth_exponent", "growth_r2"]);
    fit.push(vec![
        a.n.to_string(),
        a.seed.to_string(),
        i.order.to_string(),
        fmt_f64(to_f64(&i.tau.0)),
        c,
        growth.map(|g| fmt_f64(g.slope)).unwrap_or_default(),
        growth.map(|g| fmt_f64(g.r2)).unwrap_or_default(),
    ]);
    let fit_path = sidecar(&a.out, "fit");
    fit.write(&fit_path)?;
    say(
        report,
        format_args!("{n_steps} steps in {}; wrote {} and {}", ms(clock.elapsed()), a.out.display(), fit_path.display()),
    );
    Ok(())
}

fn coupled_with<S: Scalar>(
    prec: S::Precision,
    kernel: &SolverKernel,
    cm: &hamgen::oracle::CoupledModel,
    i: &Integration,
    n_steps: usize,
    every: usize,
) -> Result<(Table, ErrorSeries), CliError> {
    let amplitudes = cm.amplitudes();
    let cfg = config::<S>(prec, &i.tau.0, i.order, i.epsilon, &[]);
    let start = State::at(cm.initial_state::<S>(&amplitudes, prec), S::zero(prec));
    let run = integrate(kernel, &start, n_steps, &cfg, every)?;
    let errors = global_error_with(&run.records, |t| cm.exact(t, &amplitudes))?;
    let mut table = Table::new(["step", "t", "error", "energy", "energy_error"]);
    for (r, e) in run.records.iter().zip(&errors) {
        table.push(vec![
            r.step.to_string(),
            r.t.to_full_string(),
            e.to_full_string(),
            r.energy.to_full_string(),
            r.energy_error.to_full_string(),
        ]);
    }
    Ok((table, series(&run, &errors)))
}
