//! Turning symbolic terms into fast numeric code.
//!
//! [`compile_program`] flattens a list of expressions into a straight-line
//! [`EvalProgram`] with shared subexpressions, which runs on any
//! [`Scalar`](crate::scalar::Scalar) backend. [`SolverKernel`] bundles the
//! programs an integrator needs, and [`emit_source`] writes them out as a
//! standalone source file.

mod emit;
mod kernel;
mod program;

pub use emit::{emit_source, EmitError};
pub use kernel::{KernelOptions, OrderPrograms, SolverKernel};
pub use program::{compile_program, run_program, CompileError, EvalProgram, Instr, Scratch};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effham::Order;
    use crate::operators::ModelSpec;
    use crate::symkernel::{evaluate, parse_expression, Expr, Symbol};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn beam() -> ModelSpec {
        ModelSpec::parse("beam", &["q"], &["p"], &[], "-q^2/2 + q^4/4").unwrap()
    }

    #[test]
    fn program_matches_direct_evaluation_exactly() {
        let m = ModelSpec::parse("m", &["x", "y"], &["px", "py"], &["a"], "a*x^2 + y").unwrap();
        let exprs: Vec<Expr> = [
            "x^2*y - 3/7*x*y^3 + sin(x)^2",
            "(x + y)^-2 * x / 5",
            "-(1 + x*y)",
            "sqrt(1 + x^2) + exp(-y) + a*log(2 + cos(y))",
            "0",
            "x",
        ]
        .iter()
        .map(|s| parse_expression(s, m.symbols()).unwrap())
        .collect();
        let inputs: Vec<Symbol> = ["x", "y", "a"].iter().map(|s| Symbol::new(s)).collect();
        let prog = compile_program(&exprs, &inputs).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut scratch = prog.scratch(());
        let mut out = vec![0.0; exprs.len()];
        for _ in 0..50 {
            let vals: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            prog.run_into(&vals, &mut scratch, &mut out).unwrap();
            let env: HashMap<Symbol, f64> = inputs.iter().cloned().zip(vals.iter().copied()).collect();
            for (e, got) in exprs.iter().zip(&out) {
                assert_eq!(*got, evaluate(e, &env, ()).unwrap(), "{e}");
            }
        }
    }

    #[test]
    fn common_subexpressions_are_shared() {
        let m = beam();
        let e = parse_expression("sin(q)^2 + sin(q)^3 + q*sin(q)", m.symbols()).unwrap();
        let prog = compile_program(&[e], &[Symbol::new("q")]).unwrap();
        let sines = prog
            .instructions()
            .iter()
            .filter(|i| matches!(i, Instr::Func(..)))
            .count();
        assert_eq!(sines, 1);
    }

    #[test]
    fn compile_errors() {
        let e = Expr::sym(&Symbol::new("z"));
        assert_eq!(
            compile_program(&[e], &[Symbol::new("q")]),
            Err(CompileError::UnboundSymbol("z".into()))
        );
        let q = Symbol::new("q");
        assert!(matches!(
            compile_program(&[], &[q.clone(), q]),
            Err(CompileError::DuplicateInput(_))
        ));
    }

    #[test]
    fn runtime_domain_errors() {
        let q = Symbol::new("q");
        let prog = compile_program(&[Expr::sym(&q).pow(-1)], &[q.clone()]).unwrap();
        assert!(run_program(&prog, &[0.0], ()).is_err());
        let e = Expr::apply(crate::scalar::Func::Log, &Expr::sym(&q));
        let prog = compile_program(&[e], &[q]).unwrap();
        assert!(run_program(&prog, &[-1.0], ()).is_err());
        assert!(run_program(&prog, &[2.0], ()).is_ok());
    }

    #[test]
    fn kick_at_zero_step_is_minus_gradient() {
        let m = beam();
        let k = SolverKernel::build(&m, Order::EIGHT).unwrap();
        let grad = m.potential().diff(&Symbol::new("q"));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for order in Order::ALL {
            let kick = &k.programs(order).unwrap().kick;
            for _ in 0..100 {
                let q: f64 = rng.gen_range(-2.0..2.0);
                let got = run_program(kick, &[q, 0.3, 0.0], ()).unwrap()[0];
                let env = HashMap::from([(Symbol::new("q"), q)]);
                assert_eq!(got, -evaluate(&grad, &env, ()).unwrap());
            }
        }
    }

    #[test]
    fn second_order_has_no_push_or_move() {
        let k = SolverKernel::build(&beam(), Order::TWO).unwrap();
        let p = k.programs(Order::TWO).unwrap();
        assert_eq!(run_program(&p.push, &[0.4, 1.1, 0.1], ()).unwrap(), vec![0.0]);
        assert_eq!(run_program(&p.moves, &[0.4, 1.1, 0.1], ()).unwrap(), vec![0.0]);
        assert!(k.programs(Order::FOUR).is_none());
    }

    #[test]
    fn fourth_order_push_and_move() {
        // V = q^4/4: G3 = -P²q²/4, G4 = -P³q/4
        let m = ModelSpec::parse("quartic", &["q"], &["p"], &[], "q^4/4").unwrap();
        let k = SolverKernel::build(&m, Order::FOUR).unwrap();
        let p = k.programs(Order::FOUR).unwrap();
        let (q, pp, tau): (f64, f64, f64) = (0.7, -0.4, 0.05);
        let push = run_program(&p.push, &[q, pp, tau], ()).unwrap()[0];
        let mv = run_program(&p.moves, &[q, pp, tau], ()).unwrap()[0];
        let push_ref = tau.powi(3) * (-pp * pp * q / 2.0) + tau.powi(4) * (-pp.powi(3) / 4.0);
        let move_ref = tau.powi(3) * (-pp * q * q / 2.0) + tau.powi(4) * (-3.0 * pp * pp * q / 4.0);
        assert!((push - push_ref).abs() < 1e-16);
        assert!((mv - move_ref).abs() < 1e-16);
        let kick = run_program(&p.kick, &[q, pp, tau], ()).unwrap()[0];
        let kick_ref = -(q.powi(3) + tau * tau * q.powi(5) / 4.0);
        assert!((kick - kick_ref).abs() < 1e-15);
    }

    #[test]
    fn energy_and_diagnostics() {
        let m = ModelSpec::parse("a", &["q"], &["p"], &["alpha"], "alpha*q^2/2 + q^4/4").unwrap();
        let k = SolverKernel::build_with(&m, Order::SIX, KernelOptions { diagnostics: true }).unwrap();
        let h = run_program(k.energy_program(), &[0.5, 2.0, -1.0], ()).unwrap()[0];
        assert_eq!(h, 2.0 - 0.125 + 0.015625);
        let (names, prog) = k.diagnostics().unwrap();
        assert_eq!(names, ["T2", "T4", "T6", "V2", "V4"]);
        assert_eq!(prog.n_outputs(), 5);
        assert!(SolverKernel::build(&m, Order::SIX).unwrap().diagnostics().is_none());
    }

    #[test]
    fn emit_rejects_unknown_language() {
        let k = SolverKernel::build(&beam(), Order::TWO).unwrap();
        assert!(matches!(emit_source(&k, "fortran"), Err(EmitError::UnsupportedLanguage(_))));
        let src = emit_source(&k, "rust").unwrap();
        assert!(src.contains("pub const MAXORDER: usize = 2;"));
        assert!(src.contains("fn kick_2("));
    }
}
