use std::collections::HashMap;
use std::time::{Duration, Instant};

use crate::effham::{kinetic, EffectiveTerms, Order};
use crate::operators::ModelSpec;
use crate::symkernel::canon::Poly;
use crate::symkernel::{Expr, Symbol};

use super::program::{compile_program, CompileError, EvalProgram};

/// The three step programs of one order.
///
/// All take `[q.., P.., params.., τ]`:
/// * `kick` gives `-∂V_eff/∂q`,
/// * `push` gives `Σ_{k≥3} τ^k ∂G_k/∂q`,
/// * `moves` gives `Σ_{k≥3} τ^k ∂G_k/∂P`.
#[derive(Debug, Clone)]
pub struct OrderPrograms {
    pub order: Order,
    pub kick: EvalProgram,
    pub push: EvalProgram,
    pub moves: EvalProgram,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct KernelOptions {
    /// Also compile `T2..T6, V2..V6` for inspection.
    pub diagnostics: bool,
}

/// Everything the integrator needs for one model, compiled for every order
/// up to `maxorder`.
#[derive(Debug, Clone)]
pub struct SolverKernel {
    model: ModelSpec,
    maxorder: Order,
    terms: EffectiveTerms,
    energy: EvalProgram,
    orders: Vec<OrderPrograms>,
    diagnostics: Option<(Vec<String>, EvalProgram)>,
    timings: Vec<(String, Duration)>,
}

/// `c[0] + x (c[1] + x (c[2] + ...))`, skipping zero coefficients.
fn horner(cs: &[Expr], x: &Expr) -> Option<Expr> {
    let mut acc: Option<Expr> = None;
    for c in cs.iter().rev() {
        acc = match acc {
            None if c.is_zero() => None,
            None => Some(c.clone()),
            Some(h) => {
                let t = Expr::mul_raw(vec![x.clone(), h]);
                Some(if c.is_zero() { t } else { Expr::add_raw(vec![c.clone(), t]) })
            }
        };
    }
    acc
}

struct Gradients {
    memo: HashMap<Symbol, HashMap<Expr, Poly>>,
}

impl Gradients {
    fn of(&mut self, p: &Poly, v: &Symbol) -> Expr {
        p.diff(v, self.memo.entry(v.clone()).or_default()).to_expr()
    }
}

impl SolverKernel {
    pub fn build(m: &ModelSpec, maxorder: Order) -> Result<SolverKernel, CompileError> {
        SolverKernel::build_with(m, maxorder, KernelOptions::default())
    }

    pub fn build_with(m: &ModelSpec, maxorder: Order, opts: KernelOptions) -> Result<SolverKernel, CompileError> {
        let terms = EffectiveTerms::build(m, maxorder, opts.diagnostics);
        let mut timings = terms.timings.clone();
        let syms = m.symbols();
        let tau = Expr::sym(syms.tau());

        let mut step_inputs: Vec<Symbol> = syms.coords().to_vec();
        step_inputs.extend_from_slice(syms.new_momenta());
        step_inputs.extend_from_slice(syms.params());
        step_inputs.push(syms.tau().clone());
        let mut phase_inputs: Vec<Symbol> = syms.coords().to_vec();
        phase_inputs.extend_from_slice(syms.momenta());
        phase_inputs.extend_from_slice(syms.params());

        let start = Instant::now();
        let mut grads = Gradients { memo: HashMap::new() };
        // dv[j][a] = ∂V_{2j}/∂q^a, dgq[k][a] = ∂G_k/∂q^a, dgp[k][a] = ∂G_k/∂P_a
        let dv: Vec<Vec<Expr>> = terms
            .v_poly
            .iter()
            .map(|v| syms.coords().iter().map(|q| grads.of(v, q)).collect())
            .collect();
        let dgq: Vec<Vec<Expr>> = terms
            .g_poly
            .iter()
            .map(|g| syms.coords().iter().map(|q| grads.of(g, q)).collect())
            .collect();
        let dgp: Vec<Vec<Expr>> = terms
            .g_poly
            .iter()
            .map(|g| syms.new_momenta().iter().map(|p| grads.of(g, p)).collect())
            .collect();
        timings.push(("gradients".to_string(), start.elapsed()));

        let start = Instant::now();
        let tau2 = Expr::pow_raw(tau.clone(), 2);
        let tau3 = Expr::pow_raw(tau.clone(), 3);
        let mut orders = Vec::new();
        for order in maxorder.up_to() {
            let n = order.get();
            let mut kick = Vec::new();
            let mut push = Vec::new();
            let mut moves = Vec::new();
            for a in 0..syms.degrees() {
                let cs: Vec<Expr> = dv[..n / 2].iter().map(|d| d[a].clone()).collect();
                kick.push(match horner(&cs, &tau2) {
                    Some(h) => Expr::mul_raw(vec![Expr::int(-1), h]),
                    None => Expr::zero(),
                });
                for (dg, out) in [(&dgq, &mut push), (&dgp, &mut moves)] {
                    let cs: Vec<Expr> = dg[3..=n].iter().map(|d| d[a].clone()).collect();
                    out.push(match horner(&cs, &tau) {
                        Some(h) => Expr::mul_raw(vec![tau3.clone(), h]),
                        None => Expr::zero(),
                    });
                }
            }
            orders.push(OrderPrograms {
                order,
                kick: compile_program(&kick, &step_inputs)?,
                push: compile_program(&push, &step_inputs)?,
                moves: compile_program(&moves, &step_inputs)?,
            });
        }

        let mut h = kinetic(m);
        h.add_assign(&terms.v_poly[0]);
        let energy = compile_program(&[h.to_expr()], &phase_inputs)?;

        let diagnostics = if opts.diagnostics {
            let mut names = Vec::new();
            let mut exprs = Vec::new();
            for (k, t) in [2, 4, 6].iter().zip(&terms.t) {
                names.push(format!("T{k}"));
                exprs.push(t.clone());
            }
            for (j, v) in terms.v.iter().enumerate().skip(1) {
                names.push(format!("V{}", 2 * j));
                exprs.push(v.clone());
            }
            Some((names, compile_program(&exprs, &phase_inputs)?))
        } else {
            None
        };
        timings.push(("compilation".to_string(), start.elapsed()));

        Ok(SolverKernel {
            model: m.clone(),
            maxorder,
            terms,
            energy,
            orders,
            diagnostics,
            timings,
        })
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn maxorder(&self) -> Order {
        self.maxorder
    }

    pub fn degrees(&self) -> usize {
        self.model.degrees()
    }

    /// Phase-space dimension.
    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn n_params(&self) -> usize {
        self.model.symbols().params().len()
    }

    pub fn terms(&self) -> &EffectiveTerms {
        &self.terms
    }

    /// `H = ½|p|² + V` over `[q.., p.., params..]`.
    pub fn energy_program(&self) -> &EvalProgram {
        &self.energy
    }

    pub fn programs(&self, order: Order) -> Option<&OrderPrograms> {
        self.orders.iter().find(|o| o.order == order)
    }

    /// Names and program of the diagnostic terms, when built with them.
    pub fn diagnostics(&self) -> Option<(&[String], &EvalProgram)> {
        self.diagnostics.as_ref().map(|(n, p)| (n.as_slice(), p))
    }

    /// Wall time spent in each build stage.
    pub fn timings(&self) -> &[(String, Duration)] {
        &self.timings
    }
}
