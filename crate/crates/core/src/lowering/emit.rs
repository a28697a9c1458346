use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use super::kernel::SolverKernel;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EmitError {
    #[error("no emitter for `{0}` (available: rust)")]
    UnsupportedLanguage(String),
}

/// Renders a kernel as a standalone program in the target language.
///
/// The only target is `rust`: a single file with no dependencies that
/// builds with `rustc -O` and accepts `key=value` arguments
/// (`steps`, `tau`, `order`, `epsilon`, `every`, `z`, `params`).
pub fn emit_source(kernel: &SolverKernel, language: &str) -> Result<String, EmitError> {
    match language {
        "rust" | "rs" => Ok(emit_rust(kernel)),
        other => Err(EmitError::UnsupportedLanguage(other.to_string())),
    }
}

const RUNTIME: &str = r#"
#[derive(Debug, Clone)]
pub struct Solver {
    pub tau: f64,
    pub epsilon: f64,
    pub order: usize,
    pub max_iterations: usize,
    pub params: [f64; NPARAMS],
    pub itrs: Vec<u64>,
}

impl Solver {
    pub fn new() -> Solver {
        Solver {
            tau: 0.1,
            epsilon: 1e-12,
            order: MAXORDER,
            max_iterations: 20,
            params: [0.0; NPARAMS],
            itrs: vec![0; 21],
        }
    }

    fn inputs(&self, q: &[f64], pn: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(2 * NDOF + NPARAMS + 1);
        x.extend_from_slice(q);
        x.extend_from_slice(pn);
        x.extend_from_slice(&self.params);
        x.push(self.tau);
        x
    }

    pub fn energy(&self, z: &[f64]) -> f64 {
        let mut x = z.to_vec();
        x.extend_from_slice(&self.params);
        let mut out = [0.0];
        energy(&x, &mut out);
        out[0]
    }

    pub fn kick(&self, q: &[f64], out: &mut [f64]) {
        let x = self.inputs(q, &[0.0; NDOF]);
        (STEP[self.order / 2 - 1].0)(&x, out);
    }

    pub fn push(&self, q: &[f64], pn: &[f64], out: &mut [f64]) {
        (STEP[self.order / 2 - 1].1)(&self.inputs(q, pn), out);
    }

    pub fn r#move(&self, q: &[f64], pn: &[f64], out: &mut [f64]) {
        (STEP[self.order / 2 - 1].2)(&self.inputs(q, pn), out);
    }

    /// One kick-move-kick step; returns the number of push evaluations.
    pub fn ki_mo_ki(&mut self, z: &mut [f64]) -> Result<usize, String> {
        let (q, p) = z.split_at_mut(NDOF);
        let half = self.tau / 2.0;
        let mut k = [0.0; NDOF];
        self.kick(q, &mut k);
        for a in 0..NDOF {
            p[a] += half * k[a];
        }
        let mut pn = [0.0; NDOF];
        pn.copy_from_slice(p);
        let mut d = [0.0; NDOF];
        let mut it = 0;
        loop {
            it += 1;
            self.push(q, &pn, &mut d);
            let mut res: f64 = 0.0;
            for a in 0..NDOF {
                let next = p[a] - d[a];
                res = res.max((next - pn[a]).abs());
                pn[a] = next;
            }
            if res <= self.epsilon {
                break;
            }
            if it >= self.max_iterations {
                return Err(format!("push did not converge (residual {res:e})"));
            }
        }
        self.r#move(q, &pn, &mut d);
        for a in 0..NDOF {
            q[a] = q[a] + self.tau * pn[a] + d[a];
            p[a] = pn[a];
        }
        self.kick(q, &mut k);
        for a in 0..NDOF {
            p[a] += half * k[a];
        }
        if self.itrs.len() <= it {
            self.itrs.resize(it + 1, 0);
        }
        self.itrs[it] += 1;
        Ok(it)
    }
}

fn parse_list(s: &str) -> Vec<f64> {
    s.split(',')
        .filter(|t| !t.is_empty())
        .map(|t| t.trim().parse().unwrap_or_else(|_| panic!("bad number `{}`", t)))
        .collect()
}

fn main() {
    let mut solver = Solver::new();
    let mut steps = 10usize;
    let mut every = 0usize;
    let mut z = vec![0.0; 2 * NDOF];
    for arg in std::env::args().skip(1) {
        let (key, value) = arg.split_once('=').unwrap_or_else(|| panic!("expected key=value, got `{}`", arg));
        match key {
            "steps" => steps = value.parse().expect("steps"),
            "every" => every = value.parse().expect("every"),
            "tau" => solver.tau = value.parse().expect("tau"),
            "order" => solver.order = value.parse().expect("order"),
            "epsilon" => solver.epsilon = value.parse().expect("epsilon"),
            "z" => z = parse_list(value),
            "params" => solver.params.copy_from_slice(&parse_list(value)),
            _ => panic!("unknown argument `{}`", key),
        }
    }
    assert_eq!(z.len(), 2 * NDOF, "z needs {} values", 2 * NDOF);
    assert!(solver.order >= 2 && solver.order <= MAXORDER && solver.order % 2 == 0, "order");
    let print = |n: usize, z: &[f64], s: &Solver| {
        let t = n as f64 * s.tau;
        let cols: Vec<String> = z.iter().map(|v| format!("{v:.17e}")).collect();
        println!("{t:.17e} {} {:.17e}", cols.join(" "), s.energy(z));
    };
    print(0, &z, &solver);
    for n in 1..=steps {
        if let Err(e) = solver.ki_mo_ki(&mut z) {
            eprintln!("step {n}: {e}");
            std::process::exit(1);
        }
        if n == steps || (every > 0 && n % every == 0) {
            print(n, &z, &solver);
        }
    }
    let hist: Vec<String> = solver.itrs.iter().map(|c| c.to_string()).collect();
    eprintln!("itrs {}", hist.join(" "));
}
"#;

fn emit_rust(kernel: &SolverKernel) -> String {
    let m = kernel.model();
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let params: Vec<String> = m
        .symbols()
        .params()
        .iter()
        .map(|p| format!("{:?}", p.name()))
        .collect();

    let mut s = String::new();
    writeln!(s, "// Solver for model `{}`, orders 2..={}.", m.name(), kernel.maxorder()).unwrap();
    writeln!(s, "// Potential: V = {}", m.potential()).unwrap();
    writeln!(s, "// Generated by hamgen at unix time {stamp}.").unwrap();
    s.push_str("#![allow(clippy::all, unused_parens, unused_variables, dead_code)]\n\n");
    writeln!(s, "pub const MAXORDER: usize = {};", kernel.maxorder()).unwrap();
    writeln!(s, "pub const DIM: usize = {};", kernel.dim()).unwrap();
    writeln!(s, "const NDOF: usize = {};", kernel.degrees()).unwrap();
    writeln!(s, "const NPARAMS: usize = {};", params.len()).unwrap();
    writeln!(s, "pub const PARAM_NAMES: [&str; NPARAMS] = [{}];", params.join(", ")).unwrap();
    s.push('\n');

    s.push_str(&kernel.energy_program().emit_rust_fn("energy"));
    let mut table = Vec::new();
    for order in kernel.maxorder().up_to() {
        let p = kernel.programs(order).expect("every order up to maxorder is compiled");
        let n = order.get();
        for (name, prog) in [("kick", &p.kick), ("push", &p.push), ("move", &p.moves)] {
            s.push('\n');
            s.push_str(&prog.emit_rust_fn(&format!("{name}_{n}")));
        }
        table.push(format!("(kick_{n}, push_{n}, move_{n})"));
    }
    s.push_str("\ntype Prog = fn(&[f64], &mut [f64]);\n");
    writeln!(s, "const STEP: [(Prog, Prog, Prog); {}] = [{}];", table.len(), table.join(", ")).unwrap();
    s.push_str(RUNTIME);
    s
}
