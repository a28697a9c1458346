use std::collections::HashMap;
use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::scalar::{DomainError, Func, Scalar};
use crate::symkernel::{Expr, Node, ProductParts, Symbol};

/// One straight-line instruction. Each writes the register with its own
/// index; operands refer to earlier registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instr {
    Input(u32),
    Const(u32),
    /// Sum of `len` operands starting at `start` in the operand pool.
    Add { start: u32, len: u32 },
    Mul { start: u32, len: u32 },
    Neg(u32),
    Powi(u32, i32),
    Div(u32, u32),
    Func(Func, u32),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompileError {
    #[error("symbol `{0}` is not a program input")]
    UnboundSymbol(String),
    #[error("input `{0}` is listed twice")]
    DuplicateInput(String),
}

/// A compiled vector of expressions with common subexpressions shared.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalProgram {
    inputs: Vec<Symbol>,
    consts: Vec<BigRational>,
    instrs: Vec<Instr>,
    operands: Vec<u32>,
    outputs: Vec<u32>,
}

struct Compiler {
    inputs: HashMap<Symbol, u32>,
    memo: HashMap<Expr, u32>,
    const_index: HashMap<BigRational, u32>,
    prog: EvalProgram,
}

impl Compiler {
    fn push(&mut self, i: Instr) -> u32 {
        self.prog.instrs.push(i);
        (self.prog.instrs.len() - 1) as u32
    }

    fn constant(&mut self, r: &BigRational) -> u32 {
        let key = Expr::num(r.clone());
        if let Some(&reg) = self.memo.get(&key) {
            return reg;
        }
        let idx = match self.const_index.get(r) {
            Some(&i) => i,
            None => {
                self.prog.consts.push(r.clone());
                let i = (self.prog.consts.len() - 1) as u32;
                self.const_index.insert(r.clone(), i);
                i
            }
        };
        let reg = self.push(Instr::Const(idx));
        self.memo.insert(key, reg);
        reg
    }

    fn nary(&mut self, regs: Vec<u32>, add: bool) -> u32 {
        let start = self.prog.operands.len() as u32;
        let len = regs.len() as u32;
        self.prog.operands.extend(regs);
        self.push(if add {
            Instr::Add { start, len }
        } else {
            Instr::Mul { start, len }
        })
    }

    fn product(&mut self, fs: &[Expr]) -> Result<Option<u32>, CompileError> {
        match fs {
            [] => Ok(None),
            [f] => self.compile(f).map(Some),
            _ => {
                let key = Expr::mul_raw(fs.to_vec());
                if let Some(&reg) = self.memo.get(&key) {
                    return Ok(Some(reg));
                }
                let regs = fs.iter().map(|f| self.compile(f)).collect::<Result<Vec<_>, _>>()?;
                let reg = self.nary(regs, false);
                self.memo.insert(key, reg);
                Ok(Some(reg))
            }
        }
    }

    fn compile(&mut self, e: &Expr) -> Result<u32, CompileError> {
        if let Some(&reg) = self.memo.get(e) {
            return Ok(reg);
        }
        let reg = match e.node() {
            Node::Num(r) => return Ok(self.constant(r)),
            Node::Sym(s) => {
                let idx = *self
                    .inputs
                    .get(s)
                    .ok_or_else(|| CompileError::UnboundSymbol(s.name().to_string()))?;
                self.push(Instr::Input(idx))
            }
            Node::Add(xs) => match xs.len() {
                0 => self.constant(&BigRational::zero()),
                1 => self.compile(&xs[0])?,
                _ => {
                    let regs = xs.iter().map(|x| self.compile(x)).collect::<Result<Vec<_>, _>>()?;
                    self.nary(regs, true)
                }
            },
            Node::Mul(xs) => {
                let parts = ProductParts::split(xs);
                let numer = self.product(&parts.numer)?;
                let denom = self.product(&parts.denom)?;
                let body = match (numer, denom) {
                    (Some(n), None) => n,
                    (None, None) => self.constant(&BigRational::one()),
                    (n, Some(d)) => {
                        let n = match n {
                            Some(n) => n,
                            None => self.constant(&BigRational::one()),
                        };
                        self.push(Instr::Div(n, d))
                    }
                };
                match parts.coeff {
                    None => body,
                    Some(c) if c == -BigRational::one() => self.push(Instr::Neg(body)),
                    Some(c) => {
                        let k = self.constant(&c);
                        self.nary(vec![k, body], false)
                    }
                }
            }
            Node::Pow(b, n) => {
                let n = *n;
                if n == 0 {
                    self.constant(&BigRational::one())
                } else {
                    let base = self.compile(b)?;
                    if n > 0 {
                        self.push(Instr::Powi(base, n))
                    } else {
                        let one = self.constant(&BigRational::one());
                        let p = self.push(Instr::Powi(base, -n));
                        self.push(Instr::Div(one, p))
                    }
                }
            }
            Node::Func(f, a) => {
                let a = self.compile(a)?;
                self.push(Instr::Func(*f, a))
            }
        };
        self.memo.insert(e.clone(), reg);
        Ok(reg)
    }
}

/// Compiles `exprs` into one program over the given ordered inputs.
pub fn compile_program(exprs: &[Expr], inputs: &[Symbol]) -> Result<EvalProgram, CompileError> {
    let mut index = HashMap::new();
    for (i, s) in inputs.iter().enumerate() {
        if index.insert(s.clone(), i as u32).is_some() {
            return Err(CompileError::DuplicateInput(s.name().to_string()));
        }
    }
    let mut c = Compiler {
        inputs: index,
        memo: HashMap::new(),
        const_index: HashMap::new(),
        prog: EvalProgram {
            inputs: inputs.to_vec(),
            consts: Vec::new(),
            instrs: Vec::new(),
            operands: Vec::new(),
            outputs: Vec::new(),
        },
    };
    for e in exprs {
        let reg = c.compile(e)?;
        c.prog.outputs.push(reg);
    }
    Ok(c.prog)
}

/// Register and constant storage for repeated runs of one program.
#[derive(Debug, Clone)]
pub struct Scratch<S> {
    regs: Vec<S>,
    consts: Vec<S>,
}

impl EvalProgram {
    pub fn inputs(&self) -> &[Symbol] {
        &self.inputs
    }

    pub fn instructions(&self) -> &[Instr] {
        &self.instrs
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn scratch<S: Scalar>(&self, prec: S::Precision) -> Scratch<S> {
        Scratch {
            regs: vec![S::zero(prec); self.instrs.len()],
            consts: self.consts.iter().map(|r| S::from_rational(prec, r)).collect(),
        }
    }

    /// Runs the program, writing one value per output into `out`.
    ///
    /// Panics if `inputs` or `out` have the wrong length, or if `scratch`
    /// belongs to another program.
    pub fn run_into<S: Scalar>(&self, inputs: &[S], scratch: &mut Scratch<S>, out: &mut [S]) -> Result<(), DomainError> {
        assert_eq!(inputs.len(), self.inputs.len(), "program input count");
        assert_eq!(out.len(), self.outputs.len(), "program output count");
        assert_eq!(scratch.regs.len(), self.instrs.len(), "scratch does not fit program");
        let regs = &mut scratch.regs;
        for (i, ins) in self.instrs.iter().enumerate() {
            let (done, rest) = regs.split_at_mut(i);
            let dst = &mut rest[0];
            match *ins {
                Instr::Input(k) => dst.assign_from(&inputs[k as usize]),
                Instr::Const(k) => dst.assign_from(&scratch.consts[k as usize]),
                Instr::Add { start, len } => {
                    let ops = &self.operands[start as usize..(start + len) as usize];
                    dst.assign_add(&done[ops[0] as usize], &done[ops[1] as usize]);
                    for &o in &ops[2..] {
                        *dst += &done[o as usize];
                    }
                }
                Instr::Mul { start, len } => {
                    let ops = &self.operands[start as usize..(start + len) as usize];
                    dst.assign_mul(&done[ops[0] as usize], &done[ops[1] as usize]);
                    for &o in &ops[2..] {
                        *dst *= &done[o as usize];
                    }
                }
                Instr::Neg(a) => dst.assign_neg(&done[a as usize]),
                Instr::Powi(a, n) => dst.assign_powi(&done[a as usize], n),
                Instr::Div(a, b) => {
                    let d = &done[b as usize];
                    if d.is_zero() {
                        return Err(DomainError::DivisionByZero);
                    }
                    dst.assign_div(&done[a as usize], d);
                }
                Instr::Func(f, a) => *dst = done[a as usize].apply(f)?,
            }
        }
        for (o, &r) in out.iter_mut().zip(&self.outputs) {
            o.assign_from(&regs[r as usize]);
        }
        Ok(())
    }

    /// Emits a Rust function `fn name(x: &[f64], out: &mut [f64])`.
    ///
    /// Rational constants are written as quotients of exactly representable
    /// integers, so the result rounds the same way as the interpreter.
    pub fn emit_rust_fn(&self, name: &str) -> String {
        let mut s = String::new();
        writeln!(s, "fn {name}(x: &[f64], out: &mut [f64]) {{").unwrap();
        for (i, ins) in self.instrs.iter().enumerate() {
            let rhs = match *ins {
                Instr::Input(k) => format!("x[{k}]"),
                Instr::Const(k) => rust_constant(&self.consts[k as usize]),
                Instr::Add { start, len } | Instr::Mul { start, len } => {
                    let op = if matches!(ins, Instr::Add { .. }) { " + " } else { " * " };
                    self.operands[start as usize..(start + len) as usize]
                        .iter()
                        .map(|o| format!("r{o}"))
                        .collect::<Vec<_>>()
                        .join(op)
                }
                Instr::Neg(a) => format!("-r{a}"),
                Instr::Powi(a, n) => format!("r{a}.powi({n})"),
                Instr::Div(a, b) => format!("r{a} / r{b}"),
                Instr::Func(f, a) => {
                    let m = match f {
                        Func::Log => "ln",
                        other => other.name(),
                    };
                    format!("r{a}.{m}()")
                }
            };
            writeln!(s, "    let r{i}: f64 = {rhs};").unwrap();
        }
        for (j, r) in self.outputs.iter().enumerate() {
            writeln!(s, "    out[{j}] = r{r};").unwrap();
        }
        s.push_str("}\n");
        s
    }
}

fn rust_constant(r: &BigRational) -> String {
    const EXACT: i64 = 1 << 53;
    match (r.numer().to_i64(), r.denom().to_i64()) {
        (Some(n), Some(1)) if n.abs() <= EXACT => format!("{n}.0"),
        (Some(n), Some(d)) if n.abs() <= EXACT && d <= EXACT => format!("({n}.0 / {d}.0)"),
        _ => format!("{:?}", r.to_f64().unwrap_or(f64::NAN)),
    }
}

/// Runs a program once with freshly allocated storage.
pub fn run_program<S: Scalar>(prog: &EvalProgram, inputs: &[S], prec: S::Precision) -> Result<Vec<S>, DomainError> {
    let mut scratch = prog.scratch(prec);
    let mut out = vec![S::zero(prec); prog.n_outputs()];
    prog.run_into(inputs, &mut scratch, &mut out)?;
    Ok(out)
}
