//! The first-order differential operators the correction terms are written
//! in, for a unit mass matrix:
//!
//! * `D  = p_a ∂_a`
//! * `D̄  = (∂_a V) ∂_a`
//! * `𝒟  = P_a ∂_a`
//! * `D̄₃ V = (∂_a V)(∂_b V)(∂_c V) ∂_a ∂_b ∂_c V`
//!
//! with `∂_a = ∂/∂q^a` and summation over repeated indices. Every result is
//! simplified before it is returned, so repeated application stays compact.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::symkernel::canon::Poly;
use crate::symkernel::{parse_expression, Expr, ParseError, Symbol, SymbolError, SymbolTable};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("`{0}` is not a valid model name")]
    InvalidName(String),
    #[error("potential depends on `{0}`, which is not a coordinate or parameter")]
    ForeignSymbol(String),
    #[error(transparent)]
    Symbols(#[from] SymbolError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// A named model: its symbols and potential `V(q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    name: String,
    symbols: SymbolTable,
    potential: Expr,
}

fn valid_stem(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl ModelSpec {
    pub fn new(name: &str, symbols: SymbolTable, potential: Expr) -> Result<ModelSpec, ModelError> {
        if !valid_stem(name) {
            return Err(ModelError::InvalidName(name.to_string()));
        }
        let potential = potential.simplify();
        for s in potential.symbols() {
            if !symbols.coords().contains(&s) && !symbols.params().contains(&s) {
                return Err(ModelError::ForeignSymbol(s.name().to_string()));
            }
        }
        Ok(ModelSpec {
            name: name.to_string(),
            symbols,
            potential,
        })
    }

    /// Declares the symbols and parses the potential in one go.
    pub fn parse(
        name: &str,
        coords: &[&str],
        momenta: &[&str],
        params: &[&str],
        potential: &str,
    ) -> Result<ModelSpec, ModelError> {
        let symbols = SymbolTable::new(coords, momenta, params)?;
        let v = parse_expression(potential, &symbols)?;
        ModelSpec::new(name, symbols, v)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    pub fn potential(&self) -> &Expr {
        &self.potential
    }

    /// Degrees of freedom.
    pub fn degrees(&self) -> usize {
        self.symbols.degrees()
    }

    /// Phase-space dimension.
    pub fn dim(&self) -> usize {
        2 * self.degrees()
    }
}

/// Operator applications on the internal canonical representation.
///
/// Holds the gradient of `V` and per-coordinate derivative caches so a long
/// sequence of applications (as in the correction terms) reuses work.
pub(crate) struct Operators {
    coords: Vec<Symbol>,
    momenta: Vec<Symbol>,
    new_momenta: Vec<Symbol>,
    potential: Poly,
    grad_v: Vec<Poly>,
    memo: Vec<HashMap<Expr, Poly>>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Operators {
    pub(crate) fn new(m: &ModelSpec) -> Operators {
        let coords = m.symbols().coords().to_vec();
        let mut memo: Vec<HashMap<Expr, Poly>> = coords.iter().map(|_| HashMap::new()).collect();
        let potential = Poly::from_expr(m.potential());
        let grad_v = coords
            .iter()
            .zip(memo.iter_mut())
            .map(|(q, memo)| potential.diff(q, memo))
            .collect();
        Operators {
            coords,
            momenta: m.symbols().momenta().to_vec(),
            new_momenta: m.symbols().new_momenta().to_vec(),
            potential,
            grad_v,
            memo,
        }
    }

    pub(crate) fn potential(&self) -> &Poly {
        &self.potential
    }

    pub(crate) fn partial(&mut self, e: &Poly, a: usize) -> Poly {
        e.diff(&self.coords[a], &mut self.memo[a])
    }

    fn weighted_by_symbols(&mut self, e: &Poly, weights: &[Symbol]) -> Poly {
        let mut out = Poly::zero();
        for a in 0..self.coords.len() {
            let d = self.partial(e, a);
            if d.is_zero() {
                continue;
            }
            out.add_assign(&d.mul(&Poly::symbol(&weights[a])));
        }
        out
    }

    /// `D e = p_a ∂_a e`
    pub(crate) fn d(&mut self, e: &Poly) -> Poly {
        let w = self.momenta.clone();
        self.weighted_by_symbols(e, &w)
    }

    /// `𝒟 e = P_a ∂_a e`
    pub(crate) fn cal_d(&mut self, e: &Poly) -> Poly {
        let w = self.new_momenta.clone();
        self.weighted_by_symbols(e, &w)
    }

    /// `D̄ e = (∂_a V) ∂_a e`
    pub(crate) fn dbar(&mut self, e: &Poly) -> Poly {
        let mut out = Poly::zero();
        for a in 0..self.coords.len() {
            let d = self.partial(e, a);
            if d.is_zero() || self.grad_v[a].is_zero() {
                continue;
            }
            out.add_assign(&d.mul(&self.grad_v[a]));
        }
        out
    }

    /// `D̄₃ V`, summed over `a ≤ b ≤ c` with permutation multiplicities.
    pub(crate) fn dbar3(&mut self) -> Poly {
        let n = self.coords.len();
        let mut out = Poly::zero();
        for a in 0..n {
            if self.grad_v[a].is_zero() {
                continue;
            }
            for b in a..n {
                let vab = self.partial(&self.grad_v[a].clone(), b);
                if vab.is_zero() || self.grad_v[b].is_zero() {
                    continue;
                }
                let gab = self.grad_v[a].mul(&self.grad_v[b]);
                for c in b..n {
                    let vabc = self.partial(&vab, c);
                    if vabc.is_zero() || self.grad_v[c].is_zero() {
                        continue;
                    }
                    let mult = match (a == b, b == c) {
                        (true, true) => 1,
                        (true, false) | (false, true) => 3,
                        (false, false) => 6,
                    };
                    let term = gab.mul(&self.grad_v[c]).mul(&vabc);
                    out.add_scaled(&term, &rat(mult));
                }
            }
        }
        out
    }
}

/// `D e = Σ_a p_a ∂e/∂q^a`
pub fn apply_d(e: &Expr, m: &ModelSpec) -> Expr {
    Operators::new(m).d(&Poly::from_expr(e)).to_expr()
}

/// `D̄ e = Σ_a (∂V/∂q^a) ∂e/∂q^a`, with `V` the model potential.
pub fn apply_dbar(e: &Expr, m: &ModelSpec) -> Expr {
    Operators::new(m).dbar(&Poly::from_expr(e)).to_expr()
}

/// `D̄₃ V = Σ_{abc} (∂_a V)(∂_b V)(∂_c V) ∂_a ∂_b ∂_c V`
pub fn apply_dbar3(m: &ModelSpec) -> Expr {
    Operators::new(m).dbar3().to_expr()
}

/// `𝒟 e = Σ_a P_a ∂e/∂q^a`
pub fn apply_cal_d(e: &Expr, m: &ModelSpec) -> Expr {
    Operators::new(m).cal_d(&Poly::from_expr(e)).to_expr()
}
