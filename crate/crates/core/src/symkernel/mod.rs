//! Symbolic expressions with exact rational coefficients.
//!
//! [`Expr`] is an immutable tree of rationals, symbols, sums, products,
//! integer powers and elementary functions. Simplification brings any tree to
//! a canonical expanded form, which makes structural equality a usable
//! equality test for the symbolic pipeline.

pub(crate) mod canon;
mod eval;
mod expr;
mod parse;
mod table;

pub use eval::{evaluate, evaluate_f64, EvalError};
pub use num_rational::BigRational;
pub(crate) use eval::ProductParts;
pub use expr::{Expr, Node, Symbol};
pub use parse::{parse_expression, parse_rational, ParseError};
pub use table::{SymbolError, SymbolTable};

use std::collections::HashMap;

/// Exact partial derivative `∂e/∂v`, simplified.
pub fn differentiate(e: &Expr, v: &Symbol) -> Expr {
    e.diff(v)
}

pub fn simplify(e: &Expr) -> Expr {
    e.simplify()
}

pub fn substitute(e: &Expr, bindings: &HashMap<Symbol, Expr>) -> Expr {
    e.substitute(bindings)
}

#[cfg(test)]
mod tests;
