use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::One;

use super::expr::{Expr, Node, Symbol};
use crate::scalar::{DomainError, Scalar};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("symbol `{0}` has no value")]
    Unbound(Symbol),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// A product split the way both evaluators associate it: a leading
/// rational coefficient times (numerator / denominator), where the
/// denominator collects negative powers with their exponents flipped.
pub(crate) struct ProductParts {
    pub coeff: Option<BigRational>,
    pub numer: Vec<Expr>,
    pub denom: Vec<Expr>,
}

impl ProductParts {
    pub(crate) fn split(xs: &[Expr]) -> ProductParts {
        let mut rest = xs;
        let mut coeff = None;
        if xs.len() > 1 {
            if let Some(c) = xs[0].as_num() {
                coeff = Some(c.clone());
                rest = &xs[1..];
            }
        }
        let mut numer = Vec::new();
        let mut denom = Vec::new();
        for x in rest {
            match x.node() {
                Node::Pow(b, n) if *n < 0 => denom.push(Expr::pow_raw(b.clone(), -*n)),
                _ => numer.push(x.clone()),
            }
        }
        ProductParts { coeff, numer, denom }
    }
}

fn product<S: Scalar>(xs: &[Expr], go: &impl Fn(&Expr) -> Result<S, EvalError>) -> Result<Option<S>, EvalError> {
    let mut it = xs.iter();
    let Some(first) = it.next() else {
        return Ok(None);
    };
    let mut acc = go(first)?;
    for x in it {
        acc *= go(x)?;
    }
    Ok(Some(acc))
}

/// Numeric value of `e` with every symbol looked up in `env`.
///
/// Sums are accumulated left to right. A product is evaluated as its
/// rational coefficient times the numerator factors divided by the
/// positive powers behind its negative exponents; compiled programs use the
/// same association, so both give identical floating-point results.
pub fn evaluate<S: Scalar>(e: &Expr, env: &HashMap<Symbol, S>, prec: S::Precision) -> Result<S, EvalError> {
    let go = |x: &Expr| evaluate(x, env, prec);
    match e.node() {
        Node::Num(r) => Ok(S::from_rational(prec, r)),
        Node::Sym(s) => env.get(s).cloned().ok_or_else(|| EvalError::Unbound(s.clone())),
        Node::Add(xs) => {
            let mut it = xs.iter();
            let mut acc = match it.next() {
                Some(x) => go(x)?,
                None => return Ok(S::zero(prec)),
            };
            for x in it {
                acc += go(x)?;
            }
            Ok(acc)
        }
        Node::Mul(xs) => {
            let parts = ProductParts::split(xs);
            let mut acc = product(&parts.numer, &go)?.unwrap_or_else(|| S::one(prec));
            if let Some(den) = product(&parts.denom, &go)? {
                if den.is_zero() {
                    return Err(DomainError::DivisionByZero.into());
                }
                acc /= den;
            }
            Ok(match &parts.coeff {
                Some(c) if *c == -BigRational::one() => -acc,
                Some(c) => S::from_rational(prec, c) * acc,
                None => acc,
            })
        }
        Node::Pow(b, n) => {
            let base = go(b)?;
            if *n >= 0 {
                return Ok(base.powi(*n));
            }
            if base.is_zero() {
                return Err(DomainError::DivisionByZero.into());
            }
            Ok(S::one(prec) / base.powi(-*n))
        }
        Node::Func(f, a) => Ok(go(a)?.apply(*f)?),
    }
}

/// Convenience wrapper for `f64` with bindings given by name.
pub fn evaluate_f64(e: &Expr, bindings: &[(&str, f64)]) -> Result<f64, EvalError> {
    let env = bindings.iter().map(|(n, v)| (Symbol::new(n), *v)).collect();
    evaluate(e, &env, ())
}
