//! Canonical form: expanded sums of monomials with exact rational
//! coefficients.
//!
//! A monomial is a sorted product of atoms raised to non-zero integer powers.
//! Atoms are symbols, function applications with canonical arguments, and
//! canonical multi-term sums (which only ever carry negative exponents, since
//! positive powers of sums are expanded).

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::expr::{Expr, Node, Symbol};
use crate::scalar::Func;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub(crate) struct Monomial(Vec<(Expr, i32)>);

impl Monomial {
    pub(crate) fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub(crate) fn atom(e: Expr, exp: i32) -> Monomial {
        if exp == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(e, exp)])
        }
    }

    pub(crate) fn factors(&self) -> &[(Expr, i32)] {
        &self.0
    }

    pub(crate) fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if e != 0 {
                        out.push((a[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    fn powi(&self, n: i32) -> Monomial {
        if n == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|(a, e)| (a.clone(), e * n)).collect())
    }

    /// Same monomial with the exponent of factor `i` replaced.
    fn with_exponent(&self, i: usize, exp: i32) -> Monomial {
        let mut v = self.0.clone();
        if exp == 0 {
            v.remove(i);
        } else {
            v[i].1 = exp;
        }
        Monomial(v)
    }

    fn to_expr(&self, coeff: &BigRational) -> Expr {
        let mut factors: Vec<Expr> = Vec::with_capacity(self.0.len() + 1);
        if !coeff.is_one() || self.0.is_empty() {
            factors.push(Expr::num(coeff.clone()));
        }
        for (a, e) in &self.0 {
            factors.push(if *e == 1 {
                a.clone()
            } else {
                Expr::pow_raw(a.clone(), *e)
            });
        }
        if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::mul_raw(factors)
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn exact_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let (n, d) = (r.numer().sqrt(), r.denom().sqrt());
    (&n * &n == *r.numer() && &d * &d == *r.denom()).then(|| BigRational::new(n, d))
}

fn fold_constant(f: Func, c: &BigRational) -> Option<BigRational> {
    match f {
        Func::Sin | Func::Tan | Func::Sinh if c.is_zero() => Some(rat(0)),
        Func::Cos | Func::Cosh | Func::Exp if c.is_zero() => Some(rat(1)),
        Func::Log if c.is_one() => Some(rat(0)),
        Func::Sqrt => exact_sqrt(c),
        _ => None,
    }
}

impl Poly {
    pub(crate) fn zero() -> Poly {
        Poly::default()
    }

    pub(crate) fn constant(c: BigRational) -> Poly {
        let mut p = Poly::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub(crate) fn int(n: i64) -> Poly {
        Poly::constant(rat(n))
    }

    pub(crate) fn monomial(m: Monomial, c: BigRational) -> Poly {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub(crate) fn symbol(s: &Symbol) -> Poly {
        Poly::monomial(Monomial::atom(Expr::sym(s), 1), rat(1))
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn len(&self) -> usize {
        self.terms.len()
    }

    pub(crate) fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(rat(0)),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub(crate) fn add_scaled(&mut self, other: &Poly, s: &BigRational) {
        if s.is_zero() {
            return;
        }
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c * s);
        }
    }

    pub(crate) fn add_assign(&mut self, other: &Poly) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub(crate) fn mul(&self, other: &Poly) -> Poly {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = Poly::zero();
        for (m1, c1) in &small.terms {
            for (m2, c2) in &large.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    fn powu(&self, n: u32) -> Poly {
        let mut result = Poly::int(1);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    fn powi(&self, n: i32) -> Poly {
        if n >= 0 {
            return self.powu(n as u32);
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if !c.is_zero() {
                let k = n.unsigned_abs();
                let cp = num_traits::pow(c.recip(), k as usize);
                return Poly::expand_monomial(&m.powi(n), cp);
            }
        }
        // Multi-term sums (and the degenerate zero base) stay as atoms.
        Poly::monomial(Monomial::atom(self.to_expr(), n), rat(1))
    }

    /// `c * m`, expanding any sum atom that ended up with a positive
    /// exponent (possible after inverting a single-term quotient).
    fn expand_monomial(m: &Monomial, c: BigRational) -> Poly {
        if m
            .factors()
            .iter()
            .all(|(a, e)| *e < 0 || !matches!(a.node(), Node::Add(_)))
        {
            return Poly::monomial(m.clone(), c);
        }
        let mut out = Poly::constant(c);
        for (a, e) in m.factors() {
            let f = match a.node() {
                Node::Add(_) if *e > 0 => Poly::from_expr(a).powu(*e as u32),
                _ => Poly::monomial(Monomial::atom(a.clone(), *e), rat(1)),
            };
            out = out.mul(&f);
        }
        out
    }

    pub(crate) fn from_expr(e: &Expr) -> Poly {
        match e.node() {
            Node::Num(r) => Poly::constant(r.clone()),
            Node::Sym(s) => Poly::symbol(s),
            Node::Add(xs) => {
                let mut out = Poly::zero();
                for x in xs {
                    out.add_assign(&Poly::from_expr(x));
                }
                out
            }
            Node::Mul(xs) => {
                let mut out = Poly::int(1);
                for x in xs {
                    if out.is_zero() {
                        break;
                    }
                    out = out.mul(&Poly::from_expr(x));
                }
                out
            }
            Node::Pow(b, n) => Poly::from_expr(b).powi(*n),
            Node::Func(f, a) => {
                let arg = Poly::from_expr(a);
                if let Some(c) = arg.as_constant() {
                    if let Some(v) = fold_constant(*f, &c) {
                        return Poly::constant(v);
                    }
                }
                Poly::monomial(Monomial::atom(Expr::func_raw(*f, arg.to_expr()), 1), rat(1))
            }
        }
    }

    pub(crate) fn to_expr(&self) -> Expr {
        let mut terms: Vec<Expr> = self.terms.iter().map(|(m, c)| m.to_expr(c)).collect();
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.pop().unwrap(),
            _ => Expr::add_raw(terms),
        }
    }

    /// Exact partial derivative. `memo` caches derivatives of non-symbol
    /// atoms with respect to `v` and must only be reused for the same `v`.
    pub(crate) fn diff(&self, v: &Symbol, memo: &mut HashMap<Expr, Poly>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for (i, (atom, e)) in m.factors().iter().enumerate() {
                let coeff = c * rat(*e as i64);
                match atom.node() {
                    Node::Sym(s) => {
                        if s == v {
                            out.add_term(m.with_exponent(i, e - 1), coeff);
                        }
                    }
                    _ => {
                        let d = atom_derivative(atom, v, memo);
                        if d.is_zero() {
                            continue;
                        }
                        let rest = m.with_exponent(i, e - 1);
                        for (dm, dc) in &d.terms {
                            out.add_term(dm.mul(&rest), dc * &coeff);
                        }
                    }
                }
            }
        }
        out
    }
}

fn atom_derivative(atom: &Expr, v: &Symbol, memo: &mut HashMap<Expr, Poly>) -> Poly {
    if let Some(d) = memo.get(atom) {
        return d.clone();
    }
    let d = match atom.node() {
        Node::Sym(s) => {
            if s == v {
                Poly::int(1)
            } else {
                Poly::zero()
            }
        }
        Node::Num(_) => Poly::zero(),
        Node::Func(f, a) => {
            let inner = Poly::from_expr(a).diff(v, memo);
            if inner.is_zero() {
                Poly::zero()
            } else {
                outer_derivative(*f, a).mul(&inner)
            }
        }
        // Sums only appear as atoms of negative powers; differentiate their
        // expansion.
        Node::Add(_) => Poly::from_expr(atom).diff(v, memo),
        Node::Mul(_) | Node::Pow(..) => Poly::from_expr(atom).diff(v, memo),
    };
    memo.insert(atom.clone(), d.clone());
    d
}

/// f'(a) for a canonical argument `a`.
fn outer_derivative(f: Func, a: &Expr) -> Poly {
    let atom = |g: Func| Monomial::atom(Expr::func_raw(g, a.clone()), 1);
    match f {
        Func::Sin => Poly::monomial(atom(Func::Cos), rat(1)),
        Func::Cos => Poly::monomial(atom(Func::Sin), rat(-1)),
        Func::Tan => {
            let mut p = Poly::int(1);
            p.add_term(Monomial::atom(Expr::func_raw(Func::Tan, a.clone()), 2), rat(1));
            p
        }
        Func::Sinh => Poly::monomial(atom(Func::Cosh), rat(1)),
        Func::Cosh => Poly::monomial(atom(Func::Sinh), rat(1)),
        Func::Exp => Poly::monomial(atom(Func::Exp), rat(1)),
        Func::Log => Poly::from_expr(a).powi(-1),
        Func::Sqrt => Poly::monomial(
            Monomial::atom(Expr::func_raw(Func::Sqrt, a.clone()), -1),
            BigRational::new(BigInt::from(1), BigInt::from(2)),
        ),
    }
}
