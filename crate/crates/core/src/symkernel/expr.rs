use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::canon::Poly;
use crate::scalar::Func;

/// A named symbol. Ordering is by name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Symbol {
        Symbol(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One node of an expression tree.
///
/// The variant order is the kind order used when sorting canonical sums and
/// products.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Num(BigRational),
    Sym(Symbol),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Expr, i32),
    Func(Func, Expr),
}

struct Inner {
    node: Node,
    hash: u64,
}

/// Immutable, cheaply clonable symbolic expression.
///
/// Constructors named `*_raw` build the tree exactly as given. Everything
/// else (`simplify`, `diff`, `substitute`, the arithmetic operators) returns
/// the canonical form: an expanded sum of monomials with exact rational
/// coefficients, sorted by a fixed total order, so two canonical expressions
/// are equal as values of this type exactly when they are structurally equal.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

impl Expr {
    fn from_node(node: Node) -> Expr {
        let mut h = DefaultHasher::new();
        match &node {
            Node::Num(r) => {
                0u8.hash(&mut h);
                r.hash(&mut h);
            }
            Node::Sym(s) => {
                1u8.hash(&mut h);
                s.hash(&mut h);
            }
            Node::Add(xs) => {
                2u8.hash(&mut h);
                for x in xs {
                    x.0.hash.hash(&mut h);
                }
            }
            Node::Mul(xs) => {
                3u8.hash(&mut h);
                for x in xs {
                    x.0.hash.hash(&mut h);
                }
            }
            Node::Pow(b, e) => {
                4u8.hash(&mut h);
                b.0.hash.hash(&mut h);
                e.hash(&mut h);
            }
            Node::Func(f, a) => {
                5u8.hash(&mut h);
                f.hash(&mut h);
                a.0.hash.hash(&mut h);
            }
        }
        Expr(Arc::new(Inner {
            node,
            hash: h.finish(),
        }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn num(r: BigRational) -> Expr {
        Expr::from_node(Node::Num(r))
    }

    pub fn int(v: i64) -> Expr {
        Expr::num(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(n: i64, d: i64) -> Expr {
        Expr::num(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn sym(s: &Symbol) -> Expr {
        Expr::from_node(Node::Sym(s.clone()))
    }

    pub fn add_raw(terms: Vec<Expr>) -> Expr {
        Expr::from_node(Node::Add(terms))
    }

    pub fn mul_raw(factors: Vec<Expr>) -> Expr {
        Expr::from_node(Node::Mul(factors))
    }

    pub fn pow_raw(base: Expr, exp: i32) -> Expr {
        Expr::from_node(Node::Pow(base, exp))
    }

    pub fn func_raw(f: Func, arg: Expr) -> Expr {
        Expr::from_node(Node::Func(f, arg))
    }

    /// `f(arg)` in canonical form.
    pub fn apply(f: Func, arg: &Expr) -> Expr {
        Expr::func_raw(f, arg.clone()).simplify()
    }

    /// `self^exp` in canonical form.
    pub fn pow(&self, exp: i32) -> Expr {
        Expr::pow_raw(self.clone(), exp).simplify()
    }

    pub fn as_num(&self) -> Option<&BigRational> {
        match self.node() {
            Node::Num(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_num().is_some_and(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_num().is_some_and(One::is_one)
    }

    /// Canonical form.
    pub fn simplify(&self) -> Expr {
        Poly::from_expr(self).to_expr()
    }

    /// Exact partial derivative with respect to `v`, in canonical form.
    pub fn diff(&self, v: &Symbol) -> Expr {
        let mut memo = HashMap::new();
        Poly::from_expr(self).diff(v, &mut memo).to_expr()
    }

    /// Simultaneous substitution of symbols, followed by simplification.
    pub fn substitute(&self, bindings: &HashMap<Symbol, Expr>) -> Expr {
        fn go(e: &Expr, b: &HashMap<Symbol, Expr>) -> Expr {
            match e.node() {
                Node::Num(_) => e.clone(),
                Node::Sym(s) => b.get(s).cloned().unwrap_or_else(|| e.clone()),
                Node::Add(xs) => Expr::add_raw(xs.iter().map(|x| go(x, b)).collect()),
                Node::Mul(xs) => Expr::mul_raw(xs.iter().map(|x| go(x, b)).collect()),
                Node::Pow(x, n) => Expr::pow_raw(go(x, b), *n),
                Node::Func(f, x) => Expr::func_raw(*f, go(x, b)),
            }
        }
        go(self, bindings).simplify()
    }

    /// True if `v` occurs anywhere in the tree.
    pub fn contains(&self, v: &Symbol) -> bool {
        match self.node() {
            Node::Num(_) => false,
            Node::Sym(s) => s == v,
            Node::Add(xs) | Node::Mul(xs) => xs.iter().any(|x| x.contains(v)),
            Node::Pow(x, _) | Node::Func(_, x) => x.contains(v),
        }
    }

    /// Every symbol occurring in the tree, sorted and deduplicated.
    pub fn symbols(&self) -> Vec<Symbol> {
        fn go(e: &Expr, out: &mut Vec<Symbol>) {
            match e.node() {
                Node::Num(_) => {}
                Node::Sym(s) => out.push(s.clone()),
                Node::Add(xs) | Node::Mul(xs) => xs.iter().for_each(|x| go(x, out)),
                Node::Pow(x, _) | Node::Func(_, x) => go(x, out),
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out.sort();
        out.dedup();
        out
    }

    /// Number of nodes in the tree, counting shared subtrees once per use.
    pub fn node_count(&self) -> usize {
        1 + match self.node() {
            Node::Num(_) | Node::Sym(_) => 0,
            Node::Add(xs) | Node::Mul(xs) => xs.iter().map(Expr::node_count).sum(),
            Node::Pow(x, _) | Node::Func(_, x) => x.node_count(),
        }
    }

    /// Number of top-level terms (1 for anything that is not a sum, 0 for
    /// the zero constant).
    pub fn term_count(&self) -> usize {
        match self.node() {
            Node::Add(xs) => xs.len(),
            _ if self.is_zero() => 0,
            _ => 1,
        }
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.hash == other.0.hash && self.0.node == other.0.node)
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash.hash(state)
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Expr) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Expr) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.0.node.cmp(&other.0.node)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<&Symbol> for Expr {
    fn from(s: &Symbol) -> Expr {
        Expr::sym(s)
    }
}

impl From<i64> for Expr {
    fn from(v: i64) -> Expr {
        Expr::int(v)
    }
}

macro_rules! simplifying_op {
    ($tr:ident, $m:ident, $body:expr) => {
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                std::ops::$tr::$m(&self, &rhs)
            }
        }
    };
}

simplifying_op!(Add, add, |a, b| Expr::add_raw(vec![a.clone(), b.clone()]).simplify());
simplifying_op!(Sub, sub, |a, b| {
    Expr::add_raw(vec![a.clone(), Expr::mul_raw(vec![Expr::int(-1), b.clone()])]).simplify()
});
simplifying_op!(Mul, mul, |a, b| Expr::mul_raw(vec![a.clone(), b.clone()]).simplify());

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::mul_raw(vec![Expr::int(-1), self.clone()]).simplify()
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

// Printing. The output is valid input for the parser; for canonical
// expressions parse(print(e)) == e.

fn write_rational(f: &mut fmt::Formatter<'_>, r: &BigRational) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

fn write_atomic(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e.node() {
        Node::Sym(s) => write!(f, "{s}"),
        Node::Func(..) => write!(f, "{e}"),
        Node::Num(r) if r.is_integer() && !r.is_negative() => write_rational(f, r),
        _ => write!(f, "({e})"),
    }
}

fn write_factor(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e.node() {
        Node::Add(_) | Node::Num(_) => write!(f, "({e})"),
        _ => write!(f, "{e}"),
    }
}

fn term_string(e: &Expr) -> String {
    match e.node() {
        Node::Add(_) => format!("({e})"),
        _ => format!("{e}"),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Num(r) => write_rational(f, r),
            Node::Sym(s) => write!(f, "{s}"),
            Node::Add(xs) => {
                if xs.is_empty() {
                    return f.write_str("0");
                }
                for (i, x) in xs.iter().enumerate() {
                    let s = term_string(x);
                    match (i, s.strip_prefix('-')) {
                        (0, _) => f.write_str(&s)?,
                        (_, Some(rest)) => write!(f, " - {rest}")?,
                        (_, None) => write!(f, " + {s}")?,
                    }
                }
                Ok(())
            }
            Node::Mul(xs) => {
                if xs.is_empty() {
                    return f.write_str("1");
                }
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    // A leading rational coefficient needs no parentheses:
                    // "-3/4*q" parses as ((-3)/4)*q.
                    match (i, x.node()) {
                        (0, Node::Num(r)) => write_rational(f, r)?,
                        _ => write_factor(f, x)?,
                    }
                }
                Ok(())
            }
            Node::Pow(b, n) => {
                write_atomic(f, b)?;
                write!(f, "^{n}")
            }
            Node::Func(func, a) => write!(f, "{func}({a})"),
        }
    }
}
