//! Effective Hamiltonian corrections and generating-function coefficients.
//!
//! Each term is a rational combination of operator words applied to `V`.
//! Words are written left to right and applied right to left, so `BDD`
//! stands for `D̄ D² V`. Letters: `D` is `p·∂`, `B` is `D̄`, `C` is `𝒟`.
//! Intermediate words are shared through a cache while a set of terms is
//! built.

use std::collections::HashMap;
use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::operators::{ModelSpec, Operators};
use crate::symkernel::canon::Poly;
use crate::symkernel::Expr;

/// An even integration order from 2 to 8.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Order(u8);

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("order must be one of 2, 4, 6, 8 (got {0})")]
pub struct OrderError(pub u32);

impl Order {
    pub const TWO: Order = Order(2);
    pub const FOUR: Order = Order(4);
    pub const SIX: Order = Order(6);
    pub const EIGHT: Order = Order(8);
    pub const ALL: [Order; 4] = [Order::TWO, Order::FOUR, Order::SIX, Order::EIGHT];

    pub fn new(n: u32) -> Result<Order, OrderError> {
        match n {
            2 | 4 | 6 | 8 => Ok(Order(n as u8)),
            _ => Err(OrderError(n)),
        }
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// Orders from 2 up to and including `self`.
    pub fn up_to(self) -> impl Iterator<Item = Order> {
        Order::ALL.into_iter().filter(move |o| *o <= self)
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::str::FromStr for Order {
    type Err = OrderError;

    fn from_str(s: &str) -> Result<Order, OrderError> {
        let n: u32 = s.trim().parse().map_err(|_| OrderError(0))?;
        Order::new(n)
    }
}

/// Highest generating-function and potential-correction indices used by an
/// order-`n` scheme: `G_0..G_n` and `V_0..V_{n-2}`.
pub fn truncation_for_order(n: Order) -> (usize, usize) {
    (n.get(), n.get() - 2)
}

type Word = (i64, &'static str);

const T2: (i64, &[Word]) = (-12, &[(1, "DD")]);
const T4: (i64, &[Word]) = (720, &[(1, "DDDD"), (-9, "BDD"), (3, "DB")]);
const T6: (i64, &[Word]) = (
    -60480,
    &[
        (2, "DDDDDD"),
        (-40, "BDDDD"),
        (46, "DBDDD"),
        (-15, "DDBDD"),
        (54, "BBDD"),
        (-9, "BDBD"),
        (-42, "DBBD"),
        (12, "DDBB"),
    ],
);

const V2: (i64, &[Word]) = (24, &[(1, "B")]);
const V4: (i64, &[Word]) = (480, &[(1, "BB")]);
// The `D̄₃` part of V6 is added separately.
const V6: (i64, &[Word]) = (161280, &[(17, "BBB")]);
const V6_DBAR3: i64 = -10;

const G3: (i64, &[Word]) = (-12, &[(1, "CC")]);
const G4: (i64, &[Word]) = (-24, &[(1, "CCC")]);
const G5: (i64, &[Word]) = (-240, &[(3, "CCCC"), (3, "BCC"), (-1, "CBC")]);
const G6: (i64, &[Word]) = (-720, &[(2, "CCCCC"), (8, "BCCC"), (-5, "CBCC")]);
const G7: (i64, &[Word]) = (
    -20160,
    &[
        (10, "CCCCCC"),
        (10, "BCCCC"),
        (90, "CBCCC"),
        (-75, "CCBCC"),
        (18, "BBCC"),
        (-3, "BCBC"),
        (-14, "CBBC"),
        (4, "CCBB"),
    ],
);
const G8: (i64, &[Word]) = (
    -40320,
    &[
        (3, "CCCCCCC"),
        (-87, "BCCCCC"),
        (231, "CBCCCC"),
        (-133, "CCBCCC"),
        (63, "BBCCC"),
        (-3, "CBBCC"),
        (-21, "CCBBC"),
        (4, "CCCBB"),
        (-63, "BCBCC"),
        (25, "CBCBC"),
    ],
);

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Evaluates operator words against one model, caching every suffix.
pub(crate) struct WordCache {
    ops: Operators,
    words: HashMap<String, Poly>,
    dbar3: Option<Poly>,
}

impl WordCache {
    pub(crate) fn new(m: &ModelSpec) -> WordCache {
        let ops = Operators::new(m);
        let mut words = HashMap::new();
        words.insert(String::new(), ops.potential().clone());
        WordCache { ops, words, dbar3: None }
    }

    pub(crate) fn word(&mut self, w: &str) -> Poly {
        if let Some(p) = self.words.get(w) {
            return p.clone();
        }
        let inner = self.word(&w[1..]);
        let out = match w.as_bytes()[0] {
            b'D' => self.ops.d(&inner),
            b'B' => self.ops.dbar(&inner),
            b'C' => self.ops.cal_d(&inner),
            c => unreachable!("unknown operator letter {}", c as char),
        };
        self.words.insert(w.to_string(), out.clone());
        out
    }

    fn dbar3(&mut self) -> Poly {
        if self.dbar3.is_none() {
            self.dbar3 = Some(self.ops.dbar3());
        }
        self.dbar3.clone().unwrap()
    }

    fn combine(&mut self, (den, words): (i64, &[Word])) -> Poly {
        let mut out = Poly::zero();
        for &(c, w) in words {
            let p = self.word(w);
            out.add_scaled(&p, &ratio(c, den));
        }
        out
    }

    pub(crate) fn t_term(&mut self, k: usize) -> Poly {
        match k {
            2 => self.combine(T2),
            4 => self.combine(T4),
            6 => self.combine(T6),
            _ => panic!("no kinetic correction of index {k}"),
        }
    }

    pub(crate) fn v_term(&mut self, k: usize) -> Poly {
        match k {
            0 => self.word(""),
            2 => self.combine(V2),
            4 => self.combine(V4),
            6 => {
                let mut out = self.combine(V6);
                let d3 = self.dbar3();
                out.add_scaled(&d3, &ratio(V6_DBAR3, V6.0));
                out
            }
            _ => panic!("no potential correction of index {k}"),
        }
    }

    pub(crate) fn g_term(&mut self, k: usize, m: &ModelSpec) -> Poly {
        let syms = m.symbols();
        match k {
            0 => {
                let mut out = Poly::zero();
                for (q, p) in syms.coords().iter().zip(syms.new_momenta()) {
                    out.add_assign(&Poly::symbol(q).mul(&Poly::symbol(p)));
                }
                out
            }
            1 => {
                let mut out = Poly::zero();
                for p in syms.new_momenta() {
                    let s = Poly::symbol(p);
                    out.add_scaled(&s.mul(&s), &ratio(1, 2));
                }
                out
            }
            2 => Poly::zero(),
            3 => self.combine(G3),
            4 => self.combine(G4),
            5 => self.combine(G5),
            6 => self.combine(G6),
            7 => self.combine(G7),
            8 => self.combine(G8),
            _ => panic!("no generating-function coefficient of index {k}"),
        }
    }
}

/// Kinetic energy `½|p|²`.
pub(crate) fn kinetic(m: &ModelSpec) -> Poly {
    let mut out = Poly::zero();
    for p in m.symbols().momenta() {
        let s = Poly::symbol(p);
        out.add_scaled(&s.mul(&s), &ratio(1, 2));
    }
    out
}

/// The symbolic terms needed by schemes up to some order.
///
/// `v[j]` is `V_{2j}` and `g[k]` is `G_k`. The kinetic corrections
/// `t = [T2, T4, T6]` are diagnostics only and are built when asked for.
#[derive(Debug, Clone)]
pub struct EffectiveTerms {
    pub maxorder: Order,
    pub t0: Expr,
    pub t: Vec<Expr>,
    pub v: Vec<Expr>,
    pub g: Vec<Expr>,
    pub timings: Vec<(String, Duration)>,
    pub(crate) v_poly: Vec<Poly>,
    pub(crate) g_poly: Vec<Poly>,
}

impl EffectiveTerms {
    pub fn build(m: &ModelSpec, maxorder: Order, with_kinetic: bool) -> EffectiveTerms {
        let (gmax, vmax) = truncation_for_order(maxorder);
        let mut cache = WordCache::new(m);
        let mut timings = Vec::new();

        if vmax >= 6 {
            let start = Instant::now();
            cache.dbar3();
            timings.push(("D̄₃V".to_string(), start.elapsed()));
        }
        let start = Instant::now();
        let v_poly: Vec<Poly> = (0..=vmax).step_by(2).map(|k| cache.v_term(k)).collect();
        timings.push(("potential corrections".to_string(), start.elapsed()));

        let start = Instant::now();
        let g_poly: Vec<Poly> = (0..=gmax).map(|k| cache.g_term(k, m)).collect();
        timings.push(("generating function".to_string(), start.elapsed()));

        let t = if with_kinetic {
            let start = Instant::now();
            let t: Vec<Expr> = [2, 4, 6].iter().map(|&k| cache.t_term(k).to_expr()).collect();
            timings.push(("kinetic corrections".to_string(), start.elapsed()));
            t
        } else {
            Vec::new()
        };

        EffectiveTerms {
            maxorder,
            t0: kinetic(m).to_expr(),
            t,
            v: v_poly.iter().map(Poly::to_expr).collect(),
            g: g_poly.iter().map(Poly::to_expr).collect(),
            timings,
            v_poly,
            g_poly,
        }
    }

    /// Total expression size of the potential corrections and the
    /// generating-function coefficients, in tree nodes.
    pub fn node_count(&self) -> usize {
        self.v.iter().chain(&self.g).map(Expr::node_count).sum()
    }
}

/// `[V0, V2, V4, V6]`
pub fn make_vk(m: &ModelSpec) -> Vec<Expr> {
    let mut c = WordCache::new(m);
    [0, 2, 4, 6].iter().map(|&k| c.v_term(k).to_expr()).collect()
}

/// `[T0, T2, T4, T6]`; everything past `T0` is zero unless `enabled`.
pub fn make_tk(m: &ModelSpec, enabled: bool) -> Vec<Expr> {
    let mut out = vec![kinetic(m).to_expr()];
    if enabled {
        let mut c = WordCache::new(m);
        out.extend([2, 4, 6].iter().map(|&k| c.t_term(k).to_expr()));
    } else {
        out.extend([Expr::zero(), Expr::zero(), Expr::zero()]);
    }
    out
}

/// `[G0, ..., G8]`
pub fn make_gk(m: &ModelSpec) -> Vec<Expr> {
    let mut c = WordCache::new(m);
    (0..=8).map(|k| c.g_term(k, m).to_expr()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::{evaluate, parse_expression, Symbol};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn quartic() -> ModelSpec {
        ModelSpec::parse("quartic", &["q"], &["p"], &[], "q^4/4").unwrap()
    }

    fn e(m: &ModelSpec, s: &str) -> Expr {
        parse_expression(s, m.symbols()).unwrap()
    }

    #[test]
    fn order_values() {
        assert!(Order::new(3).is_err());
        assert!(Order::new(10).is_err());
        assert_eq!(Order::new(6).unwrap(), Order::SIX);
        assert_eq!("8".parse::<Order>().unwrap(), Order::EIGHT);
        assert_eq!(truncation_for_order(Order::EIGHT), (8, 6));
        assert_eq!(truncation_for_order(Order::TWO), (2, 0));
        assert_eq!(Order::SIX.up_to().count(), 3);
    }

    #[test]
    fn quartic_potential_corrections() {
        let m = quartic();
        let v = make_vk(&m);
        assert_eq!(v[0], e(&m, "q^4/4"));
        assert_eq!(v[1], e(&m, "q^6/24"));
        assert_eq!(v[2], e(&m, "q^8/80"));
        // (17·6 q^10 - 10·6 q^10) / 161280
        assert_eq!(v[3], e(&m, "3*q^10/640"));
    }

    #[test]
    fn quartic_generating_function() {
        let m = quartic();
        let g = make_gk(&m);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], e(&m, "q*P"));
        assert_eq!(g[1], e(&m, "P^2/2"));
        assert!(g[2].is_zero());
        assert_eq!(g[3], e(&m, "-P^2*q^2/4"));
        assert_eq!(g[4], e(&m, "-P^3*q/4"));
        for k in 5..=8 {
            assert!(!g[k].is_zero(), "G{k}");
        }
    }

    #[test]
    fn kinetic_corrections() {
        let m = quartic();
        let t = make_tk(&m, true);
        assert_eq!(t[0], e(&m, "p^2/2"));
        assert_eq!(t[1], e(&m, "-p^2*q^2/4"));
        let off = make_tk(&m, false);
        assert!(off[1].is_zero() && off[3].is_zero());

        let h = ModelSpec::parse("harmonic", &["q"], &["p"], &[], "q^2/2").unwrap();
        let t = make_tk(&h, true);
        assert_eq!(t[2], e(&h, "p*q/120"));
    }

    #[test]
    fn build_respects_truncation() {
        let m = quartic();
        let t2 = EffectiveTerms::build(&m, Order::TWO, false);
        assert_eq!(t2.g.len(), 3);
        assert_eq!(t2.v.len(), 1);
        assert!(t2.t.is_empty());
        let t8 = EffectiveTerms::build(&m, Order::EIGHT, true);
        assert_eq!(t8.g.len(), 9);
        assert_eq!(t8.v.len(), 4);
        assert_eq!(t8.t.len(), 3);
        assert_eq!(t8.g, make_gk(&m));
        assert_eq!(t8.v, make_vk(&m));
    }

    // Unsimplified compositions of single applications, compared numerically.
    struct Literal<'a> {
        m: &'a ModelSpec,
        v: Expr,
    }

    impl Literal<'_> {
        fn apply(&self, letter: char, x: &Expr) -> Expr {
            let syms = self.m.symbols();
            let mut terms = Vec::new();
            for (a, q) in syms.coords().iter().enumerate() {
                let w = match letter {
                    'D' => Expr::sym(&syms.momenta()[a]),
                    'C' => Expr::sym(&syms.new_momenta()[a]),
                    'B' => self.v.diff(q),
                    _ => unreachable!(),
                };
                terms.push(Expr::mul_raw(vec![w, x.diff(q)]));
            }
            Expr::add_raw(terms)
        }

        fn word(&self, w: &str) -> Expr {
            w.chars().rev().fold(self.v.clone(), |acc, c| self.apply(c, &acc))
        }

        fn combo(&self, (den, words): (i64, &[Word])) -> Expr {
            let terms = words
                .iter()
                .map(|&(c, w)| Expr::mul_raw(vec![Expr::ratio(c, den), self.word(w)]))
                .collect();
            Expr::add_raw(terms)
        }
    }

    #[test]
    fn higher_coefficients_match_literal_composition() {
        let m = ModelSpec::parse(
            "two",
            &["x", "y"],
            &["px", "py"],
            &[],
            "x^2/2 + y^2 + x^3*y/3 - x*y^2/5 + x^4/4",
        )
        .unwrap();
        let lit = Literal {
            m: &m,
            v: m.potential().clone(),
        };
        let g = make_gk(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (k, table) in [(5, G5), (6, G6), (7, G7), (8, G8)] {
            let reference = lit.combo(table);
            for _ in 0..20 {
                let env: HashMap<Symbol, f64> = ["x", "y", "Px", "Py"]
                    .iter()
                    .map(|n| (Symbol::new(n), rng.gen_range(-1.0..1.0)))
                    .collect();
                let a = evaluate(&g[k], &env, ()).unwrap();
                let b = evaluate(&reference, &env, ()).unwrap();
                assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "G{k}: {a} vs {b}");
            }
        }
    }
}
