use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::operators::ModelSpec;
use crate::scalar::Scalar;
use crate::symkernel::{Expr, SymbolTable};

use super::anharmonic::exact_anharmonic;
use super::OracleError;

const TRIPLES: [(i64, i64, i64); 5] = [(3, 4, 5), (5, 12, 13), (8, 15, 17), (7, 24, 25), (20, 21, 29)];

/// `N` anharmonic modes `Q = R q` mixed by an exactly orthogonal rational
/// matrix, so the model is integrable with a known solution while every
/// coordinate interacts with its neighbours.
#[derive(Debug, Clone)]
pub struct CoupledModel {
    pub model: ModelSpec,
    /// Row `a` gives `Q_a` in terms of `q`.
    pub rotation: Vec<Vec<BigRational>>,
    /// Quadratic coefficient of each mode.
    pub alphas: Vec<BigRational>,
    seed: u64,
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// A random Givens rotation with Pythagorean-triple entries, acting on
/// coordinates `i` and `j` of `m` from the left.
fn rotate(m: &mut [Vec<BigRational>], i: usize, j: usize, rng: &mut ChaCha8Rng) {
    let (a, b, h) = TRIPLES[rng.gen_range(0..TRIPLES.len())];
    let (c, s) = if rng.gen() { (ratio(a, h), ratio(b, h)) } else { (ratio(b, h), ratio(a, h)) };
    for col in 0..m.len() {
        let x = m[i][col].clone();
        let y = m[j][col].clone();
        m[i][col] = &c * &x - &s * &y;
        m[j][col] = &s * x + &c * y;
    }
}

fn rotation(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<BigRational>> {
    let mut r: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    // Blocks of three coordinates keep every Q_a within a window of three
    // neighbouring q's.
    let mut start = 0;
    while start < n {
        let len = (n - start).min(3);
        if len >= 2 {
            rotate(&mut r, start, start + 1, rng);
        }
        if len == 3 {
            rotate(&mut r, start + 1, start + 2, rng);
        }
        start += len;
    }
    for row in r.iter_mut() {
        if rng.gen() {
            for x in row.iter_mut() {
                *x = -x.clone();
            }
        }
    }
    r
}

/// Builds the `n`-mode model for `seed`. Coordinates are `q0..`, momenta
/// `p0..`.
pub fn build_coupled_model(n: usize, seed: u64) -> Result<CoupledModel, OracleError> {
    if n == 0 {
        return Err(OracleError::Dimension { expected: 1, got: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rotation = rotation(n, &mut rng);
    let alphas: Vec<BigRational> = (0..n).map(|_| ratio(rng.gen_range(8..=32), 16)).collect();

    let coords: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
    let momenta: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let c: Vec<&str> = coords.iter().map(String::as_str).collect();
    let p: Vec<&str> = momenta.iter().map(String::as_str).collect();
    let symbols = SymbolTable::new(&c, &p, &[]).expect("generated names are valid");

    let mut terms = Vec::new();
    for (row, alpha) in rotation.iter().zip(&alphas) {
        let mode = Expr::add_raw(
            row.iter()
                .zip(symbols.coords())
                .filter(|(r, _)| !r.is_zero())
                .map(|(r, q)| Expr::mul_raw(vec![Expr::num(r.clone()), Expr::sym(q)]))
                .collect(),
        );
        terms.push(Expr::mul_raw(vec![Expr::num(alpha / BigRational::from_integer(2.into())), Expr::pow_raw(mode.clone(), 2)]));
        terms.push(Expr::mul_raw(vec![Expr::ratio(1, 4), Expr::pow_raw(mode, 4)]));
    }
    let model = ModelSpec::new(&format!("coupled{n}"), symbols, Expr::add_raw(terms))
        .expect("generated model is valid");
    Ok(CoupledModel {
        model,
        rotation,
        alphas,
        seed,
    })
}

impl CoupledModel {
    pub fn n(&self) -> usize {
        self.alphas.len()
    }

    /// Mode amplitudes `Q_a(0)`, drawn from the model seed.
    pub fn amplitudes(&self) -> Vec<BigRational> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(1);
        (0..self.n())
            .map(|_| {
                let v = ratio(rng.gen_range(5..=20), 20);
                if rng.gen() {
                    -v
                } else {
                    v
                }
            })
            .collect()
    }

    fn to_coordinates<S: Scalar>(&self, modes: &[S], prec: S::Precision) -> Vec<S> {
        (0..self.n())
            .map(|b| {
                let mut acc = S::zero(prec);
                for (a, m) in modes.iter().enumerate() {
                    let r = &self.rotation[a][b];
                    if !r.is_zero() {
                        acc += S::from_rational(prec, r) * m;
                    }
                }
                acc
            })
            .collect()
    }

    /// `[q, p]` at rest with the given mode amplitudes.
    pub fn initial_state<S: Scalar>(&self, amplitudes: &[BigRational], prec: S::Precision) -> Vec<S> {
        let modes: Vec<S> = amplitudes.iter().map(|a| S::from_rational(prec, a)).collect();
        let mut z = self.to_coordinates(&modes, prec);
        z.extend((0..self.n()).map(|_| S::zero(prec)));
        z
    }

    /// Closed-form `[q(t), p(t)]` from rest with the given mode amplitudes.
    pub fn exact<S: Scalar>(&self, t: &S, amplitudes: &[BigRational]) -> Result<Vec<S>, OracleError> {
        exact_coupled(t, self, amplitudes)
    }
}

/// Closed-form state of a coupled model; each mode evolves on its own.
pub fn exact_coupled<S: Scalar>(t: &S, model: &CoupledModel, amplitudes: &[BigRational]) -> Result<Vec<S>, OracleError> {
    if amplitudes.len() != model.n() {
        return Err(OracleError::Dimension {
            expected: model.n(),
            got: amplitudes.len(),
        });
    }
    let prec = t.precision();
    let mut q_modes = Vec::with_capacity(model.n());
    let mut p_modes = Vec::with_capacity(model.n());
    for (alpha, amp) in model.alphas.iter().zip(amplitudes) {
        let [q, p] = exact_anharmonic(t, &S::from_rational(prec, alpha), &S::from_rational(prec, amp))?;
        q_modes.push(q);
        p_modes.push(p);
    }
    let mut z = model.to_coordinates(&q_modes, prec);
    z.extend(model.to_coordinates(&p_modes, prec));
    Ok(z)
}
