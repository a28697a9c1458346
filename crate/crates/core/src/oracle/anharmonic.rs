use crate::scalar::Scalar;

use super::elliptic::jacobi_elliptic;
use super::OracleError;

/// Which elliptic function carries the motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Oscillation through `q = 0`.
    Cn,
    /// Oscillation inside one well of a double-well potential.
    Dn,
}

/// Closed-form motion in `V = αq²/2 + q⁴/4` started at rest from `q0`.
#[derive(Debug, Clone)]
pub struct AnharmonicSolution<S> {
    q0: S,
    nu: S,
    k: S,
    branch: Branch,
}

impl<S: Scalar> AnharmonicSolution<S> {
    pub fn new(alpha: &S, q0: &S) -> Result<Self, OracleError> {
        let prec = q0.precision();
        let zero = S::zero(prec);
        let two = S::from_i64(prec, 2);
        let q2 = q0.clone() * q0;
        let outer = alpha.clone() + &q2;
        if outer <= zero {
            return Err(OracleError::Unbounded {
                alpha: alpha.to_f64(),
                q0: q0.to_f64(),
            });
        }
        let energy_sign = alpha.clone() + q2.clone() / &two;
        if energy_sign.is_zero() {
            return Err(OracleError::Separatrix {
                alpha: alpha.to_f64(),
                q0: q0.to_f64(),
            });
        }
        let sqrt2 = two.sqrt();
        let (nu, k, branch) = if energy_sign > zero {
            let nu = outer.sqrt();
            let k = q0.abs() / (sqrt2 * &nu);
            (nu, k, Branch::Cn)
        } else {
            let nu = q0.abs() / &sqrt2;
            let k = (two * &outer).sqrt() / q0.abs();
            (nu, k, Branch::Dn)
        };
        Ok(AnharmonicSolution {
            q0: q0.clone(),
            nu,
            k,
            branch,
        })
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// Elliptic modulus of the solution.
    pub fn modulus(&self) -> &S {
        &self.k
    }

    /// Angular scale `ν` of the argument `νt`.
    pub fn frequency(&self) -> &S {
        &self.nu
    }

    /// `[q(t), p(t)]`
    pub fn at(&self, t: &S) -> Result<[S; 2], OracleError> {
        let e = jacobi_elliptic(&(self.nu.clone() * t), &self.k)?;
        let scale = self.q0.clone() * &self.nu;
        Ok(match self.branch {
            Branch::Cn => [self.q0.clone() * &e.cn, -(scale * &e.sn * &e.dn)],
            Branch::Dn => {
                let k2 = self.k.clone() * &self.k;
                [self.q0.clone() * &e.dn, -(scale * &k2 * &e.sn * &e.cn)]
            }
        })
    }
}

/// `[q(t), p(t)]` for `V = αq²/2 + q⁴/4` with `q(0) = q0`, `p(0) = 0`.
pub fn exact_anharmonic<S: Scalar>(t: &S, alpha: &S, q0: &S) -> Result<[S; 2], OracleError> {
    AnharmonicSolution::new(alpha, q0)?.at(t)
}
