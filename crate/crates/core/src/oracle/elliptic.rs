use crate::scalar::Scalar;

use super::OracleError;

/// `sn(u, k)`, `cn(u, k)` and `dn(u, k)` at one argument.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticTriple<S> {
    pub sn: S,
    pub cn: S,
    pub dn: S,
}

/// Jacobi elliptic functions for modulus `0 ≤ k < 1`.
///
/// Descending Gauss/Landen transformation via the arithmetic-geometric mean,
/// in the form due to Bulirsch: `dn` comes out as a ratio of positive
/// quantities, so it keeps full relative accuracy as `k → 1`. Works at the
/// precision of the arguments.
pub fn jacobi_elliptic<S: Scalar>(u: &S, k: &S) -> Result<EllipticTriple<S>, OracleError> {
    let prec = u.precision();
    let zero = S::zero(prec);
    let one = S::one(prec);
    if !(k >= &zero && k < &one) {
        return Err(OracleError::Modulus(k.to_f64()));
    }
    if !u.is_finite() {
        return Err(OracleError::NonFinite);
    }
    let two = S::from_i64(prec, 2);
    let tol = S::epsilon(prec).sqrt();

    let mut em: Vec<S> = Vec::new();
    let mut en: Vec<S> = Vec::new();
    let mut a = one.clone();
    let mut emc = one.clone() - k.clone() * k;
    let mut c;
    loop {
        em.push(a.clone());
        emc = emc.sqrt();
        en.push(emc.clone());
        c = (a.clone() + &emc) / &two;
        if (a.clone() - &emc).abs() <= tol.clone() * &a || em.len() >= 64 {
            break;
        }
        emc *= &a;
        a = c.clone();
    }

    let v = u.clone() * &c;
    let mut sn = v.sin();
    let mut cn = v.cos();
    let mut dn = one.clone();
    if !sn.is_zero() {
        let mut a = cn.clone() / &sn;
        c *= &a;
        for (b, e) in em.iter().zip(&en).rev() {
            a *= &c;
            c *= &dn;
            dn = (e.clone() + &a) / (b.clone() + &a);
            a = c.clone() / b;
        }
        let r = one.clone() / (c.clone() * &c + &one).sqrt();
        sn = if sn >= zero { r } else { -r };
        cn = c * &sn;
    }
    Ok(EllipticTriple { sn, cn, dn })
}
