use crate::integrator::{RunRecord, State};
use crate::scalar::Scalar;

use super::OracleError;

/// Euclidean phase-space distance between two trajectories on one grid.
pub fn global_error<S: Scalar>(numerical: &[State<S>], exact: &[State<S>]) -> Result<Vec<S>, OracleError> {
    if numerical.len() != exact.len() {
        return Err(OracleError::GridMismatch(format!(
            "{} points against {}",
            numerical.len(),
            exact.len()
        )));
    }
    numerical
        .iter()
        .zip(exact)
        .map(|(a, b)| {
            let (ta, tb) = (a.t.to_f64(), b.t.to_f64());
            if (ta - tb).abs() > 1e-9 * (1.0 + ta.abs()) {
                return Err(OracleError::GridMismatch(format!("t = {ta} against t = {tb}")));
            }
            distance(&a.z, &b.z)
        })
        .collect()
}

/// Global error of recorded points against a closed-form solution.
pub fn global_error_with<S, F>(records: &[RunRecord<S>], mut exact: F) -> Result<Vec<S>, OracleError>
where
    S: Scalar,
    F: FnMut(&S) -> Result<Vec<S>, OracleError>,
{
    records
        .iter()
        .map(|r| distance(&r.z, &exact(&r.t)?))
        .collect()
}

fn distance<S: Scalar>(a: &[S], b: &[S]) -> Result<S, OracleError> {
    if a.len() != b.len() || a.is_empty() {
        return Err(OracleError::Dimension {
            expected: b.len(),
            got: a.len(),
        });
    }
    let mut sum = S::zero(a[0].precision());
    for (x, y) in a.iter().zip(b) {
        let d = x.clone() - y;
        sum += d.clone() * &d;
    }
    Ok(sum.sqrt())
}

/// `C` in `ε ≈ C τ^N t`: the least-squares slope through the origin of
/// error against time, divided by `τ^N`.
pub fn fit_error_constant(times: &[f64], errors: &[f64], tau: f64, order: usize) -> Result<f64, OracleError> {
    if times.len() != errors.len() {
        return Err(OracleError::GridMismatch(format!(
            "{} times against {} errors",
            times.len(),
            errors.len()
        )));
    }
    let stt: f64 = times.iter().map(|t| t * t).sum();
    if stt == 0.0 || !stt.is_finite() {
        return Err(OracleError::Fit("no nonzero times"));
    }
    let ste: f64 = times.iter().zip(errors).map(|(t, e)| t * e).sum();
    Ok(ste / stt / tau.abs().powi(order as i32))
}

/// Ordinary least-squares line with its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit, OracleError> {
    if x.len() != y.len() {
        return Err(OracleError::GridMismatch(format!("{} x against {} y", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(OracleError::Fit("need at least two points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(OracleError::Fit("x values are all equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit { slope, intercept, r2 })
}

/// Exponent `b` of `y ≈ a x^b` from a straight-line fit in log-log space.
/// Points with a non-positive coordinate are skipped.
pub fn power_law_exponent(x: &[f64], y: &[f64]) -> Result<LinearFit, OracleError> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    linear_fit(&lx, &ly)
}

/// Running maximum, the upper envelope of an oscillating error curve.
pub fn running_max(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .scan(f64::NEG_INFINITY, |m, v| {
            *m = m.max(*v);
            Some(*m)
        })
        .collect()
}
