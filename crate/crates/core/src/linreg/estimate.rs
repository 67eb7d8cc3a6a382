use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{RegressionDataset, Slot, StatisticVector};
use crate::error::{domain, invalid, Result};

/// Solve `A x = b` with the Moore–Penrose pseudoinverse of `A`, dropping
/// singular values at or below `(rows) · ε_machine · σ_max`. A zero matrix
/// yields the zero vector.
pub fn pseudo_inverse_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let mut x = DVector::zeros(a.ncols());
    if sigma_max <= 0.0 || !sigma_max.is_finite() {
        return x;
    }
    let tol = a.nrows().max(a.ncols()) as f64 * f64::EPSILON * sigma_max;
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > tol {
            let coef = u.column(i).dot(b) / s;
            x.axpy(coef, &v_t.row(i).transpose(), 1.0);
        }
    }
    x
}

/// Unpack a (possibly sanitized) statistic into `XᵀX` and `XᵀY`, restoring
/// the constant `n` entry and halving the doubled squared sums.
pub fn unpack_statistic(t: &StatisticVector, n: usize) -> (DMatrix<f64>, DVector<f64>) {
    let p = t.predictors;
    let mut xtx = DMatrix::zeros(p + 1, p + 1);
    let mut xty = DVector::zeros(p + 1);
    xtx[(0, 0)] = n as f64;
    for (slot, &v) in t.layout().iter().zip(&t.values) {
        match *slot {
            Slot::Sum(j) => {
                xtx[(0, j)] = v;
                xtx[(j, 0)] = v;
            }
            Slot::SquareSum(j) => xtx[(j, j)] = v / 2.0,
            Slot::CrossSum(j, k) => {
                xtx[(j, k)] = v;
                xtx[(k, j)] = v;
            }
            Slot::ResponseSum => xty[0] = v,
            Slot::ResponseCross(j) => xty[j] = v,
        }
    }
    (xtx, xty)
}

/// Coefficient estimate `(XᵀX)⁺ XᵀY` from a statistic vector.
pub fn dp_estimate(t: &StatisticVector, n: usize) -> Vec<f64> {
    let (xtx, xty) = unpack_statistic(t, n);
    pseudo_inverse_solve(&xtx, &xty).iter().copied().collect()
}

/// Ordinary least squares fit with classical standard errors.
#[derive(Debug, Clone)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub sigma2: f64,
    pub df: usize,
}

impl OlsFit {
    /// Two-sided t-intervals at the given confidence level.
    pub fn confidence_intervals(&self, level: f64) -> Result<Vec<(f64, f64)>> {
        if !(level > 0.0 && level < 1.0) {
            return Err(invalid(format!(
                "confidence level must lie in (0, 1), got {level}"
            )));
        }
        let t = StudentsT::new(0.0, 1.0, self.df as f64)
            .map_err(|e| invalid(e.to_string()))?
            .inverse_cdf(0.5 + level / 2.0);
        Ok(self
            .coefficients
            .iter()
            .zip(&self.std_errors)
            .map(|(b, se)| (b - t * se, b + t * se))
            .collect())
    }
}

pub fn ols(data: &RegressionDataset) -> Result<OlsFit> {
    let x = data.design();
    let y = data.response();
    let k = x.ncols();
    if data.n() <= k {
        return Err(domain(format!(
            "OLS needs more than {k} rows, got {}",
            data.n()
        )));
    }
    let chol = x
        .tr_mul(x)
        .cholesky()
        .ok_or_else(|| domain("design matrix is rank deficient"))?;
    let beta = chol.solve(&x.tr_mul(y));
    let resid = y - x * &beta;
    let df = data.n() - k;
    let sigma2 = resid.norm_squared() / df as f64;
    let inv = chol.inverse();
    Ok(OlsFit {
        coefficients: beta.iter().copied().collect(),
        std_errors: (0..k).map(|j| (sigma2 * inv[(j, j)]).sqrt()).collect(),
        sigma2,
        df,
    })
}
