use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};

use super::{view, Example, Loss};
use crate::error::{check_dim, domain, invalid, Result};

/// Logistic negative log-likelihood `log(1 + e^{θᵀx}) − y θᵀx` for
/// `x ∈ [-1,1]^m`, `y ∈ {0,1}`.
#[derive(Debug, Clone, Copy)]
pub struct LogisticLoss {
    dim: usize,
}

impl LogisticLoss {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Loss for LogisticLoss {
    fn dim(&self) -> usize {
        self.dim
    }

    fn validate(&self, ex: &Example) -> Result<()> {
        check_dim(self.dim, ex.features.len())?;
        if ex.features.iter().any(|v| !(v.abs() <= 1.0)) {
            return Err(domain("logistic features must lie in [-1, 1]"));
        }
        if ex.label != 0.0 && ex.label != 1.0 {
            return Err(domain(format!("logistic label {} is not 0 or 1", ex.label)));
        }
        Ok(())
    }

    fn value(&self, theta: &[f64], ex: &Example) -> f64 {
        let z = dot(theta, &ex.features);
        softplus(z) - ex.label * z
    }

    fn gradient(&self, theta: &[f64], ex: &Example) -> Vec<f64> {
        let w = sigmoid(dot(theta, &ex.features)) - ex.label;
        ex.features.iter().map(|x| w * x).collect()
    }

    fn hessian(&self, theta: &[f64], ex: &Example) -> DMatrix<f64> {
        let s = sigmoid(dot(theta, &ex.features));
        let x = view(&ex.features);
        s * (1.0 - s) * x * x.transpose()
    }

    fn accumulate(
        &self,
        theta: &DVector<f64>,
        ex: &Example,
        grad: &mut DVector<f64>,
        hess: &mut DMatrix<f64>,
    ) -> f64 {
        let x = view(&ex.features);
        let z = theta.dot(&x);
        let s = sigmoid(z);
        grad.axpy(s - ex.label, &x, 1.0);
        hess.ger(s * (1.0 - s), &x, &x, 1.0);
        softplus(z) - ex.label * z
    }

    fn random_example(&self, rng: &mut dyn RngCore) -> Example {
        let x = (0..self.dim)
            .map(|_| rng.random_range(-1.0..=1.0))
            .collect();
        let y = if rng.random::<bool>() { 1.0 } else { 0.0 };
        Example::new(x, y)
    }
}

/// Loss, gradient and Hessian of one logistic example.
pub fn logistic_loss_parts(
    theta: &[f64],
    x: &[f64],
    y: f64,
) -> Result<(f64, Vec<f64>, DMatrix<f64>)> {
    let loss = LogisticLoss::new(theta.len());
    let ex = Example::new(x.to_vec(), y);
    loss.validate(&ex)?;
    Ok((
        loss.value(theta, &ex),
        loss.gradient(theta, &ex),
        loss.hessian(theta, &ex),
    ))
}

/// Gradient sensitivity of the logistic loss on `[-1,1]^m`: `2`, `2√m`, `2m`
/// for ℓ∞, ℓ2, ℓ1.
pub fn logistic_sensitivity(m: usize, p: f64) -> Result<f64> {
    if m == 0 {
        return Err(invalid("dimension must be positive"));
    }
    let mf = m as f64;
    if p.is_infinite() {
        Ok(2.0)
    } else if p == 2.0 {
        Ok(2.0 * mf.sqrt())
    } else if p == 1.0 {
        Ok(2.0 * mf)
    } else {
        Err(invalid(format!("no logistic sensitivity for ℓ{p}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn values_at_zero() {
        let x = [0.3, -0.8, 1.0];
        for y in [0.0, 1.0] {
            let (l, g, _) = logistic_loss_parts(&[0.0; 3], &x, y).unwrap();
            assert!((l - 2f64.ln()).abs() < 1e-15);
            for (gi, xi) in g.iter().zip(&x) {
                assert!((gi - (0.5 - y) * xi).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn hessian_eigenvalue_bound() {
        let loss = LogisticLoss::new(7);
        let mut rng = RngStream::new(1, 0).rng();
        let mut worst: f64 = 0.0;
        for _ in 0..10_000 {
            let theta: Vec<f64> = (0..7).map(|_| rng.random_range(-2.0..2.0)).collect();
            let ex = loss.random_example(&mut rng);
            worst = worst.max(loss.hessian(&theta, &ex).symmetric_eigenvalues().max());
        }
        assert!(worst <= 7.0 / 4.0);
        // attained at θ = 0, x = 1
        let ones = Example::new(vec![1.0; 7], 0.0);
        let top = loss.hessian(&[0.0; 7], &ones).symmetric_eigenvalues().max();
        assert!((top - 1.75).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let loss = LogisticLoss::new(5);
        let mut rng = RngStream::new(2, 0).rng();
        let h = 1e-5;
        for _ in 0..100 {
            let theta: Vec<f64> = (0..5).map(|_| rng.random_range(-3.0..3.0)).collect();
            let ex = loss.random_example(&mut rng);
            let g = loss.gradient(&theta, &ex);
            for j in 0..5 {
                let mut tp = theta.clone();
                let mut tm = theta.clone();
                tp[j] += h;
                tm[j] -= h;
                let fd = (loss.value(&tp, &ex) - loss.value(&tm, &ex)) / (2.0 * h);
                assert!(
                    (fd - g[j]).abs() <= 1e-6 * (1.0 + g[j].abs()),
                    "{fd} vs {}",
                    g[j]
                );
            }
        }
    }

    #[test]
    fn accumulate_matches_parts() {
        let loss = LogisticLoss::new(3);
        let theta = DVector::from_vec(vec![0.4, -1.2, 2.0]);
        let ex = Example::new(vec![0.5, -0.25, 1.0], 1.0);
        let mut g = DVector::zeros(3);
        let mut h = DMatrix::zeros(3, 3);
        let v = loss.accumulate(&theta, &ex, &mut g, &mut h);
        assert!((v - loss.value(theta.as_slice(), &ex)).abs() < 1e-15);
        assert!((g - DVector::from_vec(loss.gradient(theta.as_slice(), &ex))).norm() < 1e-15);
        assert!((h - loss.hessian(theta.as_slice(), &ex)).norm() < 1e-15);
    }

    #[test]
    fn sensitivities() {
        assert_eq!(logistic_sensitivity(7, f64::INFINITY).unwrap(), 2.0);
        assert!((logistic_sensitivity(7, 2.0).unwrap() - 2.0 * 7f64.sqrt()).abs() < 1e-15);
        assert!((logistic_sensitivity(7, 2.0).unwrap() - 5.2915).abs() < 1e-4);
        assert_eq!(logistic_sensitivity(7, 1.0).unwrap(), 14.0);
        assert!(logistic_sensitivity(7, 3.0).is_err());
    }

    #[test]
    fn domain_checks() {
        assert!(logistic_loss_parts(&[0.0, 0.0], &[1.1, 0.0], 1.0).is_err());
        assert!(logistic_loss_parts(&[0.0, 0.0], &[0.1, 0.0], 0.5).is_err());
    }

    #[test]
    fn stable_for_large_margins() {
        let ex = Example::new(vec![1.0], 0.0);
        let loss = LogisticLoss::new(1);
        assert!((loss.value(&[800.0], &ex) - 800.0).abs() < 1e-9);
        assert!(loss.value(&[-800.0], &ex) >= 0.0);
    }
}
