//! Objective perturbation for empirical risk minimization.
//!
//! Minimizes `(1/n) Σ ℓ(θ; xᵢ) + (γ/2n) θᵀθ + Vᵀθ / n` where `V` is drawn
//! from a K-norm mechanism with budget `εq` and `γ = λ / (e^{ε(1-q)} - 1)`.
//! The parameter space is all of ℝ^m and no extra regularizer is used.

mod io;
mod logistic;
pub mod newton;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, DVectorView};
use rand::{Rng, RngCore};

use crate::error::{domain, invalid, Result};
use crate::geometry::NormBall;
use crate::rng::RngStream;
use crate::sampling::MechanismConfig;

pub use io::{examples_from_csv, theta_csv_row};
pub use logistic::{logistic_loss_parts, logistic_sensitivity, LogisticLoss};
use newton::{minimize, NewtonOptions, NewtonResult, SmoothObjective};

/// One training example: a feature vector and a scalar label.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub features: Vec<f64>,
    pub label: f64,
}

impl Example {
    pub fn new(features: Vec<f64>, label: f64) -> Self {
        Self { features, label }
    }
}

/// A per-example convex loss with derivatives.
pub trait Loss: Send + Sync {
    fn dim(&self) -> usize;

    /// Reject examples outside the domain the sensitivity bounds assume.
    fn validate(&self, example: &Example) -> Result<()>;

    fn value(&self, theta: &[f64], example: &Example) -> f64;

    fn gradient(&self, theta: &[f64], example: &Example) -> Vec<f64>;

    fn hessian(&self, theta: &[f64], example: &Example) -> DMatrix<f64>;

    /// Add this example's gradient and Hessian into the accumulators and
    /// return its loss.
    fn accumulate(
        &self,
        theta: &DVector<f64>,
        example: &Example,
        grad: &mut DVector<f64>,
        hess: &mut DMatrix<f64>,
    ) -> f64 {
        let t = theta.as_slice();
        *grad += DVector::from_vec(self.gradient(t, example));
        *hess += self.hessian(t, example);
        self.value(t, example)
    }

    /// A random example from the data domain, for invariant probes.
    fn random_example(&self, rng: &mut dyn RngCore) -> Example;
}

/// A loss together with the bounds objective perturbation needs.
#[derive(Clone)]
pub struct LossSpec {
    pub loss: Arc<dyn Loss>,
    /// Upper bound on every eigenvalue of every per-example Hessian.
    pub eigen_bound: f64,
    /// Norm in which gradient differences are measured.
    pub grad_ball: NormBall,
    /// `sup ‖∇ℓ(θ;x) − ∇ℓ(θ;x')‖_K` over data and parameters.
    pub grad_sensitivity: f64,
}

impl LossSpec {
    /// Logistic loss on `[-1,1]^m` with gradient sensitivity measured in ℓp,
    /// `p ∈ {1, 2, ∞}`.
    pub fn logistic(m: usize, p: f64) -> Result<Self> {
        Ok(Self {
            loss: Arc::new(LogisticLoss::new(m)),
            eigen_bound: m as f64 / 4.0,
            grad_ball: NormBall::lp(p, 1.0, m)?,
            grad_sensitivity: logistic_sensitivity(m, p)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.loss.dim()
    }

    /// Spot-check convexity, the eigenvalue bound and the gradient
    /// sensitivity at random probes.
    pub fn probe_invariants(&self, n_probes: usize, stream: RngStream) -> Result<()> {
        let mut rng = stream.rng();
        let m = self.dim();
        for _ in 0..n_probes {
            let theta: Vec<f64> = (0..m).map(|_| rng.random_range(-4.0..4.0)).collect();
            let other: Vec<f64> = (0..m).map(|_| rng.random_range(-4.0..4.0)).collect();
            let x = self.loss.random_example(&mut rng);
            let x2 = self.loss.random_example(&mut rng);

            let mid: Vec<f64> = theta
                .iter()
                .zip(&other)
                .map(|(a, b)| 0.5 * (a + b))
                .collect();
            let lhs = self.loss.value(&mid, &x);
            let rhs = 0.5 * (self.loss.value(&theta, &x) + self.loss.value(&other, &x));
            if lhs > rhs + 1e-12 * (1.0 + rhs.abs()) {
                return Err(domain(format!("midpoint convexity fails at {mid:?}")));
            }

            let eig = self.loss.hessian(&theta, &x).symmetric_eigenvalues().max();
            if eig > self.eigen_bound * (1.0 + 1e-12) {
                return Err(domain(format!(
                    "Hessian eigenvalue {eig} exceeds the bound {}",
                    self.eigen_bound
                )));
            }

            let diff: Vec<f64> = self
                .loss
                .gradient(&theta, &x)
                .iter()
                .zip(self.loss.gradient(&theta, &x2))
                .map(|(a, b)| a - b)
                .collect();
            let g = self.grad_ball.gauge(&diff)?;
            if g > self.grad_sensitivity * (1.0 + 1e-12) {
                return Err(domain(format!(
                    "gradient difference of norm {g} exceeds the sensitivity {}",
                    self.grad_sensitivity
                )));
            }
        }
        Ok(())
    }
}

/// Budget split and loss for one run of objective perturbation.
#[derive(Clone)]
pub struct ObjPertConfig {
    pub epsilon: f64,
    pub q: f64,
    pub loss: LossSpec,
}

impl ObjPertConfig {
    pub fn new(epsilon: f64, q: f64, loss: LossSpec) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(invalid(format!("epsilon = {epsilon} must be positive")));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(invalid(format!("q = {q} must lie in (0, 1)")));
        }
        let cfg = Self { epsilon, q, loss };
        let gamma = cfg.gamma();
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(invalid(format!(
                "regularization weight {gamma} is negative or not finite"
            )));
        }
        Ok(cfg)
    }

    /// `γ = λ / (e^{ε(1-q)} - 1)`.
    pub fn gamma(&self) -> f64 {
        self.loss.eigen_bound / (self.epsilon * (1.0 - self.q)).exp_m1()
    }

    /// The mechanism generating the linear perturbation, with budget `εq`.
    pub fn noise_mechanism(&self) -> Result<MechanismConfig> {
        MechanismConfig::new(
            self.epsilon * self.q,
            self.loss.grad_sensitivity,
            self.loss.grad_ball.clone(),
        )
    }
}

/// `(1/n) Σ ℓ(θ; xᵢ) + (γ/2n) θᵀθ + vᵀθ / n`.
pub struct PerturbedObjective<'a> {
    pub loss: &'a dyn Loss,
    pub data: &'a [Example],
    pub gamma: f64,
    pub noise: DVector<f64>,
}

impl SmoothObjective for PerturbedObjective<'_> {
    fn dim(&self) -> usize {
        self.loss.dim()
    }

    fn value(&self, theta: &DVector<f64>) -> f64 {
        let n = self.data.len() as f64;
        let t = theta.as_slice();
        let total: f64 = self.data.iter().map(|ex| self.loss.value(t, ex)).sum();
        (total + 0.5 * self.gamma * theta.norm_squared() + self.noise.dot(theta)) / n
    }

    fn second_order(&self, theta: &DVector<f64>) -> (f64, DVector<f64>, DMatrix<f64>) {
        let m = self.dim();
        let n = self.data.len() as f64;
        let mut grad = DVector::zeros(m);
        let mut hess = DMatrix::zeros(m, m);
        let mut total = 0.0;
        for ex in self.data {
            total += self.loss.accumulate(theta, ex, &mut grad, &mut hess);
        }
        total += 0.5 * self.gamma * theta.norm_squared() + self.noise.dot(theta);
        grad += self.gamma * theta + &self.noise;
        for i in 0..m {
            hess[(i, i)] += self.gamma;
        }
        (total / n, grad / n, hess / n)
    }
}

/// Minimize the perturbed objective for a given `γ` and noise vector.
pub fn minimize_perturbed(
    loss: &dyn Loss,
    data: &[Example],
    gamma: f64,
    noise: &[f64],
    start: &[f64],
) -> Result<NewtonResult> {
    if data.is_empty() {
        return Err(invalid("objective perturbation needs at least one example"));
    }
    let objective = PerturbedObjective {
        loss,
        data,
        gamma,
        noise: DVector::from_column_slice(noise),
    };
    minimize(
        &objective,
        DVector::from_column_slice(start),
        NewtonOptions::default(),
    )
}

/// Unpenalized, unperturbed fit (the maximum-likelihood estimate for the
/// logistic loss).
pub fn fit_unpenalized(loss: &dyn Loss, data: &[Example]) -> Result<Vec<f64>> {
    let zero = vec![0.0; loss.dim()];
    Ok(minimize_perturbed(loss, data, 0.0, &zero, &zero)?
        .x
        .as_slice()
        .to_vec())
}

/// Private parameter estimate by extended objective perturbation.
pub fn objective_perturbation<R: Rng + ?Sized>(
    config: &ObjPertConfig,
    data: &[Example],
    rng: &mut R,
) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(invalid("objective perturbation needs at least one example"));
    }
    for ex in data {
        config.loss.loss.validate(ex)?;
    }
    let noise = config.noise_mechanism()?.sample_noise(rng)?;
    let zero = vec![0.0; config.loss.dim()];
    let fit = minimize_perturbed(
        config.loss.loss.as_ref(),
        data,
        config.gamma(),
        &noise,
        &zero,
    )?;
    Ok(fit.x.as_slice().to_vec())
}

pub(crate) fn view(x: &[f64]) -> DVectorView<'_, f64> {
    DVectorView::from_slice(x, x.len())
}
