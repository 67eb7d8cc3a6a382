//! Damped Newton with Armijo backtracking for smooth strictly convex
//! objectives.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub trait SmoothObjective {
    fn dim(&self) -> usize;
    fn value(&self, x: &DVector<f64>) -> f64;
    /// Value, gradient and Hessian at `x`.
    fn second_order(&self, x: &DVector<f64>) -> (f64, DVector<f64>, DMatrix<f64>);
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub grad_tol: f64,
    pub max_iter: usize,
    pub armijo: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-8,
            max_iter: 500,
            armijo: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonResult {
    pub x: DVector<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
}

const ROUND_OFF_FACTOR: f64 = 1e3;

pub fn minimize(
    objective: &impl SmoothObjective,
    start: DVector<f64>,
    opts: NewtonOptions,
) -> Result<NewtonResult> {
    let mut x = start;
    let mut grad_norm = f64::INFINITY;
    for iter in 0..opts.max_iter {
        let (f, g, h) = objective.second_order(&x);
        grad_norm = g.norm();
        if grad_norm <= opts.grad_tol {
            return Ok(NewtonResult {
                x,
                iterations: iter,
                grad_norm,
            });
        }
        // Newton direction when the Hessian factorizes, steepest descent otherwise
        let dir = match h.cholesky() {
            Some(chol) => -chol.solve(&g),
            None => -g.clone(),
        };
        let dir = if dir.dot(&g) < 0.0 { dir } else { -g.clone() };
        let slope = dir.dot(&g);
        // predicted decrease below the resolution of f: the sufficient-decrease
        // test is meaningless here, so take the full step
        if -slope <= ROUND_OFF_FACTOR * f64::EPSILON * (1.0 + f.abs()) {
            x += dir;
            continue;
        }
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let candidate = &x + step * &dir;
            if objective.value(&candidate) <= f + opts.armijo * step * slope {
                x = candidate;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // line search stalled at round-off level; accept only if the
            // gradient is already close to the target
            if grad_norm <= opts.grad_tol * 1e3 {
                return Ok(NewtonResult {
                    x,
                    iterations: iter,
                    grad_norm,
                });
            }
            return Err(Error::Convergence {
                iterations: iter,
                grad_norm,
            });
        }
    }
    Err(Error::Convergence {
        iterations: opts.max_iter,
        grad_norm,
    })
}
