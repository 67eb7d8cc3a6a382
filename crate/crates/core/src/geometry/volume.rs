use rand::Rng;

use super::{NormBall, ScaledBall};
use crate::error::{domain, invalid, Result};
use crate::rng::RngStream;
use crate::stats::ln_gamma;

/// Volume of the ℓp ball of radius `r` in `m` dimensions:
/// `r^m 2^m Γ(1+1/p)^m / Γ(1+m/p)`.
pub fn volume_lp(p: f64, m: usize, r: f64) -> f64 {
    let mf = m as f64;
    if p.is_infinite() {
        return (2.0 * r).powi(m as i32);
    }
    if p == 1.0 {
        // (2r)^m / m!
        return (1..=m).fold(1.0, |acc, k| acc * 2.0 * r / k as f64);
    }
    (mf * (2.0 * r).ln() + mf * ln_gamma(1.0 + 1.0 / p) - ln_gamma(1.0 + mf / p)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Hit-or-miss volume of `scale · K` over the box `[-scale·b, scale·b]^m`.
pub fn volume_monte_carlo(
    ball: &NormBall,
    scale: f64,
    n_samples: usize,
    stream: RngStream,
) -> Result<VolumeEstimate> {
    let b = ball.bound();
    if !(b > 0.0) {
        return Err(domain("degenerate bounding box"));
    }
    if n_samples < 1000 {
        return Err(invalid(format!(
            "{n_samples} samples is below the minimum of 1000"
        )));
    }
    if !(scale > 0.0) {
        return Err(invalid("scale must be positive"));
    }
    let m = ball.dim();
    let mut rng = stream.rng();
    let mut u = vec![0.0; m];
    let mut hits = 0usize;
    for _ in 0..n_samples {
        for v in u.iter_mut() {
            *v = rng.random_range(-b..b);
        }
        if ball.contains(&u) {
            hits += 1;
        }
    }
    let box_volume = (2.0 * b * scale).powi(m as i32);
    let frac = hits as f64 / n_samples as f64;
    Ok(VolumeEstimate {
        estimate: box_volume * frac,
        std_error: box_volume * (frac * (1.0 - frac) / n_samples as f64).sqrt(),
    })
}

impl ScaledBall {
    /// Closed-form volume when available, otherwise a Monte-Carlo estimate.
    pub fn volume_estimate(&self, n_samples: usize, stream: RngStream) -> Result<VolumeEstimate> {
        match self.volume() {
            Some(v) => Ok(VolumeEstimate {
                estimate: v,
                std_error: 0.0,
            }),
            None => volume_monte_carlo(&self.ball, self.scale, n_samples, stream),
        }
    }
}
