//! Exact samplers for K-norm mechanisms.
//!
//! The noise `V` of a K-norm mechanism has density proportional to
//! `exp(-(ε/Δ)‖v‖_K)`. Equivalently `V = R·U` with `R ~ Gamma(m+1, ε/Δ)`
//! and `U` uniform on `K`, which gives a generic rejection sampler. The
//! ℓ1, ℓ2 and ℓ∞ balls have dedicated closed-form samplers.

use rand::Rng;
use rand_distr::{Distribution, Open01, StandardNormal};

use crate::error::{check_dim, invalid, Error, Result};
use crate::geometry::{lp_norm_unchecked, NormBall};
use crate::stats::ln_factorial;

/// Default cap on rejection-sampler proposals per draw.
pub const DEFAULT_MAX_ATTEMPTS: u64 = 1_000_000;

/// Privacy budget, sensitivity and norm ball of one K-norm mechanism.
#[derive(Debug, Clone)]
pub struct MechanismConfig {
    epsilon: f64,
    sensitivity: f64,
    ball: NormBall,
}

impl MechanismConfig {
    pub fn new(epsilon: f64, sensitivity: f64, ball: NormBall) -> Result<Self> {
        check_positive("epsilon", epsilon)?;
        check_positive("sensitivity", sensitivity)?;
        Ok(Self {
            epsilon,
            sensitivity,
            ball,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn sensitivity(&self) -> f64 {
        self.sensitivity
    }

    pub fn ball(&self) -> &NormBall {
        &self.ball
    }

    pub fn dim(&self) -> usize {
        self.ball.dim()
    }

    /// `ε/Δ`, the rate of the Gamma law of `‖V‖_K`.
    pub fn rate(&self) -> f64 {
        self.epsilon / self.sensitivity
    }

    /// `log f(v)` with `f(v) = (ε/Δ)^m exp(-(ε/Δ)‖v‖_K) / (m! λ(K))`.
    pub fn log_density(&self, v: &[f64]) -> Result<f64> {
        let volume = self
            .ball
            .volume()
            .ok_or_else(|| Error::UnknownVolume(self.ball.name()))?;
        let m = self.dim();
        let a = self.rate();
        Ok(m as f64 * a.ln() - a * self.ball.gauge(v)? - ln_factorial(m) - volume.ln())
    }

    /// Draw one noise vector, using a closed-form sampler for ℓ1/ℓ2/ℓ∞ balls
    /// and rejection sampling otherwise.
    pub fn sample_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let zero = vec![0.0; self.dim()];
        self.release(&zero, rng)
    }

    /// `t + V`.
    pub fn release<R: Rng + ?Sized>(&self, t: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        check_dim(self.dim(), t.len())?;
        match self.ball.as_lp() {
            // ‖v‖_p / r ≤ Δ is the ℓp mechanism with sensitivity Δ·r
            Some((1.0, r)) => sample_l1_mech(t, self.sensitivity * r, self.epsilon, rng),
            Some((2.0, r)) => sample_l2_mech(t, self.sensitivity * r, self.epsilon, rng),
            Some((p, r)) if p.is_infinite() => {
                sample_linf_mech(t, self.sensitivity * r, self.epsilon, rng)
            }
            _ => sample_k_mech_rejection(
                t,
                &self.ball,
                self.sensitivity,
                self.epsilon,
                rng,
                DEFAULT_MAX_ATTEMPTS,
            ),
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {v} must be positive and finite")))
    }
}

/// Gamma(shape, rate) for integer shape, as a sum of exponentials.
pub fn sample_gamma_int<R: Rng + ?Sized>(shape: usize, rate: f64, rng: &mut R) -> Result<f64> {
    if shape == 0 {
        return Err(invalid("gamma shape must be a positive integer"));
    }
    check_positive("gamma rate", rate)?;
    let mut total = 0.0;
    for _ in 0..shape {
        let u: f64 = Open01.sample(rng);
        total -= u.ln();
    }
    Ok(total / rate)
}

/// Inverse CDF of the Laplace law with the given scale, at `u ∈ (0,1)`.
pub fn laplace_inverse_cdf(u: f64, scale: f64) -> f64 {
    let c = u - 0.5;
    -scale * c.signum() * (1.0 - 2.0 * c.abs()).ln()
}

pub fn sample_laplace<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    let u: f64 = Open01.sample(rng);
    if u == 0.5 {
        return 0.0;
    }
    laplace_inverse_cdf(u, scale)
}

/// ℓ1-mechanism: independent Laplace(Δ₁/ε) noise on every coordinate.
pub fn sample_l1_mech<R: Rng + ?Sized>(
    t: &[f64],
    delta1: f64,
    epsilon: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_positive("sensitivity", delta1)?;
    check_positive("epsilon", epsilon)?;
    let scale = delta1 / epsilon;
    Ok(t.iter().map(|x| x + sample_laplace(scale, rng)).collect())
}

/// ℓ2-mechanism: a Gamma(m, ε/Δ₂) radius along a uniform direction.
pub fn sample_l2_mech<R: Rng + ?Sized>(
    t: &[f64],
    delta2: f64,
    epsilon: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_positive("sensitivity", delta2)?;
    check_positive("epsilon", epsilon)?;
    let m = t.len();
    let z: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
    let norm = lp_norm_unchecked(&z, 2.0);
    let r = sample_gamma_int(m, epsilon / delta2, rng)?;
    Ok(t.iter().zip(&z).map(|(x, zi)| x + r * zi / norm).collect())
}

/// ℓ∞-mechanism: a Gamma(m+1, ε/Δ∞) radius times a uniform point of the cube.
pub fn sample_linf_mech<R: Rng + ?Sized>(
    t: &[f64],
    delta_inf: f64,
    epsilon: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_positive("sensitivity", delta_inf)?;
    check_positive("epsilon", epsilon)?;
    let m = t.len();
    let u: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let r = sample_gamma_int(m + 1, epsilon / delta_inf, rng)?;
    Ok(t.iter().zip(&u).map(|(x, ui)| x + r * ui).collect())
}

/// Uniform point of the unit-scale body by rejection from its bounding
/// box. Returns the point and the number of proposals used.
pub fn uniform_in_ball<R: Rng + ?Sized>(
    ball: &NormBall,
    rng: &mut R,
    max_attempts: u64,
) -> Result<(Vec<f64>, u64)> {
    let b = ball.bound();
    let mut u = vec![0.0; ball.dim()];
    for attempt in 1..=max_attempts {
        for v in u.iter_mut() {
            *v = rng.random_range(-b..b);
        }
        if ball.contains(&u) {
            return Ok((u, attempt));
        }
    }
    Err(Error::Sampler {
        attempts: max_attempts,
        acceptance_rate: 0.0,
    })
}

/// Generic K-norm mechanism: `t + R·U` with `U` uniform on `K` (rejection
/// from the ℓ∞ bounding box) and `R ~ Gamma(m+1, ε/Δ_K)`.
pub fn sample_k_mech_rejection<R: Rng + ?Sized>(
    t: &[f64],
    ball: &NormBall,
    delta_k: f64,
    epsilon: f64,
    rng: &mut R,
    max_attempts: u64,
) -> Result<Vec<f64>> {
    check_dim(ball.dim(), t.len())?;
    check_positive("sensitivity", delta_k)?;
    check_positive("epsilon", epsilon)?;
    let r = sample_gamma_int(t.len() + 1, epsilon / delta_k, rng)?;
    let (u, _) = uniform_in_ball(ball, rng, max_attempts)?;
    Ok(t.iter().zip(&u).map(|(x, ui)| x + r * ui).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::stats::{
        gamma_cdf, ks_one_sample, ks_two_sample, mean, std_error, variance, variance_std_error,
    };

    const KS_LEVEL: f64 = 0.01;

    fn rng(stream: u64) -> rand_chacha::ChaCha12Rng {
        RngStream::new(2024, stream).rng()
    }

    #[test]
    fn gamma_moments_and_ks() {
        let mut r = rng(1);
        let draws: Vec<f64> = (0..100_000)
            .map(|_| sample_gamma_int(3, 2.0, &mut r).unwrap())
            .collect();
        assert!((mean(&draws) - 1.5).abs() < 4.0 * std_error(&draws));
        assert!((variance(&draws) - 0.75).abs() < 4.0 * variance_std_error(&draws));
        let ks = ks_one_sample(&draws[..10_000], |x| gamma_cdf(3.0, 2.0, x));
        assert!(ks.passes(KS_LEVEL), "{ks:?}");
    }

    #[test]
    fn gamma_rejects_bad_parameters() {
        let mut r = rng(0);
        assert!(sample_gamma_int(0, 1.0, &mut r).is_err());
        assert!(sample_gamma_int(2, 0.0, &mut r).is_err());
        assert!(sample_gamma_int(2, -1.0, &mut r).is_err());
    }

    #[test]
    fn laplace_median_is_zero() {
        assert_eq!(laplace_inverse_cdf(0.5, 3.0), 0.0);
        // CDF at -b ln 2 is 1/4
        assert!((laplace_inverse_cdf(0.25, 1.0) + 2f64.ln()).abs() < 1e-15);
        assert!((laplace_inverse_cdf(0.75, 1.0) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn l1_mech_unbiased_and_gamma_norm() {
        let mut r = rng(2);
        let draws: Vec<Vec<f64>> = (0..100_000)
            .map(|_| sample_l1_mech(&[0.0, 0.0], 1.0, 1.0, &mut r).unwrap())
            .collect();
        for j in 0..2 {
            let c: Vec<f64> = draws.iter().map(|v| v[j]).collect();
            assert!(mean(&c).abs() < 4.0 * std_error(&c));
        }
        let norms: Vec<f64> = draws[..10_000]
            .iter()
            .map(|v| lp_norm_unchecked(v, 1.0))
            .collect();
        assert!(ks_one_sample(&norms, |x| gamma_cdf(2.0, 1.0, x)).passes(KS_LEVEL));
    }

    #[test]
    fn l2_mech_norm_and_direction() {
        let mut r = rng(3);
        let t = [1.0, -2.0];
        let draws: Vec<Vec<f64>> = (0..10_000)
            .map(|_| sample_l2_mech(&t, 2.0, 0.5, &mut r).unwrap())
            .collect();
        let noise: Vec<Vec<f64>> = draws
            .iter()
            .map(|d| vec![d[0] - t[0], d[1] - t[1]])
            .collect();
        let norms: Vec<f64> = noise.iter().map(|v| lp_norm_unchecked(v, 2.0)).collect();
        assert!(ks_one_sample(&norms, |x| gamma_cdf(2.0, 0.25, x)).passes(KS_LEVEL));
        for j in 0..2 {
            let dir: Vec<f64> = noise.iter().zip(&norms).map(|(v, n)| v[j] / n).collect();
            assert!(mean(&dir).abs() < 4.0 * std_error(&dir));
            let out: Vec<f64> = draws.iter().map(|d| d[j]).collect();
            assert!((mean(&out) - t[j]).abs() < 4.0 * std_error(&out));
        }
    }

    #[test]
    fn linf_mech_norm_is_gamma_m() {
        let mut r = rng(4);
        let noise: Vec<Vec<f64>> = (0..10_000)
            .map(|_| sample_linf_mech(&[0.0, 0.0], 1.0, 1.0, &mut r).unwrap())
            .collect();
        let norms: Vec<f64> = noise
            .iter()
            .map(|v| lp_norm_unchecked(v, f64::INFINITY))
            .collect();
        assert!(ks_one_sample(&norms, |x| gamma_cdf(2.0, 1.0, x)).passes(KS_LEVEL));
        for (v, n) in noise.iter().zip(&norms) {
            assert!(v.iter().all(|c| (c / n).abs() <= 1.0 + 1e-15));
        }
        for j in 0..2 {
            let c: Vec<f64> = noise.iter().map(|v| v[j]).collect();
            assert!(mean(&c).abs() < 4.0 * std_error(&c));
        }
    }

    #[test]
    fn rejection_matches_closed_form_linf() {
        let cube = NormBall::lp_oracle(f64::INFINITY, 1.0, 2).unwrap();
        let mut r1 = rng(5);
        let mut r2 = rng(6);
        let a: Vec<f64> = (0..10_000)
            .map(|_| {
                let v = sample_k_mech_rejection(
                    &[0.0, 0.0],
                    &cube,
                    1.0,
                    1.0,
                    &mut r1,
                    DEFAULT_MAX_ATTEMPTS,
                )
                .unwrap();
                lp_norm_unchecked(&v, f64::INFINITY)
            })
            .collect();
        let b: Vec<f64> = (0..10_000)
            .map(|_| {
                lp_norm_unchecked(
                    &sample_linf_mech(&[0.0, 0.0], 1.0, 1.0, &mut r2).unwrap(),
                    f64::INFINITY,
                )
            })
            .collect();
        assert!(ks_two_sample(&a, &b).passes(KS_LEVEL));
    }

    #[test]
    fn rejection_on_k2_gauge_is_gamma() {
        let k2 = NormBall::k2();
        let mut r = rng(7);
        let gauges: Vec<f64> = (0..10_000)
            .map(|_| {
                let v = sample_k_mech_rejection(
                    &[0.0, 0.0],
                    &k2,
                    1.0,
                    1.0,
                    &mut r,
                    DEFAULT_MAX_ATTEMPTS,
                )
                .unwrap();
                k2.gauge(&v).unwrap()
            })
            .collect();
        assert!(ks_one_sample(&gauges, |x| gamma_cdf(2.0, 1.0, x)).passes(KS_LEVEL));
    }

    #[test]
    fn k2_acceptance_rate() {
        let k2 = NormBall::k2();
        let mut r = rng(8);
        let n = 20_000;
        let attempts: u64 = (0..n)
            .map(|_| uniform_in_ball(&k2, &mut r, 100).unwrap().1)
            .sum();
        let rate = n as f64 / attempts as f64;
        // number of accepted proposals out of `attempts` is binomial
        let expected = 5.0 / 6.0;
        let se = (expected * (1.0 - expected) / attempts as f64).sqrt();
        assert!((rate - expected).abs() < 4.0 * se, "rate {rate}");
    }

    #[test]
    fn rejection_failure_is_reported() {
        let empty_ish = NormBall::oracle("needle", 2, 1.0, |u| {
            u[0].abs() < 1e-12 && u[1].abs() < 1e-12
        })
        .unwrap();
        let mut r = rng(9);
        let err =
            sample_k_mech_rejection(&[0.0, 0.0], &empty_ish, 1.0, 1.0, &mut r, 1000).unwrap_err();
        assert!(matches!(err, Error::Sampler { attempts: 1000, .. }));
    }

    #[test]
    fn invalid_budgets() {
        let mut r = rng(10);
        assert!(sample_l1_mech(&[0.0], 1.0, 0.0, &mut r).is_err());
        assert!(sample_l2_mech(&[0.0], -1.0, 1.0, &mut r).is_err());
        assert!(sample_linf_mech(&[0.0], 1.0, f64::NAN, &mut r).is_err());
        assert!(MechanismConfig::new(1.0, 0.0, NormBall::l1(2)).is_err());
    }

    #[test]
    fn reproducible_bit_for_bit() {
        let cfg = MechanismConfig::new(0.7, 2.0, NormBall::k2()).unwrap();
        let draw = |s| {
            let mut r = RngStream::new(99, s).rng();
            (0..50)
                .map(|_| cfg.sample_noise(&mut r).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(1), draw(1));
        assert_ne!(draw(1), draw(2));
    }

    #[test]
    fn dispatch_respects_radius() {
        // K = ℓ∞ ball of radius 2 with Δ = 1 is the ℓ∞ mechanism with Δ∞ = 2
        let cfg =
            MechanismConfig::new(1.0, 1.0, NormBall::lp(f64::INFINITY, 2.0, 2).unwrap()).unwrap();
        let mut r = rng(11);
        let gauges: Vec<f64> = (0..10_000)
            .map(|_| {
                cfg.ball()
                    .gauge(&cfg.sample_noise(&mut r).unwrap())
                    .unwrap()
            })
            .collect();
        assert!(ks_one_sample(&gauges, |x| gamma_cdf(2.0, 1.0, x)).passes(KS_LEVEL));
    }

    #[test]
    fn norm_and_direction_uncorrelated() {
        let cfg = MechanismConfig::new(1.0, 1.0, NormBall::k2()).unwrap();
        let mut r = rng(12);
        let n = 20_000;
        let mut norms = Vec::with_capacity(n);
        let mut dirs = vec![Vec::with_capacity(n), Vec::with_capacity(n)];
        for _ in 0..n {
            let v = cfg.sample_noise(&mut r).unwrap();
            let g = cfg.ball().gauge(&v).unwrap();
            norms.push(g);
            for j in 0..2 {
                dirs[j].push(v[j] / g);
            }
        }
        for d in &dirs {
            let rho = crate::stats::correlation(&norms, d);
            // SE of a null correlation is about 1/sqrt(n)
            assert!(rho.abs() < 4.0 / (n as f64).sqrt(), "rho {rho}");
        }
    }
}
