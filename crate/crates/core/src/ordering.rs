//! Comparing K-norm mechanisms.
//!
//! Two decision rules: the containment order (`Δ_A·K_A ⊆ Δ_B·K_B`), which
//! is partial and equivalent to stochastic tightness and to uniformly
//! smaller conditional variance; and the volume order, which is total and
//! equivalent to smaller entropy.

use std::fmt;

use crate::error::{check_dim, invalid, Error, Result};
use crate::geometry::{
    ball_containment, lp_norm_unchecked, Containment, ScaledBall, VolumeEstimate,
};
use crate::rng::RngStream;
use crate::sampling::MechanismConfig;
use crate::stats::{gamma_cdf, gamma_quantile, ln_factorial};

/// Boundary directions probed when containment cannot be decided exactly.
pub const DEFAULT_DIRECTIONS: usize = 10_000;
/// Monte-Carlo sample size for oracle-ball volumes.
pub const DEFAULT_VOLUME_SAMPLES: usize = 1_000_000;

/// Differential entropy `log((Δe/ε)^m · m! · λ(K))`.
pub fn entropy(config: &MechanismConfig) -> Result<f64> {
    let volume = config
        .ball()
        .volume()
        .ok_or_else(|| Error::UnknownVolume(config.ball().name()))?;
    Ok(entropy_from_volume(config, volume))
}

/// Entropy with a supplied unit-ball volume (e.g. a Monte-Carlo estimate).
pub fn entropy_from_volume(config: &MechanismConfig, unit_volume: f64) -> f64 {
    let m = config.dim() as f64;
    m * (1.0 - config.rate().ln()) + ln_factorial(config.dim()) + unit_volume.ln()
}

/// Radius `t` of the α-concentration set `t·K`: the α-quantile of
/// Gamma(m, ε/Δ).
pub fn concentration_radius(config: &MechanismConfig, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    gamma_quantile(config.dim() as f64, config.rate(), alpha)
}

/// Depth of `v` under the mechanism's noise law: one minus the Gamma CDF
/// of its gauge.
pub fn depth(config: &MechanismConfig, v: &[f64]) -> Result<f64> {
    let g = config.ball().gauge(v)?;
    Ok(1.0 - gamma_cdf(config.dim() as f64, config.rate(), g))
}

/// Variance of `|Vᵀe|` given `V ∈ span(e)`: `m Δ² / (ε² ‖e‖_K²)`.
pub fn conditional_variance(config: &MechanismConfig, e: &[f64]) -> Result<f64> {
    check_dim(config.dim(), e.len())?;
    let n2 = lp_norm_unchecked(e, 2.0);
    if n2 == 0.0 {
        return Err(invalid("direction must be nonzero"));
    }
    if (n2 - 1.0).abs() > 1e-10 {
        return Err(invalid(format!("direction has ℓ2 norm {n2}, expected 1")));
    }
    let g = config.ball().gauge(e)?;
    let a = config.rate() * g;
    Ok(config.dim() as f64 / (a * a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tightness {
    ATighter,
    BTighter,
    Tie,
    Incomparable,
    Undetermined,
}

impl Tightness {
    pub fn label(&self) -> &'static str {
        match self {
            Tightness::ATighter => "a_tighter",
            Tightness::BTighter => "b_tighter",
            Tightness::Tie => "tie",
            Tightness::Incomparable => "incomparable",
            Tightness::Undetermined => "undetermined",
        }
    }
}

fn require_comparable(a: &MechanismConfig, b: &MechanismConfig) -> Result<()> {
    check_dim(a.dim(), b.dim())?;
    if (a.epsilon() - b.epsilon()).abs() > 1e-12 * a.epsilon() {
        return Err(invalid(format!(
            "mechanisms must share a privacy budget (got {} and {})",
            a.epsilon(),
            b.epsilon()
        )));
    }
    Ok(())
}

fn scaled(config: &MechanismConfig) -> Result<ScaledBall> {
    ScaledBall::new(config.ball().clone(), config.sensitivity())
}

/// Stochastic tightness, decided through containment of `Δ·K` bodies in
/// both directions.
pub fn stochastic_tightness(
    a: &MechanismConfig,
    b: &MechanismConfig,
    n_directions: usize,
    stream: RngStream,
) -> Result<(Tightness, Containment, Containment)> {
    require_comparable(a, b)?;
    let (sa, sb) = (scaled(a)?, scaled(b)?);
    let ab = ball_containment(&sa, &sb, n_directions, stream.substream(&[0]))?;
    let ba = ball_containment(&sb, &sa, n_directions, stream.substream(&[1]))?;
    use Containment::*;
    let verdict = match (&ab, &ba) {
        (Contained, Contained) => Tightness::Tie,
        (Contained, _) => Tightness::ATighter,
        (_, Contained) => Tightness::BTighter,
        (NotContained(_), NotContained(_)) => Tightness::Incomparable,
        _ => Tightness::Undetermined,
    };
    Ok((verdict, ab, ba))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preference {
    A,
    B,
    Tie,
    Incomparable,
    Undetermined,
}

impl Preference {
    pub fn label<'a>(&self, a: &'a str, b: &'a str) -> &'a str {
        match self {
            Preference::A => a,
            Preference::B => b,
            Preference::Tie => "tie",
            Preference::Incomparable => "incomparable",
            Preference::Undetermined => "undetermined",
        }
    }
}

/// Outcome of comparing two mechanisms under both decision rules.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub labels: [String; 2],
    pub mechanisms: [MechanismConfig; 2],
    pub tightness: Tightness,
    /// `A ⊆ B` and `B ⊆ A` verdicts.
    pub containment: [Containment; 2],
    /// Volumes of `Δ·K` (standard error zero when exact).
    pub volumes: [VolumeEstimate; 2],
    pub entropies: [f64; 2],
    pub preferred_by_containment: Preference,
    pub preferred_by_volume: Preference,
}

impl ComparisonReport {
    pub fn preferred_label(&self, p: Preference) -> &str {
        p.label(&self.labels[0], &self.labels[1])
    }

    /// Flat `key=value` lines.
    pub fn key_values(&self) -> Vec<(String, String)> {
        let witness = |c: &Containment| match c {
            Containment::NotContained(w) => w
                .iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(";"),
            _ => String::new(),
        };
        let mut kv = Vec::new();
        for (i, tag) in ["a", "b"].iter().enumerate() {
            let m = &self.mechanisms[i];
            kv.push((format!("{tag}.label"), self.labels[i].clone()));
            kv.push((format!("{tag}.ball"), m.ball().to_record()));
            kv.push((format!("{tag}.sensitivity"), m.sensitivity().to_string()));
            kv.push((
                format!("{tag}.volume"),
                self.volumes[i].estimate.to_string(),
            ));
            kv.push((
                format!("{tag}.volume_se"),
                self.volumes[i].std_error.to_string(),
            ));
            kv.push((format!("{tag}.entropy"), self.entropies[i].to_string()));
        }
        kv.push(("epsilon".into(), self.mechanisms[0].epsilon().to_string()));
        kv.push(("a_in_b".into(), self.containment[0].label().into()));
        kv.push(("a_in_b.witness".into(), witness(&self.containment[0])));
        kv.push(("b_in_a".into(), self.containment[1].label().into()));
        kv.push(("b_in_a.witness".into(), witness(&self.containment[1])));
        kv.push(("tightness".into(), self.tightness.label().into()));
        kv.push((
            "preferred_by_containment".into(),
            self.preferred_label(self.preferred_by_containment).into(),
        ));
        kv.push((
            "preferred_by_volume".into(),
            self.preferred_label(self.preferred_by_volume).into(),
        ));
        kv
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.key_values() {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Compare two mechanisms with equal budget and dimension.
pub fn compare(
    a: &MechanismConfig,
    b: &MechanismConfig,
    stream: RngStream,
) -> Result<ComparisonReport> {
    compare_with(a, b, stream, DEFAULT_DIRECTIONS, DEFAULT_VOLUME_SAMPLES)
}

pub fn compare_with(
    a: &MechanismConfig,
    b: &MechanismConfig,
    stream: RngStream,
    n_directions: usize,
    volume_samples: usize,
) -> Result<ComparisonReport> {
    let (tightness, ab, ba) = stochastic_tightness(a, b, n_directions, stream.substream(&[0]))?;
    let volumes = [
        scaled(a)?.volume_estimate(volume_samples, stream.substream(&[1]))?,
        scaled(b)?.volume_estimate(volume_samples, stream.substream(&[2]))?,
    ];
    let entropies = [
        entropy_from_scaled_volume(a, volumes[0].estimate),
        entropy_from_scaled_volume(b, volumes[1].estimate),
    ];
    let preferred_by_containment = match tightness {
        Tightness::ATighter => Preference::A,
        Tightness::BTighter => Preference::B,
        Tightness::Tie => Preference::Tie,
        Tightness::Incomparable => Preference::Incomparable,
        Tightness::Undetermined => Preference::Undetermined,
    };
    let (va, vb) = (volumes[0].estimate, volumes[1].estimate);
    let preferred_by_volume = if (va - vb).abs() <= 1e-12 * va.max(vb) {
        Preference::Tie
    } else if va < vb {
        Preference::A
    } else {
        Preference::B
    };
    Ok(ComparisonReport {
        labels: [a.ball().name(), b.ball().name()],
        mechanisms: [a.clone(), b.clone()],
        tightness,
        containment: [ab, ba],
        volumes,
        entropies,
        preferred_by_containment,
        preferred_by_volume,
    })
}

fn entropy_from_scaled_volume(config: &MechanismConfig, scaled_volume: f64) -> f64 {
    let unit = scaled_volume / config.sensitivity().powi(config.dim() as i32);
    entropy_from_volume(config, unit)
}
