use std::fmt;

use super::SimulationConfig;
use crate::error::{invalid, Result};
use crate::geometry::{volume_lp, NormBall};
use crate::rng::RngStream;
use crate::sampling::{
    sample_gamma_int, sample_l1_mech, sample_l2_mech, sample_laplace, sample_linf_mech,
    uniform_in_ball, DEFAULT_MAX_ATTEMPTS,
};
use crate::stats::{gamma_cdf, ks_one_sample, mean, std_error};

/// Overall significance level; KS tests share it by Bonferroni.
pub const FAMILY_LEVEL: f64 = 0.01;
/// Half-width, in standard errors, of the mean and acceptance-rate checks.
pub const Z_BOUND: f64 = 4.0;

/// Deliberate sampler faults, used to check that the diagnostics can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// The ℓ1 sampler and the Laplace ratio test draw with half the
    /// sensitivity they claim.
    HalvedLaplaceScale,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticEntry {
    pub mechanism: String,
    pub test: String,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, Default)]
pub struct DiagnosticsReport {
    pub entries: Vec<DiagnosticEntry>,
}

impl DiagnosticsReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }
}

impl fmt::Display for DiagnosticsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            let p = e.p_value.map_or("-".to_string(), |p| format!("{p:.4e}"));
            writeln!(
                f,
                "{:<10} {:<18} statistic={:<12.6} p={:<11} {}",
                e.mechanism,
                e.test,
                e.statistic,
                p,
                if e.passed { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

/// Result of the two-neighbour Laplace histogram check.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioOutcome {
    pub bins_checked: usize,
    /// Largest `|log(c₀/c₁)| − z·√(1/c₀ + 1/c₁)` over checked bins.
    pub max_excess_log_ratio: f64,
    pub passed: bool,
}

/// Release `0 + Lap(1/ε)` and `1 + Lap(1/ε)` (neighbouring inputs, unit
/// sensitivity) `n_draws` times each, bin both on a grid of width 1/4, and
/// check `|log(c₀/c₁)| ≤ ε + z·√(1/c₀ + 1/c₁)` on every bin where both
/// counts are at least 100.
pub fn dp_histogram_ratio(epsilon: f64, n_draws: usize, stream: RngStream) -> Result<RatioOutcome> {
    histogram_ratio(epsilon, n_draws, stream, 1.0)
}

fn histogram_ratio(
    epsilon: f64,
    n_draws: usize,
    stream: RngStream,
    scale_factor: f64,
) -> Result<RatioOutcome> {
    if !(epsilon > 0.0) {
        return Err(invalid("epsilon must be positive"));
    }
    const WIDTH: f64 = 0.25;
    const LO: f64 = -20.0;
    const BINS: usize = 164;
    let scale = scale_factor / epsilon;
    let mut counts = [vec![0usize; BINS], vec![0usize; BINS]];
    for (t, c) in counts.iter_mut().enumerate() {
        let mut rng = stream.substream(&[t as u64]).rng();
        for _ in 0..n_draws {
            let x = t as f64 + sample_laplace(scale, &mut rng);
            let b = ((x - LO) / WIDTH).floor();
            if b >= 0.0 && (b as usize) < BINS {
                c[b as usize] += 1;
            }
        }
    }
    let mut checked = 0;
    let mut worst = f64::NEG_INFINITY;
    for (&a, &b) in counts[0].iter().zip(&counts[1]) {
        if a >= 100 && b >= 100 {
            checked += 1;
            let (a, b) = (a as f64, b as f64);
            let excess = (a / b).ln().abs() - Z_BOUND * (1.0 / a + 1.0 / b).sqrt();
            worst = worst.max(excess);
        }
    }
    Ok(RatioOutcome {
        bins_checked: checked,
        max_excess_log_ratio: worst,
        passed: checked > 0 && worst <= epsilon,
    })
}

enum Sampler {
    L1,
    L2,
    LInf,
    Rejection(NormBall),
}

fn sampler(name: &str, m: usize) -> Result<Sampler> {
    Ok(match name {
        "l1" => Sampler::L1,
        "l2" => Sampler::L2,
        "linf" => Sampler::LInf,
        "rejection" if m == 2 => Sampler::Rejection(NormBall::k2()),
        "rejection" => Sampler::Rejection(NormBall::lp_oracle(2.0, 1.0, m)?),
        _ => return Err(invalid(format!("unknown diagnostics mechanism `{name}`"))),
    })
}

/// Statistical self-tests of the samplers at `Δ = 1`, `ε = epsilons[0]`,
/// dimension `dim`, with `n` draws per test.
///
/// Per mechanism: KS of the gauge against `Gamma(m, ε/Δ)` and a per-coordinate
/// mean check; for `l1`, the Laplace histogram ratio; for `rejection`
/// (the quadratic hull when `m = 2`, else an ℓ2 oracle), the acceptance
/// rate against the volume ratio. KS tests use level `0.01/k` for `k`
/// mechanisms.
pub fn diagnostics(cfg: &SimulationConfig, fault: Fault) -> Result<DiagnosticsReport> {
    let mut report = DiagnosticsReport::default();
    if cfg.mechanisms.is_empty() {
        return Ok(report);
    }
    cfg.validate()?;
    let m = cfg.dim;
    if m == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    let eps = *cfg
        .epsilons
        .first()
        .ok_or_else(|| invalid("need one epsilon"))?;
    let delta = 1.0;
    let ks_level = FAMILY_LEVEL / cfg.mechanisms.len() as f64;
    let root = RngStream::new(cfg.seed, 0);
    let zero = vec![0.0; m];

    for (mi, name) in cfg.mechanisms.iter().enumerate() {
        let kind = sampler(name, m)?;
        let mut rng = root.substream(&[mi as u64]).rng();
        let (ball, effective_delta) = match &kind {
            Sampler::L1 => (
                NormBall::l1(m),
                if fault == Fault::HalvedLaplaceScale {
                    delta / 2.0
                } else {
                    delta
                },
            ),
            Sampler::L2 => (NormBall::l2(m), delta),
            Sampler::LInf => (NormBall::linf(m), delta),
            Sampler::Rejection(b) => (b.clone(), delta),
        };
        let mut draws = Vec::with_capacity(cfg.n);
        let mut attempts = 0u64;
        for _ in 0..cfg.n {
            let v = match &kind {
                Sampler::L1 => sample_l1_mech(&zero, effective_delta, eps, &mut rng)?,
                Sampler::L2 => sample_l2_mech(&zero, delta, eps, &mut rng)?,
                Sampler::LInf => sample_linf_mech(&zero, delta, eps, &mut rng)?,
                Sampler::Rejection(b) => {
                    let r = sample_gamma_int(m + 1, eps / delta, &mut rng)?;
                    let (u, k) = uniform_in_ball(b, &mut rng, DEFAULT_MAX_ATTEMPTS)?;
                    attempts += k;
                    u.iter().map(|x| r * x).collect()
                }
            };
            draws.push(v);
        }

        let gauges: Vec<f64> = draws.iter().map(|v| ball.gauge(v)).collect::<Result<_>>()?;
        let ks = ks_one_sample(&gauges, |x| gamma_cdf(m as f64, eps / delta, x));
        report.entries.push(DiagnosticEntry {
            mechanism: name.clone(),
            test: "gamma_marginal_ks".into(),
            statistic: ks.statistic,
            p_value: Some(ks.p_value),
            passed: ks.passes(ks_level),
        });

        let worst_z = (0..m)
            .map(|j| {
                let c: Vec<f64> = draws.iter().map(|v| v[j]).collect();
                mean(&c).abs() / std_error(&c)
            })
            .fold(0.0f64, f64::max);
        report.entries.push(DiagnosticEntry {
            mechanism: name.clone(),
            test: "unbiased_mean_z".into(),
            statistic: worst_z,
            p_value: None,
            passed: worst_z <= Z_BOUND,
        });

        if let Sampler::L1 = kind {
            let factor = if fault == Fault::HalvedLaplaceScale {
                0.5
            } else {
                1.0
            };
            let ratio = histogram_ratio(
                eps,
                cfg.n.max(100_000),
                root.substream(&[mi as u64, 1]),
                factor,
            )?;
            report.entries.push(DiagnosticEntry {
                mechanism: name.clone(),
                test: "dp_histogram_ratio".into(),
                statistic: ratio.max_excess_log_ratio,
                p_value: None,
                passed: ratio.passed,
            });
        }

        if let Sampler::Rejection(b) = &kind {
            let expected = match b.volume() {
                Some(v) => v / (2.0 * b.bound()).powi(m as i32),
                None => volume_lp(2.0, m, 1.0) / 2f64.powi(m as i32),
            };
            let observed = cfg.n as f64 / attempts as f64;
            let se = (expected * (1.0 - expected) / attempts as f64).sqrt();
            let z = (observed - expected).abs() / se;
            report.entries.push(DiagnosticEntry {
                mechanism: name.clone(),
                test: "acceptance_rate_z".into(),
                statistic: z,
                p_value: None,
                passed: z <= Z_BOUND,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_run_passes() {
        let report = diagnostics(&SimulationConfig::diagnostics(), Fault::None).unwrap();
        assert!(report.passed(), "{report}");
        assert_eq!(report.entries.len(), 4 * 2 + 2);
    }

    #[test]
    fn halved_laplace_is_detected() {
        let report =
            diagnostics(&SimulationConfig::diagnostics(), Fault::HalvedLaplaceScale).unwrap();
        let ks = report
            .entries
            .iter()
            .find(|e| e.mechanism == "l1" && e.test == "gamma_marginal_ks")
            .unwrap();
        assert!(!ks.passed, "{report}");
        assert!(!report.passed());
    }

    #[test]
    fn empty_mechanism_list() {
        let cfg = SimulationConfig {
            mechanisms: vec![],
            ..SimulationConfig::diagnostics()
        };
        let report = diagnostics(&cfg, Fault::None).unwrap();
        assert!(report.entries.is_empty());
        assert_eq!(report.to_string(), "");
    }

    #[test]
    fn higher_dimension_rejection() {
        let cfg = SimulationConfig {
            dim: 4,
            mechanisms: vec!["rejection".into(), "l2".into()],
            ..SimulationConfig::diagnostics()
        };
        assert!(diagnostics(&cfg, Fault::None).unwrap().passed());
    }

    #[test]
    fn laplace_ratio_holds() {
        let r = dp_histogram_ratio(1.0, 200_000, RngStream::new(5, 0)).unwrap();
        assert!(r.passed && r.bins_checked > 20, "{r:?}");
    }
}
