use rand::Rng;

use super::{run_replicates, Aggregate, Record, ResultTable, SimulationConfig};
use crate::erm::{
    fit_unpenalized, objective_perturbation, Example, LogisticLoss, LossSpec, ObjPertConfig,
};
use crate::error::{invalid, Result};
use crate::geometry::lp_norm;
use crate::rng::RngStream;

/// `(0, −1, −1/2, −1/4, 0, 3/4, 3/2)`
pub fn logistic_beta() -> Vec<f64> {
    vec![0.0, -1.0, -0.5, -0.25, 0.0, 0.75, 1.5]
}

/// Features uniform on `[-1,1]^m`, labels Bernoulli with success
/// probability `1/(1+e^{−xᵀβ})`.
pub fn simulated_logistic_data<R: Rng + ?Sized>(
    n: usize,
    beta: &[f64],
    rng: &mut R,
) -> Vec<Example> {
    (0..n)
        .map(|_| {
            let x: Vec<f64> = beta.iter().map(|_| rng.random_range(-1.0..=1.0)).collect();
            let z: f64 = x.iter().zip(beta).map(|(a, b)| a * b).sum();
            let y = if rng.random::<f64>() < 1.0 / (1.0 + (-z).exp()) {
                1.0
            } else {
                0.0
            };
            Example::new(x, y)
        })
        .collect()
}

fn mechanism_norm(name: &str) -> Result<f64> {
    match name {
        "l1" => Ok(1.0),
        "l2" => Ok(2.0),
        "linf" => Ok(f64::INFINITY),
        _ => Err(invalid(format!(
            "logistic simulations support l1, l2, linf; got `{name}`"
        ))),
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    lp_norm(&d, 2.0).unwrap_or(f64::NAN)
}

/// Private logistic regression by objective perturbation. Each replicate
/// draws a fresh dataset; records `l2_error = ‖θ − β‖₂` per
/// `(epsilon, mechanism)` and for the non-private fit (`mle`, infinite
/// epsilon). Summaries are lower medians. The echo includes the zero-vector
/// baseline `‖β‖₂`.
pub fn simulate_logistic(cfg: &SimulationConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let beta = logistic_beta();
    if cfg.dim != beta.len() {
        return Err(invalid(format!(
            "logistic simulation uses m = {}, got {}",
            beta.len(),
            cfg.dim
        )));
    }
    let mut specs = Vec::new();
    for name in &cfg.mechanisms {
        specs.push((
            name.clone(),
            LossSpec::logistic(beta.len(), mechanism_norm(name)?)?,
        ));
    }
    let loss = LogisticLoss::new(beta.len());
    let root = RngStream::new(cfg.seed, 0);
    let per_rep = run_replicates(cfg.replicates, |rep| {
        let stream = root.substream(&[rep as u64]);
        let data = simulated_logistic_data(cfg.n, &beta, &mut stream.substream(&[0]).rng());
        let mut rows = Vec::new();
        let mle = fit_unpenalized(&loss, &data)?;
        rows.push(Record {
            epsilon: f64::INFINITY,
            mechanism: "mle".into(),
            replicate: rep,
            metric: "l2_error".into(),
            value: distance(&mle, &beta),
        });
        for (ei, &eps) in cfg.epsilons.iter().enumerate() {
            for (mi, (name, spec)) in specs.iter().enumerate() {
                let op = ObjPertConfig::new(eps, cfg.q, spec.clone())?;
                let mut rng = stream.substream(&[1 + ei as u64, 1 + mi as u64]).rng();
                let theta = objective_perturbation(&op, &data, &mut rng)?;
                rows.push(Record {
                    epsilon: eps,
                    mechanism: name.clone(),
                    replicate: rep,
                    metric: "l2_error".into(),
                    value: distance(&theta, &beta),
                });
            }
        }
        Ok(rows)
    })?;
    let mut echo = cfg.echo();
    echo.push((
        "baseline_zero_l2_error".into(),
        distance(&vec![0.0; beta.len()], &beta).to_string(),
    ));
    Ok(ResultTable::new(
        echo,
        per_rep.into_iter().flatten().collect(),
        Aggregate::LowerMedian,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(reps: usize) -> SimulationConfig {
        SimulationConfig {
            n: 2_000,
            replicates: reps,
            epsilons: vec![0.25, 1e6],
            ..SimulationConfig::logistic()
        }
    }

    #[test]
    fn baseline_is_beta_norm() {
        let t = simulate_logistic(&small(1)).unwrap();
        let baseline: f64 = t
            .echo_value("baseline_zero_l2_error")
            .unwrap()
            .parse()
            .unwrap();
        let expect = (1.0f64 + 0.25 + 0.0625 + 0.5625 + 2.25).sqrt();
        assert!((baseline - expect).abs() < 1e-12);
        assert!((baseline - 2.0310).abs() < 1e-4);
    }

    #[test]
    fn huge_budget_matches_mle() {
        let cfg = SimulationConfig {
            n: 10_000,
            replicates: 5,
            epsilons: vec![1e6],
            ..SimulationConfig::logistic()
        };
        let t = simulate_logistic(&cfg).unwrap();
        let mle = t.summary_value(f64::INFINITY, "mle", "l2_error").unwrap();
        for mech in ["l1", "l2", "linf"] {
            let v = t.summary_value(1e6, mech, "l2_error").unwrap();
            assert!((v - mle).abs() < 0.05, "{mech}: {v} vs {mle}");
        }
    }

    #[test]
    fn deterministic_output() {
        let a = simulate_logistic(&small(4)).unwrap();
        let b = simulate_logistic(&small(4)).unwrap();
        assert_eq!(a.long_csv(), b.long_csv());
        assert_eq!(a.summary_csv(), b.summary_csv());
        let mut other = small(4);
        other.seed = 1;
        assert_ne!(simulate_logistic(&other).unwrap().long_csv(), a.long_csv());
    }

    #[test]
    fn utility_improves_with_budget() {
        let cfg = SimulationConfig {
            n: 1_000,
            replicates: 100,
            epsilons: vec![0.25, 1.0, 4.0],
            mechanisms: vec!["linf".into()],
            ..SimulationConfig::logistic()
        };
        let t = simulate_logistic(&cfg).unwrap();
        let med: Vec<f64> = cfg
            .epsilons
            .iter()
            .map(|e| t.summary_value(*e, "linf", "l2_error").unwrap())
            .collect();
        assert!(med[0] >= med[1] && med[1] >= med[2], "{med:?}");
    }

    #[test]
    fn rejects_unsupported_mechanism() {
        let cfg = SimulationConfig {
            mechanisms: vec!["kt".into()],
            ..small(1)
        };
        assert!(simulate_logistic(&cfg).is_err());
    }
}
