//! Private logistic regression with objective perturbation, using ℓ1, ℓ2
//! and ℓ∞ noise on the linear term.

use knorm::erm::{fit_unpenalized, objective_perturbation, LogisticLoss, LossSpec, ObjPertConfig};
use knorm::harness::{logistic_beta, simulated_logistic_data};
use knorm::RngStream;

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn main() -> knorm::Result<()> {
    let beta = logistic_beta();
    let m = beta.len();
    let data = simulated_logistic_data(10_000, &beta, &mut RngStream::new(3, 0).rng());
    let mle = fit_unpenalized(&LogisticLoss::new(m), &data)?;
    println!("MLE distance to beta: {:.4}", l2(&mle, &beta));

    for eps in [0.125, 0.5, 2.0] {
        for (name, p) in [("l1", 1.0), ("l2", 2.0), ("linf", f64::INFINITY)] {
            let cfg = ObjPertConfig::new(eps, 0.5, LossSpec::logistic(m, p)?)?;
            let theta = objective_perturbation(&cfg, &data, &mut RngStream::new(3, 1).rng())?;
            println!(
                "eps={eps:<5} {name:<4} gamma={:<8.3} distance to beta {:.4}",
                cfg.gamma(),
                l2(&theta, &beta)
            );
        }
    }
    Ok(())
}
