//! Sensitivities of the quadratic pair `(Σx, 2Σx²)` and the volumes of the
//! balls they scale.

use knorm::geometry::{
    quadratic_pair_profile, quadratic_pair_sensitivity, volume_lp, volume_monte_carlo, NormBall,
    ScaledBall,
};
use knorm::RngStream;

fn main() -> knorm::Result<()> {
    for (name, p) in [("l1", 1.0), ("l2", 2.0), ("linf", f64::INFINITY)] {
        let delta = quadratic_pair_sensitivity(p)?;
        println!(
            "{name:>4}: sensitivity {delta:.10}  volume of delta*K = {:.6}",
            volume_lp(p, 2, delta)
        );
    }

    println!("\nprofile:");
    for (norm, entry) in quadratic_pair_profile()?.iter() {
        println!("  {norm:>4} {:?} {}", entry.provenance, entry.value);
    }

    let hull = ScaledBall::new(NormBall::k2(), 1.0)?;
    let mc = volume_monte_carlo(&NormBall::k2(), 1.0, 1_000_000, RngStream::new(7, 0))?;
    println!(
        "\nhull of the sensitivity space: exact {:.6}, Monte Carlo {:.6} ± {:.6}",
        hull.volume().unwrap_or(f64::NAN),
        mc.estimate,
        mc.std_error
    );
    Ok(())
}
