//! Draw from the closed-form ℓ1, ℓ2, ℓ∞ samplers and the rejection sampler
//! on the quadratic hull, and check that the gauge of the noise follows
//! `Gamma(m, ε/Δ)`.

use knorm::geometry::NormBall;
use knorm::stats::{gamma_cdf, ks_one_sample, mean};
use knorm::{MechanismConfig, RngStream};

fn main() -> knorm::Result<()> {
    let (epsilon, delta, m) = (1.0, 1.0, 2);
    let balls = [
        NormBall::l1(m),
        NormBall::l2(m),
        NormBall::linf(m),
        NormBall::k2(),
    ];
    let t = [10.0, -3.0];
    for (i, ball) in balls.into_iter().enumerate() {
        let mech = MechanismConfig::new(epsilon, delta, ball)?;
        let mut rng = RngStream::new(42, i as u64).rng();
        let mut gauges = Vec::new();
        let mut first = Vec::new();
        for _ in 0..10_000 {
            let out = mech.release(&t, &mut rng)?;
            let noise: Vec<f64> = out.iter().zip(&t).map(|(a, b)| a - b).collect();
            gauges.push(mech.ball().gauge(&noise)?);
            first.push(out[0]);
        }
        let ks = ks_one_sample(&gauges, |x| gamma_cdf(m as f64, epsilon / delta, x));
        println!(
            "{:<6} mean release[0] = {:>7.4}  gauge KS D = {:.4} (p = {:.3})",
            mech.ball().name(),
            mean(&first),
            ks.statistic,
            ks.p_value
        );
    }
    Ok(())
}
