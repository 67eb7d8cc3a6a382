//! Rank the ℓ1, ℓ2 and ℓ∞ mechanisms for the quadratic pair by containment
//! and by volume, and the hull mechanism against each.

use knorm::geometry::{quadratic_pair_sensitivity, NormBall};
use knorm::ordering::{compare_with, conditional_variance};
use knorm::{MechanismConfig, RngStream};

fn main() -> knorm::Result<()> {
    let eps = 1.0;
    let mut mechs = Vec::new();
    for (ball, p) in [
        (NormBall::l1(2), 1.0),
        (NormBall::l2(2), 2.0),
        (NormBall::linf(2), f64::INFINITY),
    ] {
        mechs.push(MechanismConfig::new(
            eps,
            quadratic_pair_sensitivity(p)?,
            ball,
        )?);
    }
    mechs.push(MechanismConfig::new(eps, 1.0, NormBall::k2())?);

    for i in 0..mechs.len() {
        for j in i + 1..mechs.len() {
            let r = compare_with(
                &mechs[i],
                &mechs[j],
                RngStream::new(1, (i * 10 + j) as u64),
                2_000,
                200_000,
            )?;
            println!(
                "{:>4} vs {:<4} tightness={:<13} by containment: {:<13} by volume: {}",
                r.labels[0],
                r.labels[1],
                r.tightness.label(),
                r.preferred_label(r.preferred_by_containment),
                r.preferred_label(r.preferred_by_volume)
            );
        }
    }

    println!("\nconditional variance of |Vᵀe| along a few directions:");
    for k in 0..4 {
        let angle = k as f64 * std::f64::consts::FRAC_PI_8;
        let e = [angle.cos(), angle.sin()];
        let row: Vec<String> = mechs
            .iter()
            .map(|m| {
                Ok(format!(
                    "{}={:.3}",
                    m.ball().name(),
                    conditional_variance(m, &e)?
                ))
            })
            .collect::<knorm::Result<_>>()?;
        println!("  angle {angle:.3}: {}", row.join("  "));
    }
    Ok(())
}
