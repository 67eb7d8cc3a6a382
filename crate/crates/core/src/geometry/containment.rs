use rand_distr::{Distribution, StandardNormal};

use super::{lp_norm_unchecked, ScaledBall};
use crate::error::{check_dim, Result};
use crate::rng::RngStream;

/// Slack on gauge comparisons, absorbing bisection and rounding error.
const CONTAINMENT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Containment {
    Contained,
    /// A point of the first body lying outside the second.
    NotContained(Vec<f64>),
    /// No violation found among sampled boundary points; not a proof.
    Undetermined,
}

impl Containment {
    pub fn is_contained(&self) -> bool {
        matches!(self, Containment::Contained)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Containment::Contained => "contained",
            Containment::NotContained(_) => "not_contained",
            Containment::Undetermined => "undetermined",
        }
    }
}

/// Decide whether `a ⊆ b`.
///
/// ℓp pairs are decided analytically, polytopes with a vertex list by
/// checking their vertices, and everything else by probing
/// `n_directions` random boundary points of `a`.
pub fn ball_containment(
    a: &ScaledBall,
    b: &ScaledBall,
    n_directions: usize,
    stream: RngStream,
) -> Result<Containment> {
    check_dim(a.dim(), b.dim())?;
    let m = a.dim();

    if let (Some((p, ra)), Some((q, rb))) = (a.ball.as_lp(), b.ball.as_lp()) {
        return Ok(lp_containment(p, a.scale * ra, q, b.scale * rb, m));
    }

    if a.ball.same_body(&b.ball) {
        return Ok(if a.scale <= b.scale * (1.0 + CONTAINMENT_SLACK) {
            Containment::Contained
        } else {
            let mut witness = vec![0.0; m];
            witness[0] = 1.0;
            let g = a.ball.gauge(&witness)?;
            Containment::NotContained(witness.iter().map(|v| v * a.scale / g).collect())
        });
    }

    let outside =
        |x: &[f64]| -> Result<bool> { Ok(b.ball.gauge(x)? > b.scale * (1.0 + CONTAINMENT_SLACK)) };

    if let Some(vertices) = a.ball.vertices() {
        for v in vertices {
            let x: Vec<f64> = v.iter().map(|c| c * a.scale).collect();
            if outside(&x)? {
                return Ok(Containment::NotContained(x));
            }
        }
        return Ok(Containment::Contained);
    }

    let mut rng = stream.rng();
    let mut d = vec![0.0; m];
    for _ in 0..n_directions {
        for v in d.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        let g = a.ball.gauge(&d)?;
        if g == 0.0 {
            continue;
        }
        let x: Vec<f64> = d.iter().map(|v| v * a.scale / g).collect();
        if outside(&x)? {
            return Ok(Containment::NotContained(x));
        }
    }
    Ok(Containment::Undetermined)
}

/// `ra·B_p ⊆ rb·B_q` iff `ra · sup{‖x‖_q : ‖x‖_p ≤ 1} ≤ rb`, where the
/// supremum is 1 for `p ≤ q` and `m^(1/q - 1/p)` otherwise.
fn lp_containment(p: f64, ra: f64, q: f64, rb: f64, m: usize) -> Containment {
    let mf = m as f64;
    let inv = |s: f64| if s.is_infinite() { 0.0 } else { 1.0 / s };
    let (ratio, extremal) = if p <= q {
        let mut e = vec![0.0; m];
        e[0] = 1.0;
        (1.0, e)
    } else {
        // the all-equal direction normalized to unit ℓp norm
        let c = mf.powf(-inv(p));
        (mf.powf(inv(q) - inv(p)), vec![c; m])
    };
    if ra * ratio <= rb * (1.0 + 1e-12) {
        Containment::Contained
    } else {
        let witness: Vec<f64> = extremal.iter().map(|v| v * ra).collect();
        debug_assert!(lp_norm_unchecked(&witness, q) > rb);
        Containment::NotContained(witness)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{quadratic_pair_sensitivity, NormBall};

    fn sb(ball: NormBall, s: f64) -> ScaledBall {
        ScaledBall::new(ball, s).unwrap()
    }

    fn seed() -> RngStream {
        RngStream::new(42, 0)
    }

    #[test]
    fn approximate_radii_are_nested() {
        let linf = sb(NormBall::linf(2), 2.0);
        let l2 = sb(NormBall::l2(2), 8f64.sqrt());
        let l1 = sb(NormBall::l1(2), 4.0);
        assert!(ball_containment(&linf, &l2, 100, seed())
            .unwrap()
            .is_contained());
        assert!(ball_containment(&l2, &l1, 100, seed())
            .unwrap()
            .is_contained());
        assert!(ball_containment(&linf, &l1, 100, seed())
            .unwrap()
            .is_contained());
        assert!(!ball_containment(&l2, &linf, 100, seed())
            .unwrap()
            .is_contained());
    }

    #[test]
    fn exact_radii_witness() {
        let l1 = sb(NormBall::l1(2), 3.125);
        let linf = sb(NormBall::linf(2), 2.0);
        assert_eq!(
            ball_containment(&l1, &linf, 100, seed()).unwrap(),
            Containment::NotContained(vec![3.125, 0.0])
        );
        assert!(matches!(
            ball_containment(&linf, &l1, 100, seed()).unwrap(),
            Containment::NotContained(_)
        ));
    }

    #[test]
    fn reflexive() {
        for ball in [
            NormBall::l1(3),
            NormBall::l2(2),
            NormBall::k2(),
            NormBall::k3(),
        ] {
            let a = sb(ball.clone(), 1.3);
            assert!(ball_containment(&a, &a, 50, seed()).unwrap().is_contained());
        }
    }

    #[test]
    fn polytope_vertices_are_exact() {
        let k3 = sb(NormBall::k3(), 1.0);
        // cuboctahedron with vertices of ℓ∞ norm 2 sits in the radius-2 cube
        assert!(
            ball_containment(&k3, &sb(NormBall::linf(3), 2.0), 0, seed())
                .unwrap()
                .is_contained()
        );
        assert!(matches!(
            ball_containment(&k3, &sb(NormBall::linf(3), 1.99), 0, seed()).unwrap(),
            Containment::NotContained(_)
        ));
        // the ℓ1 ball of radius 4 contains K3; radius 3.9 does not
        assert!(ball_containment(&k3, &sb(NormBall::l1(3), 4.0), 0, seed())
            .unwrap()
            .is_contained());
        assert!(!ball_containment(&k3, &sb(NormBall::l1(3), 3.9), 0, seed())
            .unwrap()
            .is_contained());
    }

    #[test]
    fn oracle_pairs_are_probabilistic() {
        let k2 = sb(NormBall::k2(), 1.0);
        let big = sb(NormBall::lp_oracle(2.0, 1.0, 2).unwrap(), 3.0);
        assert_eq!(
            ball_containment(&k2, &big, 500, seed()).unwrap(),
            Containment::Undetermined
        );
        let small = sb(NormBall::lp_oracle(2.0, 1.0, 2).unwrap(), 2.1);
        assert!(matches!(
            ball_containment(&k2, &small, 500, seed()).unwrap(),
            Containment::NotContained(_)
        ));
    }

    #[test]
    fn hull_sits_inside_exact_radius_balls() {
        let k2 = sb(NormBall::k2(), 1.0);
        for (p, ball) in [
            (1.0, NormBall::l1(2)),
            (2.0, NormBall::l2(2)),
            (f64::INFINITY, NormBall::linf(2)),
        ] {
            let delta = quadratic_pair_sensitivity(p).unwrap();
            let verdict = ball_containment(&k2, &sb(ball, delta), 2000, seed()).unwrap();
            assert_eq!(verdict, Containment::Undetermined, "p={p}");
        }
    }

    #[test]
    fn transitivity_spot_check() {
        let a = sb(NormBall::linf(2), 2.0);
        let b = sb(NormBall::l2(2), 8f64.sqrt());
        let c = sb(NormBall::l1(2), 4.0);
        assert!(ball_containment(&a, &b, 0, seed()).unwrap().is_contained());
        assert!(ball_containment(&b, &c, 0, seed()).unwrap().is_contained());
        let c_oracle = sb(NormBall::lp_oracle(1.0, 1.0, 2).unwrap(), 4.0);
        let a_oracle = sb(NormBall::lp_oracle(2.0, 2.0, 2).unwrap(), 1.0);
        for verdict in [
            ball_containment(&a, &c_oracle, 1000, seed()).unwrap(),
            ball_containment(&a_oracle, &c, 1000, seed()).unwrap(),
        ] {
            assert!(!matches!(verdict, Containment::NotContained(_)));
        }
    }

    #[test]
    fn dimension_mismatch() {
        assert!(ball_containment(
            &sb(NormBall::l1(2), 1.0),
            &sb(NormBall::l1(3), 1.0),
            1,
            seed()
        )
        .is_err());
    }
}
