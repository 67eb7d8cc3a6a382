//! Membership predicates for the sensitivity hulls of the quadratic pair
//! `(Σx, 2Σx²)` and the cross-product triple `(Σx, Σy, Σxy)`.

/// Area of the quadratic-pair hull: the 4×4 box minus four parabolic caps
/// of area 2/3 each.
pub const K2_VOLUME: f64 = 40.0 / 3.0;

/// Absolute slack on the curved and ℓ1 faces, so that sensitivity-space
/// points computed in floating point on the boundary are accepted.
pub const BOUNDARY_SLACK: f64 = 1e-12;

pub fn k2_member(u: &[f64]) -> bool {
    let (a, b) = (u[0].abs(), u[1].abs());
    if a > 2.0 || b > 2.0 {
        return false;
    }
    a <= 1.0 || b <= 2.0 - 2.0 * (a - 1.0).powi(2) + BOUNDARY_SLACK
}

pub fn k3_member(u: &[f64]) -> bool {
    u.iter().all(|v| v.abs() <= 2.0)
        && u.iter().map(|v| v.abs()).sum::<f64>() <= 4.0 + BOUNDARY_SLACK
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k2_examples() {
        assert!(k2_member(&[1.0, 2.0]));
        assert!(!k2_member(&[2.0, 0.1]));
        assert!(k2_member(&[0.0, 0.0]));
        assert!(k2_member(&[2.0, 0.0]));
        assert!(!k2_member(&[-1.5, 1.6]));
        assert!(k2_member(&[-1.5, 1.5]));
    }

    #[test]
    fn k3_examples() {
        assert!(k3_member(&[2.0, 2.0, 0.0]));
        assert!(!k3_member(&[2.0, 2.0, 1.0]));
        assert!(k3_member(&[0.0, 0.0, 0.0]));
        assert!(!k3_member(&[2.5, 0.0, 0.0]));
    }

    #[test]
    fn sensitivity_spaces_lie_in_hulls() {
        // brute-force enumeration of single-row differences on a grid
        let grid: Vec<f64> = (0..=40).map(|i| -1.0 + i as f64 / 20.0).collect();
        for &x in &grid {
            for &xp in &grid {
                assert!(k2_member(&[x - xp, 2.0 * (x * x - xp * xp)]));
            }
        }
        for &x in grid.iter().step_by(4) {
            for &y in grid.iter().step_by(4) {
                for &xp in grid.iter().step_by(4) {
                    for &yp in grid.iter().step_by(4) {
                        assert!(k3_member(&[x - xp, y - yp, x * y - xp * yp]));
                    }
                }
            }
        }
    }
}
