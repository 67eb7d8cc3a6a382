use std::collections::BTreeMap;

use super::{format_p, lp_norm_unchecked};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Provenance {
    Exact,
    UpperBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityEntry {
    pub value: f64,
    pub provenance: Provenance,
}

/// K-norm sensitivities of one statistic, keyed by norm identifier.
#[derive(Debug, Clone, Default)]
pub struct SensitivityProfile {
    statistic_id: String,
    entries: BTreeMap<(String, Provenance), f64>,
}

impl SensitivityProfile {
    pub fn new(statistic_id: impl Into<String>) -> Self {
        Self {
            statistic_id: statistic_id.into(),
            entries: BTreeMap::new(),
        }
    }

    pub fn statistic_id(&self) -> &str {
        &self.statistic_id
    }

    /// Record a sensitivity. Rejects non-finite or nonpositive values, and
    /// any exact value that exceeds an upper bound for the same norm.
    pub fn insert(
        &mut self,
        norm: impl Into<String>,
        value: f64,
        provenance: Provenance,
    ) -> Result<()> {
        let norm = norm.into();
        if !(value > 0.0 && value.is_finite()) {
            return Err(invalid(format!(
                "sensitivity {value} for `{norm}` must be finite and positive"
            )));
        }
        let (exact, upper) = match provenance {
            Provenance::Exact => (
                Some(value),
                self.entries
                    .get(&(norm.clone(), Provenance::UpperBound))
                    .copied(),
            ),
            Provenance::UpperBound => (
                self.entries
                    .get(&(norm.clone(), Provenance::Exact))
                    .copied(),
                Some(value),
            ),
        };
        if let (Some(e), Some(u)) = (exact, upper) {
            if e > u * (1.0 + 1e-12) {
                return Err(invalid(format!(
                    "exact sensitivity {e} for `{norm}` exceeds its upper bound {u}"
                )));
            }
        }
        self.entries.insert((norm, provenance), value);
        Ok(())
    }

    pub fn get(&self, norm: &str, provenance: Provenance) -> Option<f64> {
        self.entries.get(&(norm.to_string(), provenance)).copied()
    }

    /// The tightest known value for `norm` (exact if present).
    pub fn best(&self, norm: &str) -> Option<SensitivityEntry> {
        [Provenance::Exact, Provenance::UpperBound]
            .into_iter()
            .find_map(|prov| {
                self.get(norm, prov).map(|value| SensitivityEntry {
                    value,
                    provenance: prov,
                })
            })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, SensitivityEntry)> {
        self.entries.iter().map(|((norm, provenance), value)| {
            (
                norm.as_str(),
                SensitivityEntry {
                    value: *value,
                    provenance: *provenance,
                },
            )
        })
    }
}

const GOLDEN_TOLERANCE: f64 = 1e-10;

/// ℓp sensitivity of `T(X) = (Σxᵢ, 2Σxᵢ²)` over `xᵢ ∈ [-1, 1]`.
///
/// By symmetry of the sensitivity space it suffices to maximize
/// `‖(u, 2 - 2(u-1)²)‖_p` over `u ∈ [0, 2]`.
pub fn quadratic_pair_sensitivity(p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(invalid(format!("norm exponent p = {p} must be >= 1")));
    }
    let objective = |u: f64| lp_norm_unchecked(&[u, 2.0 - 2.0 * (u - 1.0).powi(2)], p);
    // The sup over u ∈ [0,1] of the hull boundary (u, 2) is attained at u = 1,
    // so the search runs on [1, 2], where the objective is unimodal except
    // for p = ∞ whose ties sit at the endpoints.
    let best = golden_section_max(objective, 1.0, 2.0, GOLDEN_TOLERANCE);
    Ok([best, objective(1.0), objective(2.0)]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max))
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    f(0.5 * (a + b))
}

/// Exact ℓ1/ℓ2/ℓ∞ sensitivities of the quadratic pair together with the
/// coordinate-wise upper bounds `4`, `√8`, `2`.
pub fn quadratic_pair_profile() -> Result<SensitivityProfile> {
    let mut profile = SensitivityProfile::new("quadratic_pair");
    for (p, upper) in [(1.0, 4.0), (2.0, 8f64.sqrt()), (f64::INFINITY, 2.0)] {
        let norm = format!("l{}", format_p(p));
        profile.insert(
            norm.clone(),
            quadratic_pair_sensitivity(p)?,
            Provenance::Exact,
        )?;
        profile.insert(norm, upper, Provenance::UpperBound)?;
    }
    Ok(profile)
}
