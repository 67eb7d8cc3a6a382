//! Norm balls, gauges, volumes, sensitivities and containment.
//!
//! A [`NormBall`] is either an analytic ℓp ball or a body described only by
//! a membership predicate at unit scale plus an ℓ∞ bounding radius. All
//! mechanism geometry in the crate goes through the gauge
//! `‖x‖_K = inf { c ≥ 0 : x ∈ cK }`.

mod containment;
mod hulls;
mod record;
mod sensitivity;
mod volume;

use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, domain, invalid, Result};

pub use containment::{ball_containment, Containment};
pub use hulls::{k2_member, k3_member, BOUNDARY_SLACK, K2_VOLUME};
pub use sensitivity::{
    quadratic_pair_profile, quadratic_pair_sensitivity, Provenance, SensitivityEntry,
    SensitivityProfile,
};
pub use volume::{volume_lp, volume_monte_carlo, VolumeEstimate};

/// Relative tolerance of the ray bisection used for oracle gauges.
pub const GAUGE_TOLERANCE: f64 = 1e-10;

/// ℓp norm of `x`; `p = f64::INFINITY` gives the max norm.
pub fn lp_norm(x: &[f64], p: f64) -> Result<f64> {
    if x.is_empty() {
        return Err(domain("lp_norm of an empty vector"));
    }
    if !(p >= 1.0) {
        return Err(invalid(format!("norm exponent p = {p} must be >= 1")));
    }
    Ok(lp_norm_unchecked(x, p))
}

pub(crate) fn lp_norm_unchecked(x: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        x.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else if p == 1.0 {
        x.iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else {
        // scale by the max entry to avoid overflow for large p
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        scale
            * x.iter()
                .map(|v| (v.abs() / scale).powf(p))
                .sum::<f64>()
                .powf(1.0 / p)
    }
}

pub type Membership = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// A body known only through its membership predicate.
#[derive(Clone)]
pub struct OracleBall {
    name: String,
    /// Extra `key=value` fields carried into the text record.
    params: Vec<(String, String)>,
    bound: f64,
    membership: Membership,
    vertices: Option<Arc<Vec<Vec<f64>>>>,
    volume: Option<f64>,
}

#[derive(Clone)]
pub enum BallKind {
    Lp { p: f64, radius: f64 },
    Oracle(OracleBall),
}

/// A convex, bounded, absorbing body symmetric about the origin.
#[derive(Clone)]
pub struct NormBall {
    kind: BallKind,
    dim: usize,
}

impl NormBall {
    pub fn lp(p: f64, radius: f64, dim: usize) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(invalid(format!("norm exponent p = {p} must be >= 1")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!(
                "radius {radius} must be positive and finite"
            )));
        }
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        Ok(Self {
            kind: BallKind::Lp { p, radius },
            dim,
        })
    }

    pub fn l1(dim: usize) -> Self {
        Self::lp(1.0, 1.0, dim).expect("valid unit ball")
    }

    pub fn l2(dim: usize) -> Self {
        Self::lp(2.0, 1.0, dim).expect("valid unit ball")
    }

    pub fn linf(dim: usize) -> Self {
        Self::lp(f64::INFINITY, 1.0, dim).expect("valid unit ball")
    }

    /// A body given by a membership predicate at unit scale. `bound` must
    /// dominate the ℓ∞ norm of every member.
    pub fn oracle<F>(name: impl Into<String>, dim: usize, bound: f64, membership: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> bool + Send + Sync + 'static,
    {
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(domain(format!(
                "bounding radius {bound} must be positive and finite"
            )));
        }
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        Ok(Self {
            kind: BallKind::Oracle(OracleBall {
                name: name.into(),
                params: Vec::new(),
                bound,
                membership: Arc::new(membership),
                vertices: None,
                volume: None,
            }),
            dim,
        })
    }

    /// The ℓp ball expressed through its membership predicate only. Useful
    /// for checking oracle code paths against analytic answers.
    pub fn lp_oracle(p: f64, radius: f64, dim: usize) -> Result<Self> {
        let analytic = Self::lp(p, radius, dim)?;
        let mut ball = Self::oracle("lp", dim, radius, move |x| {
            lp_norm_unchecked(x, p) <= radius
        })?;
        ball.push_param("p", format_p(p));
        ball.push_param("radius", radius.to_string());
        if let BallKind::Oracle(o) = &mut ball.kind {
            o.vertices = analytic.lp_vertices().map(Arc::new);
        }
        Ok(ball)
    }

    /// Hull of the sensitivity space of `(Σx, 2Σx²)` over `x ∈ [-1,1]`.
    pub fn k2() -> Self {
        let mut ball = Self::oracle("k2", 2, 2.0, k2_member).expect("valid oracle");
        if let BallKind::Oracle(o) = &mut ball.kind {
            o.volume = Some(K2_VOLUME);
        }
        ball
    }

    /// Hull of the sensitivity space of `(Σx, Σy, Σxy)` over `x, y ∈ [-1,1]`.
    pub fn k3() -> Self {
        let mut vertices = Vec::new();
        for free in 0..3 {
            for s1 in [-2.0, 2.0] {
                for s2 in [-2.0, 2.0] {
                    let mut v = vec![0.0; 3];
                    let others: Vec<usize> = (0..3).filter(|&i| i != free).collect();
                    v[others[0]] = s1;
                    v[others[1]] = s2;
                    vertices.push(v);
                }
            }
        }
        Self::oracle("k3", 3, 2.0, k3_member)
            .expect("valid oracle")
            .with_vertices(vertices)
            .expect("cuboctahedron vertices lie in K3")
            .with_volume(160.0 / 3.0)
    }

    /// Attach a vertex list, making containment checks against this body
    /// exact (the body is then treated as the convex hull of the vertices).
    pub fn with_vertices(mut self, vertices: Vec<Vec<f64>>) -> Result<Self> {
        for v in &vertices {
            check_dim(self.dim, v.len())?;
            if !self.contains(v) {
                return Err(domain(format!("vertex {v:?} is not a member of the body")));
            }
        }
        match &mut self.kind {
            BallKind::Oracle(o) => o.vertices = Some(Arc::new(vertices)),
            BallKind::Lp { .. } => return Err(invalid("ℓp balls carry their own vertices")),
        }
        Ok(self)
    }

    /// Attach a known unit-scale volume to an oracle body.
    pub fn with_volume(mut self, volume: f64) -> Self {
        if let BallKind::Oracle(o) = &mut self.kind {
            o.volume = Some(volume);
        }
        self
    }

    pub(crate) fn push_param(&mut self, key: &str, value: String) {
        if let BallKind::Oracle(o) = &mut self.kind {
            o.params.push((key.to_string(), value));
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &BallKind {
        &self.kind
    }

    /// Short identifier: `l1`, `l2`, `linf`, `l3.5`, or the oracle name.
    pub fn name(&self) -> String {
        match &self.kind {
            BallKind::Lp { p, .. } => format!("l{}", format_p(*p)),
            BallKind::Oracle(o) => o.name.clone(),
        }
    }

    /// ℓ∞ bounding radius of the unit-scale body.
    pub fn bound(&self) -> f64 {
        match &self.kind {
            BallKind::Lp { radius, .. } => *radius,
            BallKind::Oracle(o) => o.bound,
        }
    }

    /// `Some((p, radius))` for analytic ℓp balls.
    pub fn as_lp(&self) -> Option<(f64, f64)> {
        match self.kind {
            BallKind::Lp { p, radius } => Some((p, radius)),
            BallKind::Oracle(_) => None,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match &self.kind {
            BallKind::Lp { p, radius } => lp_norm_unchecked(x, *p) <= *radius,
            BallKind::Oracle(o) => (o.membership)(x),
        }
    }

    /// Minkowski gauge `‖x‖_K`.
    pub fn gauge(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(domain("gauge of a non-finite vector"));
        }
        match &self.kind {
            BallKind::Lp { p, radius } => Ok(lp_norm_unchecked(x, *p) / radius),
            BallKind::Oracle(o) => oracle_gauge(o, x),
        }
    }

    /// Unit-scale volume when it is known in closed form.
    pub fn volume(&self) -> Option<f64> {
        match &self.kind {
            BallKind::Lp { p, radius } => Some(volume_lp(*p, self.dim, *radius)),
            BallKind::Oracle(o) => o.volume,
        }
    }

    /// Extreme points when the body is a polytope with a known vertex list.
    pub fn vertices(&self) -> Option<Vec<Vec<f64>>> {
        match &self.kind {
            BallKind::Lp { .. } => self.lp_vertices(),
            BallKind::Oracle(o) => o.vertices.as_ref().map(|v| v.as_ref().clone()),
        }
    }

    fn lp_vertices(&self) -> Option<Vec<Vec<f64>>> {
        let (p, r) = self.as_lp()?;
        let m = self.dim;
        if p == 1.0 {
            let mut out = Vec::with_capacity(2 * m);
            for i in 0..m {
                for s in [-r, r] {
                    let mut v = vec![0.0; m];
                    v[i] = s;
                    out.push(v);
                }
            }
            Some(out)
        } else if p.is_infinite() && m <= 16 {
            Some(
                (0..1u32 << m)
                    .map(|mask| {
                        (0..m)
                            .map(|i| if mask >> i & 1 == 1 { r } else { -r })
                            .collect()
                    })
                    .collect(),
            )
        } else {
            None
        }
    }

    /// Whether two balls describe the same body (same record).
    pub fn same_body(&self, other: &NormBall) -> bool {
        self.dim == other.dim && self.to_record() == other.to_record()
    }
}

fn oracle_gauge(o: &OracleBall, x: &[f64]) -> Result<f64> {
    let xmax = lp_norm_unchecked(x, f64::INFINITY);
    if xmax == 0.0 {
        return Ok(0.0);
    }
    let mut probe = vec![0.0; x.len()];
    let mut inside = |t: f64| {
        for (p, v) in probe.iter_mut().zip(x) {
            *p = t * v;
        }
        (o.membership)(&probe)
    };
    // t * x is on the boundary at t = 1 / gauge(x)
    let mut lo = 0.0;
    let mut hi = 2.0 * o.bound * (x.len() as f64).sqrt() / xmax;
    if inside(hi) {
        return Err(domain(format!(
            "oracle `{}` accepts a point outside its bounding box",
            o.name
        )));
    }
    for _ in 0..4000 {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if lo > 0.0 && hi - lo <= GAUGE_TOLERANCE * 1e-2 * lo {
            break;
        }
    }
    if lo == 0.0 && hi == 0.0 {
        return Err(domain(format!("oracle `{}` is not absorbing", o.name)));
    }
    Ok(2.0 / (lo + hi))
}

pub(crate) fn format_p(p: f64) -> String {
    if p.is_infinite() {
        "inf".to_string()
    } else {
        p.to_string()
    }
}

impl fmt::Debug for NormBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_record())
    }
}

impl fmt::Display for NormBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_record())
    }
}

/// The body `scale · K`.
#[derive(Clone, Debug)]
pub struct ScaledBall {
    pub ball: NormBall,
    pub scale: f64,
}

impl ScaledBall {
    pub fn new(ball: NormBall, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid(format!(
                "scale {scale} must be positive and finite"
            )));
        }
        Ok(Self { ball, scale })
    }

    pub fn dim(&self) -> usize {
        self.ball.dim()
    }

    /// Closed-form volume `scale^m · λ(K)` when `λ(K)` is known.
    pub fn volume(&self) -> Option<f64> {
        self.ball
            .volume()
            .map(|v| v * self.scale.powi(self.dim() as i32))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let scaled: Vec<f64> = x.iter().map(|v| v / self.scale).collect();
        self.ball.contains(&scaled)
    }
}
