//! Linear regression through sanitized sufficient statistics.
//!
//! The unique non-constant entries of `XᵀX` and `XᵀY` are packed into a
//! statistic vector whose every slot has sensitivity 2 (squared sums are
//! doubled), noise is added with a K-norm mechanism, and the coefficients
//! are recovered with a pseudoinverse solve.

mod estimate;
mod preprocess;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{check_dim, invalid, Error, Result};
use crate::geometry::{k2_member, k3_member, NormBall};
use crate::sampling::{
    sample_k_mech_rejection, sample_l1_mech, sample_linf_mech, DEFAULT_MAX_ATTEMPTS,
};

pub use estimate::{dp_estimate, ols, pseudo_inverse_solve, OlsFit};
pub use preprocess::{empirical_quantile, preprocess, DataTable, PreprocessConfig};

/// Length of the statistic vector for `p` predictors:
/// `[(p+1)(p+2)/2 − 1] + (p+1)`.
pub fn statistic_len(p: usize) -> usize {
    (p + 1) * (p + 2) / 2 - 1 + (p + 1)
}

/// Meaning of one slot of the statistic vector. Predictor indices are
/// 1-based, matching the columns of the design matrix after the intercept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    /// `Σ xⱼ`
    Sum(usize),
    /// `2 Σ xⱼ²` (stored doubled)
    SquareSum(usize),
    /// `Σ xⱼ xₖ`, `j < k`
    CrossSum(usize, usize),
    /// `Σ y`
    ResponseSum,
    /// `Σ xⱼ y`
    ResponseCross(usize),
}

impl Slot {
    pub fn name(&self) -> String {
        match self {
            Slot::Sum(j) => format!("sum_x{j}"),
            Slot::SquareSum(j) => format!("2sum_x{j}x{j}"),
            Slot::CrossSum(j, k) => format!("sum_x{j}x{k}"),
            Slot::ResponseSum => "sum_y".to_string(),
            Slot::ResponseCross(j) => format!("sum_x{j}y"),
        }
    }

    pub fn is_doubled(&self) -> bool {
        matches!(self, Slot::SquareSum(_))
    }
}

/// Fixed slot ordering: column sums, then the upper triangle of the
/// predictor block column by column, then the response block.
pub fn statistic_layout(p: usize) -> Vec<Slot> {
    let mut slots: Vec<Slot> = (1..=p).map(Slot::Sum).collect();
    for k in 1..=p {
        for j in 1..=k {
            slots.push(if j == k {
                Slot::SquareSum(j)
            } else {
                Slot::CrossSum(j, k)
            });
        }
    }
    slots.push(Slot::ResponseSum);
    slots.extend((1..=p).map(Slot::ResponseCross));
    slots
}

/// Position of every slot kind, for assembling projections.
struct SlotIndex {
    sum: Vec<usize>,
    square: Vec<usize>,
    cross: Vec<((usize, usize), usize)>,
    response: usize,
    response_cross: Vec<usize>,
}

impl SlotIndex {
    fn new(p: usize) -> Self {
        let mut idx = SlotIndex {
            sum: vec![0; p + 1],
            square: vec![0; p + 1],
            cross: Vec::new(),
            response: 0,
            response_cross: vec![0; p + 1],
        };
        for (i, slot) in statistic_layout(p).into_iter().enumerate() {
            match slot {
                Slot::Sum(j) => idx.sum[j] = i,
                Slot::SquareSum(j) => idx.square[j] = i,
                Slot::CrossSum(j, k) => idx.cross.push(((j, k), i)),
                Slot::ResponseSum => idx.response = i,
                Slot::ResponseCross(j) => idx.response_cross[j] = i,
            }
        }
        idx
    }
}

/// A packed statistic vector together with its layout.
#[derive(Debug, Clone, PartialEq)]
pub struct StatisticVector {
    pub values: Vec<f64>,
    pub predictors: usize,
}

impl StatisticVector {
    pub fn new(values: Vec<f64>, predictors: usize) -> Result<Self> {
        check_dim(statistic_len(predictors), values.len())?;
        Ok(Self { values, predictors })
    }

    pub fn layout(&self) -> Vec<Slot> {
        statistic_layout(self.predictors)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `slot,value` rows under a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("slot,value\n");
        for (slot, v) in self.layout().iter().zip(&self.values) {
            out.push_str(&format!("{},{v}\n", slot.name()));
        }
        out
    }
}

/// Design matrix with a leading column of ones, and a response vector.
#[derive(Debug, Clone)]
pub struct RegressionDataset {
    design: DMatrix<f64>,
    response: DVector<f64>,
}

impl RegressionDataset {
    /// Validating constructor: first column all ones, every entry of the
    /// design and response in `[-1, 1]`.
    pub fn new(design: DMatrix<f64>, response: DVector<f64>) -> Result<Self> {
        let ds = Self::new_unbounded_response(design, response)?;
        for (i, y) in ds.response.iter().enumerate() {
            if !(y.abs() <= 1.0) {
                return Err(Error::Data {
                    row: i,
                    column: "response".into(),
                    message: format!("value {y} outside [-1, 1]"),
                });
            }
        }
        Ok(ds)
    }

    /// Prepend the intercept column to an `n × p` predictor matrix.
    pub fn from_features(features: &DMatrix<f64>, response: DVector<f64>) -> Result<Self> {
        Self::new(with_intercept(features), response)
    }

    /// Like [`RegressionDataset::new`] but without the range check on the
    /// response. Used by the coverage simulation, whose Gaussian response
    /// is unbounded; statistics built from such data carry no sensitivity
    /// guarantee for the response block.
    pub fn new_unbounded_response(design: DMatrix<f64>, response: DVector<f64>) -> Result<Self> {
        if design.nrows() != response.len() {
            return Err(Error::DimensionMismatch {
                expected: design.nrows(),
                found: response.len(),
            });
        }
        if design.ncols() < 2 {
            return Err(invalid(
                "design needs an intercept and at least one predictor",
            ));
        }
        for i in 0..design.nrows() {
            if design[(i, 0)] != 1.0 {
                return Err(Error::Data {
                    row: i,
                    column: "intercept".into(),
                    message: "first design column must be all ones".into(),
                });
            }
            for j in 1..design.ncols() {
                let v = design[(i, j)];
                if !(v.abs() <= 1.0) {
                    return Err(Error::Data {
                        row: i,
                        column: format!("x{j}"),
                        message: format!("value {v} outside [-1, 1]"),
                    });
                }
            }
        }
        Ok(Self { design, response })
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn response(&self) -> &DVector<f64> {
        &self.response
    }

    pub fn n(&self) -> usize {
        self.design.nrows()
    }

    /// Number of predictors (excluding the intercept).
    pub fn predictors(&self) -> usize {
        self.design.ncols() - 1
    }
}

pub fn with_intercept(features: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, p) = features.shape();
    DMatrix::from_fn(
        n,
        p + 1,
        |i, j| if j == 0 { 1.0 } else { features[(i, j - 1)] },
    )
}

/// Contribution of a single row `(x₁..x_p, y)` to the statistic vector.
pub fn row_statistic(x: &[f64], y: f64) -> Vec<f64> {
    statistic_layout(x.len())
        .into_iter()
        .map(|slot| match slot {
            Slot::Sum(j) => x[j - 1],
            Slot::SquareSum(j) => 2.0 * x[j - 1] * x[j - 1],
            Slot::CrossSum(j, k) => x[j - 1] * x[k - 1],
            Slot::ResponseSum => y,
            Slot::ResponseCross(j) => x[j - 1] * y,
        })
        .collect()
}

/// Pack the sufficient statistics of `data`.
pub fn build_statistic(data: &RegressionDataset) -> StatisticVector {
    let p = data.predictors();
    let layout = statistic_layout(p);
    let mut values = vec![0.0; layout.len()];
    let mut x = vec![0.0; p];
    for i in 0..data.n() {
        for (j, xj) in x.iter_mut().enumerate() {
            *xj = data.design[(i, j + 1)];
        }
        let y = data.response[i];
        for (v, slot) in values.iter_mut().zip(&layout) {
            *v += match *slot {
                Slot::Sum(j) => x[j - 1],
                Slot::SquareSum(j) => 2.0 * x[j - 1] * x[j - 1],
                Slot::CrossSum(j, k) => x[j - 1] * x[k - 1],
                Slot::ResponseSum => y,
                Slot::ResponseCross(j) => x[j - 1] * y,
            };
        }
    }
    StatisticVector {
        values,
        predictors: p,
    }
}

/// Membership in `K_T`: the `[-2,2]^d` box intersected with the quadratic
/// hull on every `(Σxⱼ, 2Σxⱼ²)` pair and the cross-product hull on every
/// `(Σxⱼ, Σxₖ, Σxⱼxₖ)` and `(Σxⱼ, Σy, Σxⱼy)` triple.
pub fn kt_member(u: &[f64], p: usize) -> Result<bool> {
    check_dim(statistic_len(p), u.len())?;
    Ok(kt_member_unchecked(u, &SlotIndex::new(p)))
}

fn kt_member_unchecked(u: &[f64], idx: &SlotIndex) -> bool {
    if u.iter().any(|v| !(v.abs() <= 2.0)) {
        return false;
    }
    let p = idx.sum.len() - 1;
    for j in 1..=p {
        if !k2_member(&[u[idx.sum[j]], u[idx.square[j]]]) {
            return false;
        }
        if !k3_member(&[u[idx.sum[j]], u[idx.response], u[idx.response_cross[j]]]) {
            return false;
        }
    }
    idx.cross
        .iter()
        .all(|&((j, k), c)| k3_member(&[u[idx.sum[j]], u[idx.sum[k]], u[c]]))
}

/// `K_T` as a norm ball (unit sensitivity, ℓ∞ bound 2).
pub fn kt_ball(p: usize) -> Result<NormBall> {
    if p == 0 {
        return Err(invalid("need at least one predictor"));
    }
    let idx = SlotIndex::new(p);
    let mut ball = NormBall::oracle("kt", statistic_len(p), 2.0, move |u| {
        kt_member_unchecked(u, &idx)
    })?;
    ball.push_param("predictors", p.to_string());
    Ok(ball)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinregMechanism {
    L1,
    LInf,
    OptimalKt,
}

impl LinregMechanism {
    pub fn label(&self) -> &'static str {
        match self {
            LinregMechanism::L1 => "l1",
            LinregMechanism::LInf => "linf",
            LinregMechanism::OptimalKt => "kt",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(Self::L1),
            "linf" => Ok(Self::LInf),
            "kt" | "optimal" => Ok(Self::OptimalKt),
            _ => Err(invalid(format!(
                "unknown linear-regression mechanism `{s}`"
            ))),
        }
    }

    /// Sensitivity under this mechanism's norm for a length-`d` statistic.
    pub fn sensitivity(&self, d: usize) -> f64 {
        match self {
            LinregMechanism::L1 => 2.0 * d as f64,
            LinregMechanism::LInf => 2.0,
            LinregMechanism::OptimalKt => 1.0,
        }
    }
}

/// Add K-norm noise to the statistic vector.
pub fn sanitize_statistic<R: Rng + ?Sized>(
    t: &StatisticVector,
    mech: LinregMechanism,
    epsilon: f64,
    rng: &mut R,
) -> Result<StatisticVector> {
    let delta = mech.sensitivity(t.len());
    let values = match mech {
        LinregMechanism::L1 => sample_l1_mech(&t.values, delta, epsilon, rng)?,
        LinregMechanism::LInf => sample_linf_mech(&t.values, delta, epsilon, rng)?,
        LinregMechanism::OptimalKt => {
            let ball = kt_ball(t.predictors)?;
            sample_k_mech_rejection(&t.values, &ball, delta, epsilon, rng, DEFAULT_MAX_ATTEMPTS)?
        }
    };
    Ok(StatisticVector {
        values,
        predictors: t.predictors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::stats::{gamma_cdf, ks_one_sample, mean, std_error};
    use rand::Rng;

    fn random_row<R: Rng>(rng: &mut R, p: usize) -> (Vec<f64>, f64) {
        let x = (0..p).map(|_| rng.random_range(-1.0..=1.0)).collect();
        (x, rng.random_range(-1.0..=1.0))
    }

    /// Rows at the corners of the cube hit the extremes of S_T more often.
    fn extreme_row<R: Rng>(rng: &mut R, p: usize) -> (Vec<f64>, f64) {
        let pick = |rng: &mut R| match rng.random_range(0..3) {
            0 => -1.0,
            1 => 1.0,
            _ => rng.random_range(-1.0..=1.0),
        };
        let x = (0..p).map(|_| pick(rng)).collect();
        (x, pick(rng))
    }

    #[test]
    fn length_formula() {
        assert_eq!(statistic_len(1), 4);
        assert_eq!(statistic_len(5), 26);
        for p in 1..8 {
            assert_eq!(statistic_layout(p).len(), statistic_len(p));
        }
    }

    #[test]
    fn single_row_example() {
        let features = DMatrix::from_row_slice(1, 1, &[0.5]);
        let ds =
            RegressionDataset::from_features(&features, DVector::from_vec(vec![-1.0])).unwrap();
        assert_eq!(build_statistic(&ds).values, vec![0.5, 0.5, -1.0, -0.5]);
    }

    #[test]
    fn layout_names() {
        let names: Vec<String> = statistic_layout(2).iter().map(Slot::name).collect();
        assert_eq!(
            names,
            [
                "sum_x1",
                "sum_x2",
                "2sum_x1x1",
                "sum_x1x2",
                "2sum_x2x2",
                "sum_y",
                "sum_x1y",
                "sum_x2y"
            ]
        );
    }

    #[test]
    fn statistic_csv_names_slots() {
        let t = StatisticVector::new(vec![0.5, 0.5, -1.0, -0.5], 1).unwrap();
        assert_eq!(
            t.to_csv(),
            "slot,value\nsum_x1,0.5\n2sum_x1x1,0.5\nsum_y,-1\nsum_x1y,-0.5\n"
        );
    }

    #[test]
    fn identical_datasets_identical_statistics() {
        let f = DMatrix::from_fn(20, 3, |i, j| ((i * 7 + j * 3) % 11) as f64 / 11.0 - 0.5);
        let y = DVector::from_fn(20, |i, _| ((i * 5) % 7) as f64 / 7.0 - 0.5);
        let a = RegressionDataset::from_features(&f, y.clone()).unwrap();
        let b = RegressionDataset::from_features(&f, y).unwrap();
        assert_eq!(build_statistic(&a), build_statistic(&b));
    }

    #[test]
    fn statistic_is_sum_of_rows() {
        let mut rng = RngStream::new(1, 0).rng();
        let rows: Vec<(Vec<f64>, f64)> = (0..30).map(|_| random_row(&mut rng, 3)).collect();
        let f = DMatrix::from_fn(30, 3, |i, j| rows[i].0[j]);
        let y = DVector::from_fn(30, |i, _| rows[i].1);
        let built = build_statistic(&RegressionDataset::from_features(&f, y).unwrap());
        let mut summed = vec![0.0; statistic_len(3)];
        for (x, y) in &rows {
            for (s, v) in summed.iter_mut().zip(row_statistic(x, *y)) {
                *s += v;
            }
        }
        for (a, b) in built.values.iter().zip(&summed) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dataset_validation() {
        let f = DMatrix::from_row_slice(2, 1, &[0.5, 1.5]);
        assert!(RegressionDataset::from_features(&f, DVector::from_vec(vec![0.0, 0.0])).is_err());
        let f = DMatrix::from_row_slice(2, 1, &[0.5, 0.5]);
        assert!(RegressionDataset::from_features(&f, DVector::from_vec(vec![0.0, 2.0])).is_err());
        assert!(RegressionDataset::new_unbounded_response(
            with_intercept(&f),
            DVector::from_vec(vec![0.0, 2.0])
        )
        .is_ok());
        let no_ones = DMatrix::from_row_slice(1, 2, &[0.5, 0.5]);
        assert!(RegressionDataset::new(no_ones, DVector::from_vec(vec![0.0])).is_err());
    }

    #[test]
    fn kt_examples() {
        assert!(kt_member(&[0.0; 4], 1).unwrap());
        assert!(!kt_member(&[2.0, 0.1, 0.0, 0.0], 1).unwrap());
        assert!(kt_member(&[0.0; 3], 1).is_err());
    }

    #[test]
    fn sensitivity_space_inside_kt() {
        let mut rng = RngStream::new(2, 0).rng();
        for p in [1usize, 2, 5] {
            let mut worst: f64 = 0.0;
            for trial in 0..10_000 {
                let ((x1, y1), (x2, y2)) = if trial % 2 == 0 {
                    (random_row(&mut rng, p), random_row(&mut rng, p))
                } else {
                    (extreme_row(&mut rng, p), extreme_row(&mut rng, p))
                };
                let diff: Vec<f64> = row_statistic(&x1, y1)
                    .iter()
                    .zip(row_statistic(&x2, y2))
                    .map(|(a, b)| a - b)
                    .collect();
                worst = diff.iter().fold(worst, |m, v| m.max(v.abs()));
                assert!(kt_member(&diff, p).unwrap(), "p={p}: {diff:?}");
            }
            assert!(worst <= 2.0 + 1e-12);
        }
    }

    #[test]
    fn kt_members_are_bounded() {
        let ball = kt_ball(2).unwrap();
        let mut rng = RngStream::new(3, 0).rng();
        for _ in 0..20_000 {
            let u: Vec<f64> = (0..ball.dim())
                .map(|_| rng.random_range(-3.0..3.0))
                .collect();
            if ball.contains(&u) {
                assert!(u.iter().all(|v| v.abs() <= 2.0));
                let neg: Vec<f64> = u.iter().map(|v| -v).collect();
                assert!(ball.contains(&neg));
            }
        }
    }

    #[test]
    fn sanitize_with_huge_budget_is_identity() {
        let t = StatisticVector::new(vec![1.0, -2.0, 3.5, 0.25], 1).unwrap();
        let mut rng = RngStream::new(4, 0).rng();
        for mech in [
            LinregMechanism::L1,
            LinregMechanism::LInf,
            LinregMechanism::OptimalKt,
        ] {
            let s = sanitize_statistic(&t, mech, 1e9, &mut rng).unwrap();
            for (a, b) in s.values.iter().zip(&t.values) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn linf_noise_norm_is_gamma() {
        let t = StatisticVector::new(vec![0.0; 4], 1).unwrap();
        let mut rng = RngStream::new(5, 0).rng();
        let eps = 0.8;
        let norms: Vec<f64> = (0..10_000)
            .map(|_| {
                let s = sanitize_statistic(&t, LinregMechanism::LInf, eps, &mut rng).unwrap();
                s.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            })
            .collect();
        assert!(ks_one_sample(&norms, |x| gamma_cdf(4.0, eps / 2.0, x)).passes(0.01));
    }

    #[test]
    fn sanitized_mean_is_unbiased() {
        let t = StatisticVector::new(vec![3.0, -1.0, 10.0, 0.5], 1).unwrap();
        let mut rng = RngStream::new(6, 0).rng();
        for mech in [
            LinregMechanism::L1,
            LinregMechanism::LInf,
            LinregMechanism::OptimalKt,
        ] {
            let draws: Vec<Vec<f64>> = (0..10_000)
                .map(|_| sanitize_statistic(&t, mech, 1.0, &mut rng).unwrap().values)
                .collect();
            for j in 0..4 {
                let c: Vec<f64> = draws.iter().map(|d| d[j]).collect();
                assert!(
                    (mean(&c) - t.values[j]).abs() < 4.0 * std_error(&c),
                    "{mech:?} slot {j}"
                );
            }
        }
    }
}
