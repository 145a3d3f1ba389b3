//! Principal components of the sample covariance, the eigenvalue-replacement
//! estimator V = Q·diag(λⱼ²)·Qᵀ (λⱼ a robust scale of the data projected on
//! the j-th eigenvector), and the angle metric on directions.
//!
//! Directions are lines through the origin: θ and −θ are identified and
//! stored with their first non-negligible coordinate positive. When the top
//! eigenvalue is tied the top component is the whole space, represented by
//! [`ExtendedDirection::FullSpace`].

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};

use crate::breakdown::{cluster_points, ContaminationMode, ContaminationPlan};
use crate::error::{Error, Result};
use crate::location::{mad, Sample, MAD_NORMAL_CONSISTENCY};

pub const MAX_DIMENSION: usize = 32;

/// Relative top-eigenvalue gap below which the top component is FullSpace.
pub const DEFAULT_GAP_TOL: f64 = 1e-6;

const SYMMETRY_TOL: f64 = 1e-10;
const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;
/// Coordinates smaller than this are skipped when canonicalizing signs.
const SIGN_EPS: f64 = 1e-12;

/// n ≥ 2 observations of dimension 2 ≤ d ≤ 32, one per row.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiSample {
    data: DMatrix<f64>,
}

impl MultiSample {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::InsufficientData { needed: 2, found: n });
        }
        let d = rows[0].len();
        if d < 2 {
            return Err(Error::param("multivariate samples need dimension at least 2"));
        }
        if d > MAX_DIMENSION {
            return Err(Error::DimensionTooLarge(d));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: row.len(), line: Some(i + 1) });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { index: i });
            }
        }
        Ok(Self { data: DMatrix::from_fn(n, d, |i, j| rows[i][j]) })
    }

    pub fn from_matrix(data: DMatrix<f64>) -> Result<Self> {
        let rows: Vec<Vec<f64>> = data.row_iter().map(|r| r.iter().copied().collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// Applies `x ↦ U x` to every observation.
    pub fn transformed(&self, u: &DMatrix<f64>) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.nrows(), line: None });
        }
        Ok(Self { data: &self.data * u.transpose() })
    }
}

/// Unbiased sample covariance (divisor n − 1).
pub fn sample_covariance(sample: &MultiSample) -> DMatrix<f64> {
    let n = sample.n();
    let mean = sample.data.row_mean();
    let mut centered = sample.data.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let mut s = centered.transpose() * &centered / (n as f64 - 1.0);
    symmetrize(&mut s);
    s
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let d = m.nrows();
    for i in 0..d {
        for j in (i + 1)..d {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralModel {
    /// Orthonormal eigenvectors as columns, ordered like `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// λ₁ − λ₂.
    pub gap: f64,
}

impl SpectralModel {
    pub fn vector(&self, j: usize) -> Direction {
        Direction::from_unit(self.eigenvectors.column(j).iter().copied().collect())
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let q = &self.eigenvectors;
        q * DMatrix::from_diagonal(&DVector::from_vec(self.eigenvalues.clone())) * q.transpose()
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
pub fn spectral_decompose(matrix: &DMatrix<f64>) -> Result<SpectralModel> {
    let d = matrix.nrows();
    if matrix.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: matrix.ncols(), line: None });
    }
    if d > MAX_DIMENSION {
        return Err(Error::DimensionTooLarge(d));
    }
    let norm = matrix.norm();
    let asymmetry = (matrix - matrix.transpose()).amax();
    if asymmetry > SYMMETRY_TOL * norm.max(1.0) {
        return Err(Error::NotSymmetric { asymmetry });
    }

    let mut a = matrix.clone();
    symmetrize(&mut a);
    let mut v = DMatrix::<f64>::identity(d, d);
    let threshold = JACOBI_TOL * norm;

    for _ in 0..MAX_SWEEPS {
        let off = (0..d)
            .flat_map(|p| ((p + 1)..d).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].abs())
            .fold(0.0, f64::max);
        if off <= threshold {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut eigenvectors = DMatrix::zeros(d, d);
    for (k, &i) in order.iter().enumerate() {
        let col: Vec<f64> = v.column(i).iter().copied().collect();
        let col = canonical_sign(col);
        eigenvectors.set_column(k, &DVector::from_vec(col));
    }
    let gap = eigenvalues[0] - eigenvalues[1];
    Ok(SpectralModel { eigenvectors, eigenvalues, gap })
}

/// A ← JᵀAJ and V ← VJ for the plane rotation J in coordinates (p, q).
fn rotate(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    let d = a.nrows();
    for k in 0..d {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..d {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..d {
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

fn canonical_sign(mut v: Vec<f64>) -> Vec<f64> {
    if let Some(first) = v.iter().find(|x| x.abs() > SIGN_EPS) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    v
}

/// A unit vector standing for the line it spans.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction {
    unit: Vec<f64>,
}

impl Direction {
    /// Normalizes `v`; fails on the zero vector.
    pub fn new(v: Vec<f64>) -> Result<Self> {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::param("direction must be a finite non-zero vector"));
        }
        Ok(Self::from_unit(v.into_iter().map(|x| x / norm).collect()))
    }

    fn from_unit(v: Vec<f64>) -> Self {
        Self { unit: canonical_sign(v) }
    }

    pub fn axis(dim: usize, k: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[k] = 1.0;
        Self { unit: v }
    }

    pub fn unit(&self) -> &[f64] {
        &self.unit
    }

    pub fn dim(&self) -> usize {
        self.unit.len()
    }

    fn as_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.unit)
    }
}

impl Serialize for Direction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.unit.serialize(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExtendedDirection {
    Dir(Direction),
    /// Every direction of ℝ^dim is a top component.
    FullSpace { dim: usize },
}

impl ExtendedDirection {
    pub fn dim(&self) -> usize {
        match self {
            ExtendedDirection::Dir(d) => d.dim(),
            ExtendedDirection::FullSpace { dim } => *dim,
        }
    }

    pub fn is_full_space(&self) -> bool {
        matches!(self, ExtendedDirection::FullSpace { .. })
    }
}

impl Serialize for ExtendedDirection {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedDirection::Dir(d) => d.serialize(s),
            ExtendedDirection::FullSpace { .. } => s.serialize_str("full_space"),
        }
    }
}

/// arccos(|θ₁·θ₂|), in [0, π/2]. Evaluated as 2·atan2(‖a − σb‖, ‖a + σb‖)
/// with σ = sign(a·b), which keeps precision for nearly parallel lines.
pub fn angle_distance(a: &Direction, b: &Direction) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim(), line: None });
    }
    let dot: f64 = a.unit.iter().zip(&b.unit).map(|(x, y)| x * y).sum();
    let sigma = if dot < 0.0 { -1.0 } else { 1.0 };
    let (mut diff, mut sum) = (0.0, 0.0);
    for (x, y) in a.unit.iter().zip(&b.unit) {
        diff += (x - sigma * y).powi(2);
        sum += (x + sigma * y).powi(2);
    }
    Ok((2.0 * diff.sqrt().atan2(sum.sqrt())).min(PI / 2.0))
}

/// Angle metric extended with the full space: D(full, full) = 0 and
/// D(full, θ) = π.
pub fn extended_distance(a: &ExtendedDirection, b: &ExtendedDirection) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim(), line: None });
    }
    match (a, b) {
        (ExtendedDirection::Dir(x), ExtendedDirection::Dir(y)) => angle_distance(x, y),
        (ExtendedDirection::FullSpace { .. }, ExtendedDirection::FullSpace { .. }) => Ok(0.0),
        _ => Ok(PI),
    }
}

/// q₁ when (λ₁ − λ₂)/λ₁ exceeds `gap_tol`, otherwise the full space.
pub fn top_pc(model: &SpectralModel, gap_tol: f64) -> ExtendedDirection {
    let l1 = model.eigenvalues[0];
    let relative = (l1 - model.eigenvalues[1]) / l1.max(f64::MIN_POSITIVE);
    if relative > gap_tol {
        ExtendedDirection::Dir(model.vector(0))
    } else {
        ExtendedDirection::FullSpace { dim: model.eigenvalues.len() }
    }
}

/// The functional that ignores its data and always answers "the full space".
pub fn constant_top_pc(sample: &MultiSample) -> ExtendedDirection {
    ExtendedDirection::FullSpace { dim: sample.dim() }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScaleStatistic {
    Mad { consistency: f64 },
    /// Classical standard deviation with divisor n − 1.
    StdDev,
}

impl Default for ScaleStatistic {
    fn default() -> Self {
        ScaleStatistic::Mad { consistency: MAD_NORMAL_CONSISTENCY }
    }
}

impl ScaleStatistic {
    pub fn evaluate(&self, values: &[f64]) -> f64 {
        match *self {
            ScaleStatistic::Mad { consistency } => {
                mad(&Sample::new(values.to_vec()).expect("projections are finite"), consistency)
            }
            ScaleStatistic::StdDev => {
                let n = values.len() as f64;
                let mean = values.iter().sum::<f64>() / n;
                (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RobustCovariance {
    /// Q·diag(λⱼ²)·Qᵀ.
    pub matrix: DMatrix<f64>,
    /// λⱼ², aligned with the columns of `source.eigenvectors`.
    pub replaced_scales: Vec<f64>,
    /// Spectral model of the sample covariance the eigenvectors come from.
    pub source: SpectralModel,
}

/// Keeps the eigenvectors of the sample covariance and replaces each
/// eigenvalue with the squared scale of the data projected on it.
pub fn robust_eigen_replace(sample: &MultiSample, scale: ScaleStatistic) -> Result<RobustCovariance> {
    let s = sample_covariance(sample);
    let source = spectral_decompose(&s)?;
    let q = &source.eigenvectors;
    let projections = sample.data() * q;

    let mut replaced = Vec::with_capacity(sample.dim());
    let mut degenerate = Vec::new();
    for j in 0..sample.dim() {
        let col: Vec<f64> = projections.column(j).iter().copied().collect();
        let lambda = scale.evaluate(&col);
        if lambda == 0.0 && matches!(scale, ScaleStatistic::Mad { .. }) {
            degenerate.push(j);
        }
        replaced.push(lambda * lambda);
    }
    if !degenerate.is_empty() {
        return Err(Error::DegenerateAxisScale { axes: degenerate });
    }
    let mut matrix = q * DMatrix::from_diagonal(&DVector::from_vec(replaced.clone())) * q.transpose();
    symmetrize(&mut matrix);
    Ok(RobustCovariance { matrix, replaced_scales: replaced, source })
}

/// sqrt(trace S): root-mean-square distance of the observations to their mean.
pub fn data_scale(sample: &MultiSample) -> f64 {
    let t = sample_covariance(sample).trace().max(0.0).sqrt();
    if t > 0.0 {
        t
    } else {
        1.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteerOutcome {
    pub perturbed: MultiSample,
    pub achieved: ExtendedDirection,
    pub angle_to_target: f64,
}

/// Replaces the first observation with `magnitude · data_scale · target` and
/// reports where the top component of the sample covariance ends up.
pub fn steer_top_pc(sample: &MultiSample, target: &Direction, magnitude: f64) -> Result<SteerOutcome> {
    if !(magnitude.is_finite() && magnitude > 0.0) {
        return Err(Error::param(format!("magnitude must be positive, got {magnitude}")));
    }
    if target.dim() != sample.dim() {
        return Err(Error::DimensionMismatch { expected: sample.dim(), found: target.dim(), line: None });
    }
    let reach = magnitude * data_scale(sample);
    let mut data = sample.data().clone();
    data.set_row(0, &(target.as_vector() * reach).transpose());
    let perturbed = MultiSample { data };
    let achieved = top_pc(&spectral_decompose(&sample_covariance(&perturbed))?, DEFAULT_GAP_TOL);
    let angle_to_target = extended_distance(&achieved, &ExtendedDirection::Dir(target.clone()))?;
    Ok(SteerOutcome { perturbed, achieved, angle_to_target })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub m: usize,
    pub magnitude: f64,
    pub fraction: f64,
    pub drift: f64,
}

/// For m = 0..=plan.count and each magnitude, contaminates with m points on
/// the line of `target` at distance `magnitude · data_scale` (spread along
/// the line by `plan.spread · data_scale`) and records the extended distance
/// between the clean and contaminated top components. `plan.site` is unused;
/// the magnitudes play its role.
pub fn pc_contamination_sweep(
    sample: &MultiSample,
    plan: &ContaminationPlan,
    target: &Direction,
    magnitudes: &[f64],
) -> Result<Vec<SweepPoint>> {
    plan.validate(sample.n())?;
    if target.dim() != sample.dim() {
        return Err(Error::DimensionMismatch { expected: sample.dim(), found: target.dim(), line: None });
    }
    let scale = data_scale(sample);
    let clean = top_pc(&spectral_decompose(&sample_covariance(sample))?, DEFAULT_GAP_TOL);
    let dir = target.as_vector();
    let n = sample.n();

    let mut out = Vec::new();
    for m in 0..=plan.count {
        for &magnitude in magnitudes {
            let offsets = cluster_points(magnitude * scale, plan.spread * scale, m);
            let bad = offsets.iter().map(|&r| (&dir * r).transpose());
            let (data, fraction) = match plan.mode {
                ContaminationMode::Add => {
                    let mut data = sample.data().clone().resize_vertically(n + m, 0.0);
                    for (k, row) in bad.enumerate() {
                        data.set_row(n + k, &row);
                    }
                    (data, m as f64 / (n + m) as f64)
                }
                ContaminationMode::Replace => {
                    let mut data = sample.data().clone();
                    for (k, row) in bad.enumerate() {
                        data.set_row(k, &row);
                    }
                    (data, m as f64 / n as f64)
                }
            };
            let dirty = MultiSample { data };
            let top = top_pc(&spectral_decompose(&sample_covariance(&dirty))?, DEFAULT_GAP_TOL);
            out.push(SweepPoint { m, magnitude, fraction, drift: extended_distance(&clean, &top)? });
        }
    }
    Ok(out)
}
