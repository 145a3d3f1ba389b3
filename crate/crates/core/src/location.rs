//! M-estimates of univariate location.
//!
//! Redescending estimates are defined as the global minimizer of
//! `Σ ρ((xᵢ − t)/c)` over the data hull; monotone (Huber) estimates as the
//! root of `Σ ψ((xᵢ − t)/c) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rho::{psi, rho, RhoFamily};
use crate::search::{self, Problem, SolverConfig};

/// Normal-consistency factor for the MAD.
pub const MAD_NORMAL_CONSISTENCY: f64 = 1.4826;

/// A non-empty univariate sample of finite values.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Sample(Vec<f64>);

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn range(&self) -> f64 {
        self.max() - self.min()
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    pub fn median(&self) -> f64 {
        median(self.0.clone())
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.0.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = Error;
    fn try_from(values: Vec<f64>) -> Result<Self> {
        Sample::new(values)
    }
}

/// Midpoint of the two central order statistics for even lengths.
pub(crate) fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ScaleMode {
    Fixed { c: f64 },
    /// Window `c · consistency · MAD`.
    MadScaled { c: f64, consistency: f64 },
}

impl ScaleMode {
    pub fn fixed(c: f64) -> Self {
        ScaleMode::Fixed { c }
    }

    pub fn mad(c: f64) -> Self {
        ScaleMode::MadScaled { c, consistency: MAD_NORMAL_CONSISTENCY }
    }

    /// Parses `fixed:<c>` or `mad:<c>`.
    pub fn parse(text: &str, consistency: f64) -> Result<Self> {
        let (kind, value) = text
            .split_once(':')
            .ok_or_else(|| Error::param(format!("scale '{text}' is not of the form fixed:<c> or mad:<c>")))?;
        let c: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::param(format!("bad scale constant '{value}'")))?;
        let mode = match kind.trim() {
            "fixed" => ScaleMode::Fixed { c },
            "mad" => ScaleMode::MadScaled { c, consistency },
            other => return Err(Error::param(format!("unknown scale mode '{other}'"))),
        };
        mode.validate()?;
        Ok(mode)
    }

    pub fn validate(&self) -> Result<()> {
        let (c, k) = match *self {
            ScaleMode::Fixed { c } => (c, 1.0),
            ScaleMode::MadScaled { c, consistency } => (c, consistency),
        };
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::param(format!("tuning constant must be positive, got {c}")));
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::param(format!("consistency must be positive, got {k}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocationFit {
    pub estimate: f64,
    pub objective_at_estimate: f64,
    /// `(t, objective)` pairs sorted by `t`.
    pub local_minima: Vec<(f64, f64)>,
    pub effective_scale: f64,
    pub solver_evals: usize,
}

/// Σ ρ((xᵢ − t)/c), summed in sample order.
pub fn objective(sample: &Sample, family: RhoFamily, c: f64, t: f64) -> f64 {
    sample.values().iter().map(|&x| rho(family, (x - t) / c)).sum()
}

/// d/dt of [`objective`] up to the positive factor 1/c.
pub(crate) fn objective_slope(values: &[f64], family: RhoFamily, c: f64, t: f64) -> f64 {
    -values.iter().map(|&x| psi(family, (x - t) / c)).sum::<f64>()
}

/// `consistency · median(|xᵢ − median(x)|)`.
pub fn mad(sample: &Sample, consistency: f64) -> f64 {
    let m = sample.median();
    consistency * median(sample.values().iter().map(|x| (x - m).abs()).collect())
}

pub fn resolve_scale(sample: &Sample, scale: ScaleMode) -> Result<f64> {
    scale.validate()?;
    match scale {
        ScaleMode::Fixed { c } => Ok(c),
        ScaleMode::MadScaled { c, consistency } => {
            let s = mad(sample, consistency);
            if s > 0.0 {
                Ok(c * s)
            } else {
                Err(Error::DegenerateScale)
            }
        }
    }
}

/// Absolute tolerance under which two objective values count as tied.
pub(crate) fn objective_tie_tolerance(n: usize) -> f64 {
    1e-12 * n as f64
}

pub(crate) fn scan(sample: &Sample, family: RhoFamily, c: f64, config: &SolverConfig) -> Result<search::Scan> {
    family.require_bounded()?;
    config.validate()?;
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::param(format!("tuning constant must be positive, got {c}")));
    }
    let sorted = sample.sorted();
    let values = sample.values();
    let problem = Problem {
        f: |t| objective(sample, family, c, t),
        slope: |t| objective_slope(values, family, c, t),
        sorted: &sorted,
        scale: c,
        breaks: search::residual_breaks(&sorted, &family.non_smooth_points(), c),
        slack: 4.0 * f64::EPSILON * sample.len() as f64,
    };
    Ok(search::scan(&problem, config))
}

/// All local minimizers of the objective in the data hull, sorted by `t`.
pub fn scan_local_minima(
    sample: &Sample,
    family: RhoFamily,
    c: f64,
    config: &SolverConfig,
) -> Result<Vec<(f64, f64)>> {
    Ok(scan(sample, family, c, config)?.minima)
}

/// Global minimizer of the ρ-objective; exact ties go to the smallest `t`.
pub fn solve_redescending(
    sample: &Sample,
    family: RhoFamily,
    scale: ScaleMode,
    config: &SolverConfig,
) -> Result<LocationFit> {
    family.require_bounded()?;
    let c = resolve_scale(sample, scale)?;
    let scan = scan(sample, family, c, config)?;
    let (estimate, value) = search::best(&scan.minima, objective_tie_tolerance(sample.len()));
    debug_assert!(value <= scan.grid_min);
    Ok(LocationFit {
        estimate,
        objective_at_estimate: value,
        local_minima: scan.minima,
        effective_scale: c,
        solver_evals: scan.evals,
    })
}

/// Root of Σ ψ((xᵢ − t)/c) for a Huber score. A flat zero set resolves to
/// its midpoint.
pub fn solve_monotone(sample: &Sample, family: RhoFamily, c: f64) -> Result<f64> {
    if family.is_bounded() {
        return Err(Error::param("solve_monotone requires the huber family"));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::param(format!("tuning constant must be positive, got {c}")));
    }
    let (lo, hi) = (sample.min(), sample.max());
    if lo == hi {
        return Ok(lo);
    }
    // Positive and negative parts are summed apart so that equal clipped
    // scores on both sides cancel exactly and a flat zero set stays flat.
    let g = |t: f64| {
        let (mut pos, mut neg) = (0.0, 0.0);
        for &x in sample.values() {
            let v = psi(family, (x - t) / c);
            if v > 0.0 {
                pos += v;
            } else {
                neg -= v;
            }
        }
        pos - neg
    };
    // g is nonincreasing: left end of the zero set is sup{g > 0}, right end inf{g < 0}.
    let left = bisect(lo, hi, |t| g(t) > 0.0);
    let right = bisect(lo, hi, |t| g(t) >= 0.0);
    Ok(0.5 * (left + right))
}

/// Boundary of a predicate that holds on a prefix of `[lo, hi]`, refined to
/// floating-point resolution.
fn bisect(mut lo: f64, mut hi: f64, holds: impl Fn(f64) -> bool) -> f64 {
    if !holds(lo) {
        return lo;
    }
    if holds(hi) {
        return hi;
    }
    for _ in 0..2200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
