//! Kernel density estimates with κ ∝ 1 − ρ, their modes, and the check that
//! the principal mode coincides with the redescending M-estimate.
//!
//! For a bounded family, f̂(x) = N/(n·c) · (n − Σρ((xᵢ − x)/c)) where N is
//! the kernel normalizer, so maximizing f̂ and minimizing the M-objective
//! are the same problem.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::location::{self, objective_slope, Sample, ScaleMode};
use crate::rho::{kernel, kernel_normalizer, RhoFamily};
use crate::search::{self, Problem, SolverConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KdeCurve {
    pub grid: Vec<f64>,
    pub densities: Vec<f64>,
    pub window: f64,
    pub family: RhoFamily,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeSet {
    /// `(location, density)` sorted by density, highest first.
    pub modes: Vec<(f64, f64)>,
    pub principal: (f64, f64),
}

fn check_window(c: f64) -> Result<()> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!("window width must be positive, got {c}")))
    }
}

/// f̂(x) = (1/(n·c)) Σ κ((x − xᵢ)/c).
pub fn density(sample: &Sample, family: RhoFamily, c: f64, x: f64) -> Result<f64> {
    check_window(c)?;
    kernel_normalizer(family)?;
    Ok(density_unchecked(sample, family, c, x))
}

fn density_unchecked(sample: &Sample, family: RhoFamily, c: f64, x: f64) -> f64 {
    let sum: f64 = sample
        .values()
        .iter()
        .map(|&xi| kernel(family, (x - xi) / c).unwrap_or(0.0))
        .sum();
    sum / (sample.len() as f64 * c)
}

/// Evaluates the density on `points` equally spaced nodes from `lo` to `hi`.
pub fn density_grid(
    sample: &Sample,
    family: RhoFamily,
    c: f64,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<KdeCurve> {
    check_window(c)?;
    kernel_normalizer(family)?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || points < 2 {
        return Err(Error::param("density grid needs lo < hi and at least 2 points"));
    }
    let grid = uniform_grid(lo, hi, points);
    let densities = grid.iter().map(|&x| density_unchecked(sample, family, c, x)).collect();
    Ok(KdeCurve { grid, densities, window: c, family })
}

pub(crate) fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let last = points - 1;
    (0..points)
        .map(|i| if i == last { hi } else { lo + (hi - lo) * (i as f64 / last as f64) })
        .collect()
}

/// Local maxima of f̂ on the data hull, found with the same grid and
/// refinement as the M-objective scan. Ties resolve to the smaller location.
pub fn find_modes(sample: &Sample, family: RhoFamily, c: f64, config: &SolverConfig) -> Result<ModeSet> {
    check_window(c)?;
    let norm = kernel_normalizer(family)?;
    config.validate()?;
    let sorted = sample.sorted();
    let values = sample.values();
    let problem = Problem {
        f: |x| -density_unchecked(sample, family, c, x),
        // −f̂′ is a positive multiple of the objective slope.
        slope: |x| objective_slope(values, family, c, x),
        sorted: &sorted,
        scale: c,
        breaks: search::residual_breaks(&sorted, &family.non_smooth_points(), c),
        slack: 4.0 * f64::EPSILON * norm / c,
    };
    let scan = search::scan(&problem, config);
    let tie = location::objective_tie_tolerance(sample.len()) * norm / (sample.len() as f64 * c);

    let mut modes: Vec<(f64, f64)> = scan.minima.iter().map(|&(x, v)| (x, -v)).collect();
    let top = modes.iter().map(|m| m.1).fold(f64::NEG_INFINITY, f64::max);
    // Highest first; near-ties with the top keep location order.
    modes.sort_by(|a, b| {
        let a_top = a.1 >= top - tie;
        let b_top = b.1 >= top - tie;
        b_top
            .cmp(&a_top)
            .then_with(|| if a_top && b_top { a.0.total_cmp(&b.0) } else { b.1.total_cmp(&a.1) })
    });
    let principal = modes[0];
    Ok(ModeSet { modes, principal })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DualityCheck {
    pub mode: f64,
    pub m_estimate: f64,
    pub gap: f64,
}

pub fn duality_check(sample: &Sample, family: RhoFamily, c: f64) -> Result<DualityCheck> {
    let config = SolverConfig::default();
    let modes = find_modes(sample, family, c, &config)?;
    let fit = location::solve_redescending(sample, family, ScaleMode::fixed(c), &config)?;
    let mode = modes.principal.0;
    Ok(DualityCheck { mode, m_estimate: fit.estimate, gap: (mode - fit.estimate).abs() })
}

/// N/(n·c) · (n − objective(x)): the density rebuilt from the M-objective.
pub fn density_from_objective(sample: &Sample, family: RhoFamily, c: f64, x: f64) -> Result<f64> {
    let norm = kernel_normalizer(family)?;
    let n = sample.len() as f64;
    Ok(norm / (n * c) * (n - location::objective(sample, family, c, x)))
}
