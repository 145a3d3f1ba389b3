//! Finite-sample contamination breakdown of redescending M-estimates.
//!
//! With A(Xⁿ; c) the smallest attainable objective on the clean data, the
//! breakdown point is ε* = (1 − A/n)/(2 − A/n). Under addition of a far
//! point-mass cluster of m points the estimate moves to the cluster exactly
//! when m > n − A, which is what [`empirical_breakdown`] measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::location::{self, resolve_scale, Sample, ScaleMode};
use crate::rho::RhoFamily;
use crate::search::SolverConfig;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BreakdownReport {
    pub n: usize,
    pub c_eff: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub epsilon_star: f64,
    pub family: RhoFamily,
}

impl BreakdownReport {
    /// Smallest number of added point-mass outliers that beats the best clean
    /// basin: the least integer strictly greater than n − A.
    pub fn predicted_first_breaking_count(&self) -> usize {
        (self.n as f64 - self.a).floor() as usize + 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContaminationMode {
    Add,
    /// Overwrites the first `count` observations in sample order.
    Replace,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContaminationPlan {
    pub mode: ContaminationMode,
    pub count: usize,
    /// Offset of the cluster center from the median of the clean sample.
    pub site: f64,
    /// Standard deviation of the cluster; 0 is a point mass.
    pub spread: f64,
}

impl ContaminationPlan {
    pub fn add_point_mass(count: usize, site: f64) -> Self {
        Self { mode: ContaminationMode::Add, count, site, spread: 0.0 }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.mode == ContaminationMode::Replace && self.count > n {
            return Err(Error::param(format!("cannot replace {} of {} observations", self.count, n)));
        }
        if !self.site.is_finite() {
            return Err(Error::param("contamination site must be finite"));
        }
        if !(self.spread.is_finite() && self.spread >= 0.0) {
            return Err(Error::param("contamination spread must be non-negative"));
        }
        Ok(())
    }
}

/// `count` evenly spaced points centred on `center` whose population
/// standard deviation is (asymptotically) `spread`: a uniform lattice on
/// `center ± √3·spread`.
pub fn cluster_points(center: f64, spread: f64, count: usize) -> Vec<f64> {
    let half = 3f64.sqrt() * spread;
    (0..count)
        .map(|i| {
            if spread == 0.0 {
                center
            } else {
                center + half * (2.0 * (i as f64 + 0.5) / count as f64 - 1.0)
            }
        })
        .collect()
}

/// Applies a contamination plan to a sample.
pub fn contaminate(sample: &Sample, plan: &ContaminationPlan) -> Result<Sample> {
    plan.validate(sample.len())?;
    let center = sample.median() + plan.site;
    let bad = cluster_points(center, plan.spread, plan.count);
    let mut values = sample.values().to_vec();
    match plan.mode {
        ContaminationMode::Add => values.extend(bad),
        ContaminationMode::Replace => values[..plan.count].copy_from_slice(&bad),
    }
    Sample::new(values)
}

/// A(Xⁿ; c) = min_t Σ ρ((xᵢ − t)/c).
pub fn min_objective_a(sample: &Sample, family: RhoFamily, c: f64) -> Result<f64> {
    let fit = location::solve_redescending(sample, family, ScaleMode::fixed(c), &SolverConfig::default())?;
    Ok(fit.objective_at_estimate)
}

/// ε* = (1 − A/n)/(2 − A/n), evaluated as (n − A)/(2n − A) so that integer
/// A gives the exact fraction.
pub fn epsilon_star(sample: &Sample, family: RhoFamily, c: f64) -> Result<BreakdownReport> {
    let a = min_objective_a(sample, family, c)?;
    let n = sample.len() as f64;
    Ok(BreakdownReport {
        n: sample.len(),
        c_eff: c,
        a,
        epsilon_star: (n - a) / (2.0 * n - a),
        family,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StressOutcome {
    pub estimate: f64,
    pub broke: bool,
}

/// Contaminates, refits with the scale resolved on the clean sample, and
/// flags breakdown when the estimate is more than `site/2` from the clean
/// median. Huber families are fitted with the monotone solver.
pub fn stress_trial(
    sample: &Sample,
    plan: &ContaminationPlan,
    family: RhoFamily,
    scale: ScaleMode,
) -> Result<StressOutcome> {
    let c = resolve_scale(sample, scale)?;
    let dirty = contaminate(sample, plan)?;
    let estimate = fit_fixed(&dirty, family, c)?;
    let broke = plan.count > 0 && (estimate - sample.median()).abs() > plan.site.abs() / 2.0;
    Ok(StressOutcome { estimate, broke })
}

fn fit_fixed(sample: &Sample, family: RhoFamily, c: f64) -> Result<f64> {
    if family.is_bounded() {
        Ok(location::solve_redescending(sample, family, ScaleMode::fixed(c), &SolverConfig::default())?.estimate)
    } else {
        location::solve_monotone(sample, family, c)
    }
}

/// Site offsets {10³, 10⁴, 10⁵, 10⁶} times the data range (or times the
/// effective scale for a point mass).
pub fn default_site_magnitudes(sample: &Sample, c_eff: f64) -> Vec<f64> {
    let unit = if sample.range() > 0.0 { sample.range() } else { c_eff };
    [1e3, 1e4, 1e5, 1e6].iter().map(|k| k * unit).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StressRecord {
    pub m: usize,
    pub site: f64,
    pub estimate: f64,
    pub broke: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalBreakdown {
    pub first_breaking_m: Option<usize>,
    /// m*/(n + m*), or 1 when nothing up to `max_m` broke the estimate.
    pub fraction: f64,
    pub trials: Vec<StressRecord>,
}

fn check_magnitudes(sample: &Sample, magnitudes: &[f64], need_two: bool) -> Result<()> {
    if magnitudes.len() < if need_two { 2 } else { 1 } {
        return Err(Error::param("not enough site magnitudes"));
    }
    if magnitudes.iter().any(|m| !(m.is_finite() && *m > 0.0)) || magnitudes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("site magnitudes must be positive and strictly increasing"));
    }
    let largest = magnitudes[magnitudes.len() - 1];
    if largest < 1e6 * sample.range() {
        return Err(Error::param("largest site magnitude must be at least 1e6 times the data range"));
    }
    Ok(())
}

/// Smallest added point-mass fraction m/(n+m) that carries a redescending
/// estimate to the contamination. A count breaks the estimate when the
/// break flag of [`stress_trial`] is set at both of the two largest site
/// magnitudes (or the only one, if a single magnitude is given).
pub fn empirical_breakdown(
    sample: &Sample,
    family: RhoFamily,
    scale: ScaleMode,
    max_m: usize,
    site_magnitudes: &[f64],
) -> Result<EmpiricalBreakdown> {
    family.require_bounded()?;
    check_magnitudes(sample, site_magnitudes, false)?;
    let c = resolve_scale(sample, scale)?;
    let deciding = site_magnitudes.len().saturating_sub(2);

    let mut trials = Vec::new();
    for m in 1..=max_m {
        let mut broke_all = true;
        for (k, &site) in site_magnitudes.iter().enumerate() {
            let out = stress_trial(sample, &ContaminationPlan::add_point_mass(m, site), family, ScaleMode::fixed(c))?;
            if k >= deciding {
                broke_all &= out.broke;
            }
            trials.push(StressRecord { m, site, estimate: out.estimate, broke: out.broke });
        }
        if broke_all {
            return Ok(EmpiricalBreakdown {
                first_breaking_m: Some(m),
                fraction: m as f64 / (sample.len() + m) as f64,
                trials,
            });
        }
    }
    Ok(EmpiricalBreakdown { first_breaking_m: None, fraction: 1.0, trials })
}

/// Addition stress for the monotone (Huber) estimate.
///
/// A monotone estimate at m = n sits exactly halfway to the cluster, so the
/// `site/2` threshold is ambiguous there. Breakdown is instead read as the
/// estimate following the contamination: with S₁ < S₂ the two largest site
/// magnitudes, m breaks the estimate when T(S₂) − T(S₁) > (S₂ − S₁)/4.
pub fn monotone_breakdown(
    sample: &Sample,
    huber_clip: f64,
    c: f64,
    max_m: usize,
    site_magnitudes: &[f64],
) -> Result<EmpiricalBreakdown> {
    let family = RhoFamily::huber(huber_clip)?;
    check_magnitudes(sample, site_magnitudes, true)?;
    let s1 = site_magnitudes[site_magnitudes.len() - 2];
    let s2 = site_magnitudes[site_magnitudes.len() - 1];

    let mut trials = Vec::new();
    for m in 1..=max_m {
        let t1 = stress_trial(sample, &ContaminationPlan::add_point_mass(m, s1), family, ScaleMode::fixed(c))?;
        let t2 = stress_trial(sample, &ContaminationPlan::add_point_mass(m, s2), family, ScaleMode::fixed(c))?;
        let follows = t2.estimate - t1.estimate > (s2 - s1) / 4.0;
        trials.push(StressRecord { m, site: s1, estimate: t1.estimate, broke: follows });
        trials.push(StressRecord { m, site: s2, estimate: t2.estimate, broke: follows });
        if follows {
            return Ok(EmpiricalBreakdown {
                first_breaking_m: Some(m),
                fraction: m as f64 / (sample.len() + m) as f64,
                trials,
            });
        }
    }
    Ok(EmpiricalBreakdown { first_breaking_m: None, fraction: 1.0, trials })
}
