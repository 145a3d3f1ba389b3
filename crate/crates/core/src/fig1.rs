//! Reproduction data for the kernel-density / M-objective illustration:
//! an 80/20 normal mixture smoothed at several window widths.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::data::{generate_mixture, MixtureSpec};
use crate::error::{Error, Result};
use crate::kde::{density, find_modes, uniform_grid};
use crate::location::{objective, solve_redescending, Sample, ScaleMode};
use crate::report::{sci, to_json};
use crate::rho::RhoFamily;
use crate::search::SolverConfig;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_N: usize = 200;
pub const DEFAULT_C_VALUES: [f64; 3] = [0.15, 1.0, 10.0];
pub const GRID_LO: f64 = -4.0;
pub const GRID_HI: f64 = 7.0;
pub const GRID_POINTS: usize = 1101;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Regime {
    pub c: f64,
    pub principal_mode: f64,
    pub principal_density: f64,
    pub m_estimate: f64,
    pub objective_at_estimate: f64,
    pub mode_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub seed: u64,
    pub n: usize,
    pub family: RhoFamily,
    pub sample_mean: f64,
    pub regimes: Vec<Regime>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub c: f64,
    /// `(x, kde_density, m_objective)`.
    pub rows: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fig1 {
    pub sample: Sample,
    pub curves: Vec<Curve>,
    pub summary: Summary,
}

pub fn compute(seed: u64, c_values: &[f64]) -> Result<Fig1> {
    if c_values.is_empty() {
        return Err(Error::param("at least one window width is required"));
    }
    let family = RhoFamily::Welsch;
    let sample = generate_mixture(&MixtureSpec::eighty_twenty(DEFAULT_N, seed))?;
    let config = SolverConfig::default();
    let grid = uniform_grid(GRID_LO, GRID_HI, GRID_POINTS);

    let mut curves = Vec::with_capacity(c_values.len());
    let mut regimes = Vec::with_capacity(c_values.len());
    for &c in c_values {
        let rows = grid
            .iter()
            .map(|&x| Ok((x, density(&sample, family, c, x)?, objective(&sample, family, c, x))))
            .collect::<Result<Vec<_>>>()?;
        let modes = find_modes(&sample, family, c, &config)?;
        let fit = solve_redescending(&sample, family, ScaleMode::fixed(c), &config)?;
        regimes.push(Regime {
            c,
            principal_mode: modes.principal.0,
            principal_density: modes.principal.1,
            m_estimate: fit.estimate,
            objective_at_estimate: fit.objective_at_estimate,
            mode_count: modes.modes.len(),
        });
        curves.push(Curve { c, rows });
    }
    let summary = Summary { seed, n: sample.len(), family, sample_mean: sample.mean(), regimes };
    Ok(Fig1 { sample, curves, summary })
}

pub fn curve_csv(curve: &Curve) -> String {
    let mut out = String::from("x,kde_density,m_objective\n");
    for &(x, d, m) in &curve.rows {
        let _ = writeln!(out, "{},{},{}", sci(x), sci(d), sci(m));
    }
    out
}

pub fn curve_file_name(c: f64) -> String {
    format!("fig1_c{c}.csv")
}

/// Writes one CSV per window width plus `fig1_summary.json`.
pub fn write(fig: &Fig1, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for curve in &fig.curves {
        let path = dir.join(curve_file_name(curve.c));
        std::fs::write(&path, curve_csv(curve))?;
        written.push(path);
    }
    let path = dir.join("fig1_summary.json");
    std::fs::write(&path, to_json(&fig.summary) + "\n")?;
    written.push(path);
    Ok(written)
}
