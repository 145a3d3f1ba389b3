//! Deterministic data generation and plain-text CSV ingestion.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::location::Sample;
use crate::pca::MultiSample;

/// 64-bit linear congruential generator with Knuth's MMIX constants:
/// `state ← state · 6364136223846793005 + 1442695040888963407 (mod 2⁶⁴)`.
/// Uniforms use the top 53 bits of the new state, offset by half a step so
/// they lie strictly inside (0, 1).
#[derive(Clone, Debug)]
pub struct Mmix64 {
    state: u64,
}

impl Mmix64 {
    pub const MULTIPLIER: u64 = 6_364_136_223_846_793_005;
    pub const INCREMENT: u64 = 1_442_695_040_888_963_407;

    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(Self::MULTIPLIER).wrapping_add(Self::INCREMENT);
        self.state
    }

    pub fn next_uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }
}

/// Box–Muller normals; both variates of each pair are used, cosine first.
#[derive(Clone, Debug)]
pub struct NormalStream {
    rng: Mmix64,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        Self { rng: Mmix64::new(seed), spare: None }
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.rng.next_uniform();
        let u2 = self.rng.next_uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * PI * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub components: Vec<MixtureComponent>,
    pub n: usize,
    pub seed: u64,
}

impl MixtureSpec {
    /// 80% N(0, 1) and 20% N(5, 0.1²).
    pub fn eighty_twenty(n: usize, seed: u64) -> Self {
        Self {
            components: vec![
                MixtureComponent { weight: 0.8, mean: 0.0, sd: 1.0 },
                MixtureComponent { weight: 0.2, mean: 5.0, sd: 0.1 },
            ],
            n,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidSpec("mixture needs n >= 1".into()));
        }
        if self.components.is_empty() {
            return Err(Error::InvalidSpec("mixture needs at least one component".into()));
        }
        for c in &self.components {
            if !(c.weight > 0.0 && c.weight <= 1.0) {
                return Err(Error::InvalidSpec(format!("component weight {} outside (0, 1]", c.weight)));
            }
            if !(c.mean.is_finite() && c.sd.is_finite() && c.sd >= 0.0) {
                return Err(Error::InvalidSpec("component mean must be finite and sd non-negative".into()));
            }
        }
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec(format!("weights sum to {total}, not 1")));
        }
        Ok(())
    }

    /// Exact component sizes: round(weight · n), the last one taking the rest.
    pub fn counts(&self) -> Result<Vec<usize>> {
        let mut counts = Vec::with_capacity(self.components.len());
        let mut used = 0usize;
        for c in &self.components[..self.components.len() - 1] {
            let k = (c.weight * self.n as f64).round() as usize;
            counts.push(k);
            used += k;
        }
        if used > self.n {
            return Err(Error::InvalidSpec("rounded component counts exceed n".into()));
        }
        counts.push(self.n - used);
        Ok(counts)
    }
}

/// Components are emitted in order, each drawing from one shared normal
/// stream seeded with `spec.seed`.
pub fn generate_mixture(spec: &MixtureSpec) -> Result<Sample> {
    spec.validate()?;
    let counts = spec.counts()?;
    let mut normals = NormalStream::new(spec.seed);
    let mut values = Vec::with_capacity(spec.n);
    for (component, &count) in spec.components.iter().zip(&counts) {
        for _ in 0..count {
            values.push(component.mean + component.sd * normals.next_normal());
        }
    }
    Sample::new(values)
}

/// Draws `n` rows of independent normals with the given per-axis standard
/// deviations, then rotates them by `angle` in the (0, 1) plane.
pub fn generate_cloud(sds: &[f64], angle: f64, n: usize, seed: u64) -> Result<MultiSample> {
    let mut normals = NormalStream::new(seed);
    let (c, s) = (angle.cos(), angle.sin());
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut row: Vec<f64> = sds.iter().map(|sd| sd * normals.next_normal()).collect();
            if row.len() >= 2 {
                let (x, y) = (row[0], row[1]);
                row[0] = c * x - s * y;
                row[1] = s * x + c * y;
            }
            row
        })
        .collect();
    MultiSample::from_rows(&rows)
}

/// Parsed CSV rows: one observation per non-blank, non-`#` line.
pub fn parse_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|field| {
                let field = field.trim();
                field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: format!("'{field}' is not a finite number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::DimensionMismatch { expected: w, found: row.len(), line: Some(line_no) })
            }
            _ => {}
        }
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Dataset {
    Univariate(Sample),
    Multivariate(MultiSample),
}

pub fn parse_dataset(text: &str) -> Result<Dataset> {
    let rows = parse_rows(text)?;
    match rows.first().map(Vec::len) {
        None => Err(Error::EmptySample),
        Some(1) => Ok(Dataset::Univariate(Sample::new(rows.into_iter().map(|r| r[0]).collect())?)),
        Some(_) => Ok(Dataset::Multivariate(MultiSample::from_rows(&rows)?)),
    }
}

pub fn read_csv(path: &Path) -> Result<Dataset> {
    parse_dataset(&std::fs::read_to_string(path)?)
}

pub fn read_univariate(path: &Path) -> Result<Sample> {
    match read_csv(path)? {
        Dataset::Univariate(s) => Ok(s),
        Dataset::Multivariate(m) => Err(Error::DimensionMismatch { expected: 1, found: m.dim(), line: None }),
    }
}

pub fn read_multivariate(path: &Path) -> Result<MultiSample> {
    match read_csv(path)? {
        Dataset::Multivariate(m) => Ok(m),
        Dataset::Univariate(_) => Err(Error::DimensionMismatch { expected: 2, found: 1, line: None }),
    }
}
