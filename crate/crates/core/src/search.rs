//! Grid-bracket-refine minimization of a univariate function over the hull
//! of a sample.
//!
//! The function is evaluated on uniform grids covering windows of radius
//! `WINDOW_RADIUS · scale` around each data point (clipped to the hull and
//! merged when they overlap), plus any points where the function is not
//! smooth. Every grid run that sits strictly below its neighbours becomes a
//! bracket, as does any interval between nodes across which the derivative
//! turns from negative to positive. Brackets are refined by golden-section
//! search and then polished by bisection on the sign of the derivative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Window half-width in units of the scale. Local minima of a bounded-ρ
/// objective need at least one residual with |r| ≤ 1, so 4 leaves a margin.
pub const WINDOW_RADIUS: f64 = 4.0;

/// Minimum number of grid points across the whole hull.
pub const MIN_HULL_POINTS: usize = 64;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid_points_per_window: usize,
    /// Absolute golden-section tolerance; `None` means 1e-10 · data range.
    pub refine_tolerance: Option<f64>,
    pub max_refine_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grid_points_per_window: 8,
            refine_tolerance: None,
            max_refine_iters: 200,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points_per_window < 2 {
            return Err(Error::param("grid_points_per_window must be at least 2"));
        }
        if let Some(tol) = self.refine_tolerance {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(Error::param("refine_tolerance must be positive"));
            }
        }
        Ok(())
    }

    pub(crate) fn tolerance_for(&self, range: f64) -> f64 {
        self.refine_tolerance
            .unwrap_or(1e-10 * range)
            .max(f64::MIN_POSITIVE)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Scan {
    /// Local minima `(t, value)` sorted by `t`.
    pub minima: Vec<(f64, f64)>,
    /// Smallest value seen on the grid.
    pub grid_min: f64,
    pub evals: usize,
}

pub(crate) struct Problem<'a, F, D> {
    pub f: F,
    /// Derivative of `f` (any positive multiple works; only its sign is used).
    pub slope: D,
    /// Sorted sample; its hull is the search domain.
    pub sorted: &'a [f64],
    pub scale: f64,
    /// Sorted points where `f` is not smooth; they become grid nodes.
    pub breaks: Vec<f64>,
    /// Rounding slack when comparing a polished point against the golden one.
    pub slack: f64,
}

/// Locations xᵢ − k·c for every non-smooth residual k of the family, sorted.
pub(crate) fn residual_breaks(sorted: &[f64], kinks: &[f64], scale: f64) -> Vec<f64> {
    let mut out: Vec<f64> = sorted.iter().flat_map(|&x| kinks.iter().map(move |&k| x - k * scale)).collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

pub(crate) fn scan<F, D>(p: &Problem<'_, F, D>, cfg: &SolverConfig) -> Scan
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let lo = p.sorted[0];
    let hi = p.sorted[p.sorted.len() - 1];
    let mut evals = 0usize;
    let mut eval = |t: f64| {
        evals += 1;
        (p.f)(t)
    };

    if lo == hi {
        let v = eval(lo);
        return Scan { minima: vec![(lo, v)], grid_min: v, evals };
    }

    let range = hi - lo;
    let step = (p.scale / cfg.grid_points_per_window as f64).min(range / (MIN_HULL_POINTS - 1) as f64);
    let tol = cfg.tolerance_for(range);

    let mut minima = Vec::new();
    let mut grid_min = f64::INFINITY;
    for (a, b) in windows(p.sorted, WINDOW_RADIUS * p.scale, step) {
        let intervals = (((b - a) / step).ceil() as usize).max(1);
        let mut nodes: Vec<f64> = (0..=intervals)
            .map(|i| if i == intervals { b } else { a + (b - a) * (i as f64 / intervals as f64) })
            .collect();
        let first = p.breaks.partition_point(|&k| k <= a);
        nodes.extend(p.breaks[first..].iter().copied().take_while(|&k| k < b));
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        let last = nodes.len() - 1;
        let values: Vec<f64> = nodes.iter().map(|&t| eval(t)).collect();
        grid_min = values.iter().copied().fold(grid_min, f64::min);

        let left_open = a == lo;
        let right_open = b == hi;
        let mut s = 0;
        while s < values.len() {
            let mut e = s;
            while e + 1 < values.len() && values[e + 1] == values[s] {
                e += 1;
            }
            let left_ok = if s == 0 { left_open } else { values[s - 1] > values[s] };
            let right_ok = if e == last { right_open } else { values[e + 1] > values[e] };
            if left_ok && right_ok {
                let ba = nodes[s.saturating_sub(1)];
                let bb = nodes[(e + 1).min(last)];
                let node = (nodes[s], values[s]);
                minima.push(refine(p, &mut eval, ba, bb, node, tol, cfg.max_refine_iters));
            }
            s = e + 1;
        }

        // Between adjacent nodes f is smooth; a slope sign change just inside
        // an interval marks a minimum the node values can hide next to a kink.
        if !p.breaks.is_empty() {
            for i in 0..last {
                let (x0, x1) = (nodes[i], nodes[i + 1]);
                let inset = 1e-6 * (x1 - x0);
                if (p.slope)(x0 + inset) < 0.0 && (p.slope)(x1 - inset) > 0.0 {
                    let node = if values[i] <= values[i + 1] { (x0, values[i]) } else { (x1, values[i + 1]) };
                    minima.push(refine(p, &mut eval, x0, x1, node, tol, cfg.max_refine_iters));
                }
            }
        }
    }
    minima.sort_by(|x, y| x.0.total_cmp(&y.0));
    // The two detectors can report the same minimum.
    minima.dedup_by(|later, earlier| {
        if (later.0 - earlier.0).abs() <= tol {
            if later.1 < earlier.1 {
                *earlier = *later;
            }
            true
        } else {
            false
        }
    });
    minima.sort_by(|x, y| x.0.total_cmp(&y.0));
    Scan { minima, grid_min, evals }
}

/// Picks the global minimum; values within `tie_tol` of each other are ties
/// and resolve to the smallest `t`.
pub(crate) fn best(minima: &[(f64, f64)], tie_tol: f64) -> (f64, f64) {
    let lowest = minima.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    *minima
        .iter()
        .find(|m| m.1 <= lowest + tie_tol)
        .expect("scan always yields at least one minimum")
}

fn windows(sorted: &[f64], radius: f64, step: f64) -> Vec<(f64, f64)> {
    let lo = sorted[0];
    let hi = sorted[sorted.len() - 1];
    let mut out: Vec<(f64, f64)> = Vec::new();
    for &x in sorted {
        let a = (x - radius).max(lo);
        let b = (x + radius).min(hi);
        match out.last_mut() {
            Some(last) if a <= last.1 + step => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

fn refine<F, D>(
    p: &Problem<'_, F, D>,
    eval: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    node: (f64, f64),
    tol: f64,
    max_iters: usize,
) -> (f64, f64)
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (ga, gb, golden) = golden_section(eval, a, b, tol, max_iters);

    let mut pick = if golden.1 < node.1 { golden } else { node };
    if pick == node && (p.slope)(node.0) == 0.0 {
        return node;
    }
    // Golden section only locates a smooth minimum to about sqrt(eps); the
    // derivative root is sharper. When noise pushed the golden bracket off
    // the root, a window around the golden point is widened until the slope
    // signs bracket it, staying inside the grid bracket.
    let proper = |x: f64, y: f64| (p.slope)(x) <= 0.0 && (p.slope)(y) >= 0.0;
    let mut polish_on = None;
    let mut half = (gb - ga).max(f64::EPSILON * golden.0.abs().max(p.scale));
    for _ in 0..200 {
        let (lo, hi) = ((golden.0 - half).max(a), (golden.0 + half).min(b));
        if proper(lo, hi) {
            polish_on = Some((lo, hi));
            break;
        }
        if lo == a && hi == b {
            break;
        }
        half *= 2.0;
    }
    if let Some((pa, pb)) = polish_on {
        let t = slope_bisect(&p.slope, pa, pb);
        let v = eval(t);
        if v <= golden.1 + p.slack && v <= node.1 {
            pick = (t, v);
        }
    }
    pick
}

/// Returns the final bracket and the best point found.
fn golden_section(
    eval: &mut impl FnMut(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
    max_iters: usize,
) -> (f64, f64, (f64, f64)) {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    let mut iters = 0;
    while b - a > tol && iters < max_iters {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2);
        }
        iters += 1;
    }
    let best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    (a, b, best)
}

/// Bisection on the sign of the derivative, run until the bracket stops
/// shrinking in floating point.
fn slope_bisect(slope: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..256 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if slope(mid) <= 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}
