//! ρ-function families, their scores ψ = ρ′ and the kernels κ ∝ 1 − ρ.
//!
//! The two bounded families (Welsch and Epanechnikov) are normalized so that
//! ρ(0) = 0 and ρ(r) → 1 as |r| → ∞. Under that normalization the kernel is
//! exactly `normalizer · (1 − ρ)`, which is how [`kernel`] computes it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default clipping point of the Huber score.
pub const DEFAULT_HUBER_CLIP: f64 = 1.345;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RhoFamily {
    /// ρ(r) = 1 − exp(−r²/2); kernel is the standard Gaussian density.
    Welsch,
    /// ρ(r) = min(r², 1); kernel is (3/4)(1 − r²) on [−1, 1]. The location
    /// estimate is the skipped mean.
    Epanechnikov,
    /// ψ(r) = clamp(r, −k, k). Monotone score, unbounded ρ.
    HuberMonotone { huber_clip: f64 },
}

impl RhoFamily {
    pub fn huber(clip: f64) -> Result<Self> {
        if !(clip.is_finite() && clip > 0.0) {
            return Err(Error::param(format!("huber clip must be positive, got {clip}")));
        }
        Ok(RhoFamily::HuberMonotone { huber_clip: clip })
    }

    /// Parses the command-line family names `welsch`, `epanechnikov` and `huber`.
    pub fn parse(name: &str, huber_clip: f64) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "welsch" => Ok(RhoFamily::Welsch),
            "epanechnikov" => Ok(RhoFamily::Epanechnikov),
            "huber" => RhoFamily::huber(huber_clip),
            other => Err(Error::param(format!("unknown family '{other}'"))),
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, RhoFamily::HuberMonotone { .. })
    }

    pub(crate) fn require_bounded(&self) -> Result<()> {
        if self.is_bounded() {
            Ok(())
        } else {
            Err(Error::NonKernelConvertible)
        }
    }

    /// Points where ψ is not differentiable (or not continuous).
    pub fn non_smooth_points(&self) -> Vec<f64> {
        match *self {
            RhoFamily::Welsch => vec![],
            RhoFamily::Epanechnikov => vec![-1.0, 1.0],
            RhoFamily::HuberMonotone { huber_clip } => vec![-huber_clip, huber_clip],
        }
    }
}

/// Value-level description of a ρ function. [`RhoFamily`] is the only
/// implementor used by the estimators; [`CustomRho`] lets callers plug in
/// other shapes for the property checks.
pub trait RhoFunction {
    fn rho(&self, r: f64) -> f64;
    fn psi(&self, r: f64) -> f64;
    fn is_bounded(&self) -> bool;
}

impl RhoFunction for RhoFamily {
    fn rho(&self, r: f64) -> f64 {
        rho(*self, r)
    }
    fn psi(&self, r: f64) -> f64 {
        psi(*self, r)
    }
    fn is_bounded(&self) -> bool {
        RhoFamily::is_bounded(self)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CustomRho {
    pub rho: fn(f64) -> f64,
    pub psi: fn(f64) -> f64,
    pub bounded: bool,
}

impl RhoFunction for CustomRho {
    fn rho(&self, r: f64) -> f64 {
        (self.rho)(r)
    }
    fn psi(&self, r: f64) -> f64 {
        (self.psi)(r)
    }
    fn is_bounded(&self) -> bool {
        self.bounded
    }
}

#[inline]
pub fn rho(family: RhoFamily, r: f64) -> f64 {
    match family {
        RhoFamily::Welsch => 1.0 - (-0.5 * r * r).exp(),
        RhoFamily::Epanechnikov => (r * r).min(1.0),
        RhoFamily::HuberMonotone { huber_clip: k } => {
            let a = r.abs();
            if a <= k {
                0.5 * r * r
            } else {
                k * a - 0.5 * k * k
            }
        }
    }
}

/// ψ = ρ′. For Epanechnikov the value at |r| = 1 is 0.
#[inline]
pub fn psi(family: RhoFamily, r: f64) -> f64 {
    match family {
        RhoFamily::Welsch => r * (-0.5 * r * r).exp(),
        RhoFamily::Epanechnikov => {
            if r.abs() < 1.0 {
                2.0 * r
            } else {
                0.0
            }
        }
        RhoFamily::HuberMonotone { huber_clip: k } => r.clamp(-k, k),
    }
}

/// Constant that turns 1 − ρ into a probability density.
pub fn kernel_normalizer(family: RhoFamily) -> Result<f64> {
    match family {
        RhoFamily::Welsch => Ok(1.0 / (2.0 * PI).sqrt()),
        RhoFamily::Epanechnikov => Ok(0.75),
        RhoFamily::HuberMonotone { .. } => Err(Error::NonKernelConvertible),
    }
}

#[inline]
pub fn kernel(family: RhoFamily, r: f64) -> Result<f64> {
    Ok(kernel_normalizer(family)? * (1.0 - rho(family, r)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyReport {
    pub even: bool,
    pub monotone_in_abs: bool,
    pub bounded: bool,
    pub psi_matches_finite_difference: bool,
    pub max_finite_difference_error: f64,
    pub psi_monotone: bool,
    /// Points where ψ jumps.
    pub psi_discontinuities: Vec<f64>,
}

impl PropertyReport {
    pub fn all_pass(&self) -> bool {
        self.even && self.monotone_in_abs && self.bounded && self.psi_matches_finite_difference
    }
}

/// Half-width of the evaluation grid used by [`validate_family`].
pub const VALIDATION_RADIUS: f64 = 10.0;
/// Grid step used by [`validate_family`] (20 001 points on [−10, 10]).
pub const VALIDATION_STEP: f64 = 1e-3;
/// Central finite-difference step.
pub const FD_STEP: f64 = 1e-5;
/// Allowed |ψ − central difference|.
pub const FD_TOLERANCE: f64 = 1e-6;

/// Checks the shape properties of a family by sampled evaluation on the
/// uniform grid `[-VALIDATION_RADIUS, VALIDATION_RADIUS]` with spacing
/// `VALIDATION_STEP`. The finite-difference comparison skips grid points
/// closer than `VALIDATION_STEP` to a non-smooth point.
pub fn validate_family(family: RhoFamily) -> PropertyReport {
    let steps = (2.0 * VALIDATION_RADIUS / VALIDATION_STEP).round() as i64;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| -VALIDATION_RADIUS + i as f64 * VALIDATION_STEP)
        .collect();
    let kinks = family.non_smooth_points();

    let even = grid.iter().all(|&r| rho(family, r) == rho(family, -r));

    let positive: Vec<f64> = grid.iter().copied().filter(|&r| r >= 0.0).collect();
    let monotone_in_abs = positive
        .windows(2)
        .all(|w| rho(family, w[1]) >= rho(family, w[0]) - 1e-15);

    let (lo, hi) = grid.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
        let v = rho(family, r);
        (lo.min(v), hi.max(v))
    });
    let saturates = rho(family, VALIDATION_RADIUS) >= 1.0 - 1e-12;
    let bounded = lo >= 0.0 && hi <= 1.0 + 1e-12 && saturates;

    let mut max_fd_error: f64 = 0.0;
    for &r in &grid {
        if kinks.iter().any(|&p| (r - p).abs() < VALIDATION_STEP) {
            continue;
        }
        let fd = (rho(family, r + FD_STEP) - rho(family, r - FD_STEP)) / (2.0 * FD_STEP);
        max_fd_error = max_fd_error.max((psi(family, r) - fd).abs());
    }

    let psi_monotone = grid.windows(2).all(|w| psi(family, w[1]) >= psi(family, w[0]));

    let psi_discontinuities = kinks
        .into_iter()
        .filter(|&p| (psi(family, p + 1e-9) - psi(family, p - 1e-9)).abs() > 1e-3)
        .collect();

    PropertyReport {
        even,
        monotone_in_abs,
        bounded,
        psi_matches_finite_difference: max_fd_error <= FD_TOLERANCE,
        max_finite_difference_error: max_fd_error,
        psi_monotone,
        psi_discontinuities,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HUBER: RhoFamily = RhoFamily::HuberMonotone { huber_clip: DEFAULT_HUBER_CLIP };

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    // Composite Simpson on [a, b]; kept here so kernel normalization is
    // checked independently of the library's own grid code.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
        let h = (b - a) / intervals as f64;
        let mut s = f(a) + f(b);
        for i in 1..intervals {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn rho_values() {
        assert_eq!(rho(RhoFamily::Welsch, 0.0), 0.0);
        assert!(close(rho(RhoFamily::Welsch, 1.0), 0.393469, 1e-6));
        assert_eq!(rho(RhoFamily::Epanechnikov, 2.0), 1.0);
        assert_eq!(rho(RhoFamily::Epanechnikov, 0.5), 0.25);
        assert!(close(rho(HUBER, 3.0), 1.345 * 3.0 - 0.5 * 1.345 * 1.345, 1e-15));
    }

    #[test]
    fn psi_values() {
        assert_eq!(psi(RhoFamily::Welsch, 0.0), 0.0);
        assert!(close(psi(RhoFamily::Welsch, 1.0), 0.606531, 1e-6));
        assert_eq!(psi(HUBER, 10.0), 1.345);
        assert_eq!(psi(HUBER, -10.0), -1.345);
        assert_eq!(psi(RhoFamily::Epanechnikov, 1.0), 0.0);
        assert_eq!(psi(RhoFamily::Epanechnikov, -1.0), 0.0);
        assert_eq!(psi(RhoFamily::Epanechnikov, 0.5), 1.0);
    }

    #[test]
    fn kernel_values() {
        assert!(close(kernel(RhoFamily::Welsch, 0.0).unwrap(), 0.398942, 1e-6));
        assert_eq!(kernel(RhoFamily::Epanechnikov, 0.0).unwrap(), 0.75);
        assert_eq!(kernel(RhoFamily::Epanechnikov, 1.5).unwrap(), 0.0);
        assert!(matches!(kernel(HUBER, 0.0), Err(Error::NonKernelConvertible)));
    }

    #[test]
    fn normalizer_matches_quadrature_of_one_minus_rho() {
        let welsch_mass = simpson(|r| 1.0 - rho(RhoFamily::Welsch, r), -20.0, 20.0, 8000);
        assert!(close(1.0 / welsch_mass, 0.398942, 1e-6));
        assert!(close(kernel_normalizer(RhoFamily::Welsch).unwrap(), 1.0 / welsch_mass, 1e-12));

        let epa_mass = simpson(|r| 1.0 - rho(RhoFamily::Epanechnikov, r), -20.0, 20.0, 4000);
        assert!(close(epa_mass, 4.0 / 3.0, 1e-12));
        assert!(close(kernel_normalizer(RhoFamily::Epanechnikov).unwrap(), 1.0 / epa_mass, 1e-12));

        assert!(kernel_normalizer(HUBER).is_err());
    }

    #[test]
    fn kernels_integrate_to_one() {
        for family in [RhoFamily::Welsch, RhoFamily::Epanechnikov] {
            let mass = simpson(|r| kernel(family, r).unwrap(), -20.0, 20.0, 4000);
            assert!(close(mass, 1.0, 1e-6), "{family:?}: {mass}");
        }
    }

    #[test]
    fn validation_reports() {
        let w = validate_family(RhoFamily::Welsch);
        assert!(w.all_pass(), "{w:?}");
        assert!(w.psi_discontinuities.is_empty());

        let e = validate_family(RhoFamily::Epanechnikov);
        assert!(e.all_pass(), "{e:?}");
        assert_eq!(e.psi_discontinuities, vec![-1.0, 1.0]);

        let h = validate_family(HUBER);
        assert!(!h.bounded);
        assert!(h.psi_monotone);
        assert!(h.even && h.monotone_in_abs && h.psi_matches_finite_difference);
        assert!(h.psi_discontinuities.is_empty());
    }

    #[test]
    fn parse_names() {
        assert_eq!(RhoFamily::parse("Welsch", 1.0).unwrap(), RhoFamily::Welsch);
        assert_eq!(
            RhoFamily::parse("huber", 2.0).unwrap(),
            RhoFamily::HuberMonotone { huber_clip: 2.0 }
        );
        assert!(RhoFamily::parse("tukey", 1.0).is_err());
        assert!(RhoFamily::huber(0.0).is_err());
    }

    #[test]
    fn custom_descriptor_is_usable_through_the_trait() {
        let triangle = CustomRho {
            rho: |r| r.abs().min(1.0),
            psi: |r| if r.abs() < 1.0 { r.signum() } else { 0.0 },
            bounded: true,
        };
        let f: &dyn RhoFunction = &triangle;
        assert_eq!(f.rho(0.5), 0.5);
        assert_eq!(f.psi(-0.5), -1.0);
        assert!(f.is_bounded());
        assert!(RhoFunction::is_bounded(&RhoFamily::Welsch));
    }
}
