//! Randomized invariants of the estimators.

mod common;

use proptest::prelude::*;

use redescend::breakdown::{default_site_magnitudes, empirical_breakdown, epsilon_star};
use redescend::data::NormalStream;
use redescend::kde::{density, density_from_objective};
use redescend::location::{objective, solve_monotone, solve_redescending};
use redescend::pca::{robust_eigen_replace, sample_covariance, ScaleStatistic};
use redescend::rho::psi;
use redescend::{MultiSample, RhoFamily, Sample, ScaleMode, SolverConfig};

use common::{frobenius_relative, random_orthogonal, sample, trapezoid};

fn values(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, n)
}

fn bounded_family() -> impl Strategy<Value = RhoFamily> {
    prop_oneof![Just(RhoFamily::Welsch), Just(RhoFamily::Epanechnikov)]
}

fn max_gap(s: &Sample) -> f64 {
    s.sorted().windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mad_scaled_fit_is_affine_equivariant(
        v in values(5..30),
        family in bounded_family(),
        a in -100.0..100.0f64,
        b in 0.1..10.0f64,
        c in 0.5..3.0f64,
    ) {
        let s = Sample::new(v.clone()).unwrap();
        let config = SolverConfig::default();
        let Ok(fit) = solve_redescending(&s, family, ScaleMode::mad(c), &config) else {
            return Ok(());
        };
        let moved = Sample::new(v.iter().map(|x| b * x + a).collect()).unwrap();
        let moved_fit = solve_redescending(&moved, family, ScaleMode::mad(c), &config).unwrap();
        // Unique minimizers only: a near-tie between basins may flip under rounding.
        let runner_up = fit.local_minima.iter().map(|m| m.1).filter(|&o| o > fit.objective_at_estimate + 1e-9).count();
        prop_assume!(runner_up + 1 == fit.local_minima.len());
        let tol = 1e-10 * moved.range() + 1e-12 * a.abs();
        prop_assert!((moved_fit.estimate - (b * fit.estimate + a)).abs() <= tol,
            "{} vs {}", moved_fit.estimate, b * fit.estimate + a);
    }

    #[test]
    fn fixed_scale_fit_is_shift_equivariant(v in values(3..20), family in bounded_family(), a in -100.0..100.0f64, c in 0.3..3.0f64) {
        let s = Sample::new(v.clone()).unwrap();
        let config = SolverConfig::default();
        let fit = solve_redescending(&s, family, ScaleMode::fixed(c), &config).unwrap();
        let near_tie = fit.local_minima.iter().filter(|m| m.1 <= fit.objective_at_estimate + 1e-9).count() > 1;
        prop_assume!(!near_tie);
        let moved = Sample::new(v.iter().map(|x| x + a).collect()).unwrap();
        let moved_fit = solve_redescending(&moved, family, ScaleMode::fixed(c), &config).unwrap();
        let tol = 1e-10 * s.range().max(c) + 1e-12 * a.abs();
        prop_assert!((moved_fit.estimate - (fit.estimate + a)).abs() <= tol);
    }

    #[test]
    fn estimate_lies_in_hull_and_beats_a_dense_grid(v in values(1..25), family in bounded_family(), c in 0.05..5.0f64) {
        let s = Sample::new(v).unwrap();
        let fit = solve_redescending(&s, family, ScaleMode::fixed(c), &SolverConfig::default()).unwrap();
        prop_assert!(s.min() <= fit.estimate && fit.estimate <= s.max());
        let slack = 1e-12 * s.len() as f64;
        for i in 0..=2000 {
            let t = s.min() + s.range() * i as f64 / 2000.0;
            prop_assert!(fit.objective_at_estimate <= objective(&s, family, c, t) + slack);
        }
        prop_assert!(!fit.local_minima.is_empty());
    }

    #[test]
    fn wide_welsch_window_approaches_the_mean(v in values(2..30), factor in 100.0..1000.0f64) {
        let s = Sample::new(v).unwrap();
        prop_assume!(s.range() > 0.0);
        let fit = solve_redescending(&s, RhoFamily::Welsch, ScaleMode::fixed(factor * s.range()), &SolverConfig::default()).unwrap();
        prop_assert!((fit.estimate - s.mean()).abs() <= 1e-3 * s.range());
    }

    #[test]
    fn monotone_root_has_small_residual(v in values(1..40), clip in 0.5..3.0f64, c in 0.01..10.0f64) {
        let s = Sample::new(v).unwrap();
        let family = RhoFamily::huber(clip).unwrap();
        let t = solve_monotone(&s, family, c).unwrap();
        let g: f64 = s.values().iter().map(|&x| psi(family, (x - t) / c)).sum();
        prop_assert!(g.abs() <= s.len() as f64 * 1e-8, "residual {g}");
    }

    #[test]
    fn density_is_affine_in_the_objective(v in values(2..30), family in bounded_family(), factor in 1.0..3.0f64) {
        let s = Sample::new(v).unwrap();
        prop_assume!(s.range() > 0.0);
        // A window at least as wide as every gap keeps the density away from zero inside the hull.
        let c = factor * max_gap(&s);
        for i in 0..1000 {
            let x = s.min() + s.range() * i as f64 / 999.0;
            let a = density(&s, family, c, x).unwrap();
            let b = density_from_objective(&s, family, c, x).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()), "{x}: {a} vs {b}");
        }
    }

    #[test]
    fn epsilon_star_brackets_first_break(v in prop::collection::vec(-5i32..5, 1..8), family in bounded_family(), c in prop_oneof![Just(0.01), Just(0.3), Just(1.0), Just(5.0)]) {
        let s = Sample::new(v.iter().map(|&x| x as f64).collect()).unwrap();
        let report = epsilon_star(&s, family, c).unwrap();
        let n = s.len();
        let emp = empirical_breakdown(&s, family, ScaleMode::fixed(c), n + 1, &default_site_magnitudes(&s, c)).unwrap();
        let m = emp.first_breaking_m.expect("breaks by m = n + 1");
        prop_assert!((m - 1) as f64 / (n + m - 1) as f64 <= report.epsilon_star);
        prop_assert!(report.epsilon_star <= m as f64 / (n + m) as f64);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn density_integrates_to_one(v in values(1..15), c in 0.2..2.0f64) {
        let s = Sample::new(v).unwrap();
        let (lo, hi) = (s.min() - 20.0 * c, s.max() + 20.0 * c);
        let welsch = trapezoid(|x| density(&s, RhoFamily::Welsch, c, x).unwrap(), lo, hi, 20_000);
        prop_assert!((welsch - 1.0).abs() <= 1e-4, "Welsch {welsch}");
        let epan = trapezoid(|x| density(&s, RhoFamily::Epanechnikov, c, x).unwrap(), lo, hi, 200_000);
        prop_assert!((epan - 1.0).abs() <= 1e-6, "Epanechnikov {epan}");
    }

    #[test]
    fn sd_replacement_reproduces_covariance(seed in any::<u64>(), n in 5usize..40, d in 2usize..6) {
        let mut z = NormalStream::new(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|k| (k + 1) as f64 * z.next_normal()).collect()).collect();
        let ms = MultiSample::from_rows(&rows).unwrap();
        let v = robust_eigen_replace(&ms, ScaleStatistic::StdDev).unwrap();
        prop_assert!(frobenius_relative(&v.matrix, &sample_covariance(&ms)) <= 1e-10);
    }

    #[test]
    fn covariance_rotates_with_the_data(seed in any::<u64>()) {
        let mut z = NormalStream::new(seed);
        let rows: Vec<Vec<f64>> = (0..30).map(|_| vec![3.0 * z.next_normal(), z.next_normal(), 0.5 * z.next_normal()]).collect();
        let ms = MultiSample::from_rows(&rows).unwrap();
        let u = random_orthogonal(&mut z, 3);
        let rotated = sample_covariance(&ms.transformed(&u).unwrap());
        let expected = &u * sample_covariance(&ms) * u.transpose();
        prop_assert!(frobenius_relative(&expected, &rotated) <= 1e-12);
    }
}

#[test]
fn epsilon_star_grows_with_the_window() {
    let s = sample(&[0.0, 0.7, 1.1, 2.5, 3.0, 4.2, 6.0]);
    let range = s.range();
    let mut previous = 0.0;
    let mut last = 0.0;
    for k in [0.01, 0.1, 1.0, 10.0, 100.0] {
        for family in [RhoFamily::Welsch, RhoFamily::Epanechnikov] {
            let e = epsilon_star(&s, family, k * range).unwrap().epsilon_star;
            if family == RhoFamily::Welsch {
                assert!(e >= previous, "{k}: {e} < {previous}");
                previous = e;
                last = e;
            }
            assert!(e <= 0.5);
        }
    }
    assert!(last > 0.499, "{last}");

    let n = s.len() as f64;
    let tiny = epsilon_star(&s, RhoFamily::Welsch, 1e-3).unwrap().epsilon_star;
    assert!((tiny - 1.0 / (n + 1.0)).abs() < 1e-12, "{tiny}");
}

#[test]
fn epsilon_star_depends_only_on_n_and_a() {
    let a = epsilon_star(&sample(&[0.0, 100.0, 200.0]), RhoFamily::Welsch, 0.01).unwrap();
    let b = epsilon_star(&sample(&[-7.0, 50.0, 300.0]), RhoFamily::Welsch, 0.01).unwrap();
    assert_eq!(a.a, b.a);
    assert_eq!(a, b);
}
