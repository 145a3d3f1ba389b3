#![allow(dead_code)]

use nalgebra::DMatrix;
use redescend::data::NormalStream;
use redescend::Sample;

pub fn sample(values: &[f64]) -> Sample {
    Sample::new(values.to_vec()).unwrap()
}

pub fn normals(stream: &mut NormalStream, n: usize) -> Vec<f64> {
    (0..n).map(|_| stream.next_normal()).collect()
}

/// Random orthogonal matrix by Gram–Schmidt on a matrix of normals.
pub fn random_orthogonal(stream: &mut NormalStream, d: usize) -> DMatrix<f64> {
    loop {
        let mut q = DMatrix::from_fn(d, d, |_, _| stream.next_normal());
        let mut ok = true;
        for j in 0..d {
            for k in 0..j {
                let proj = q.column(j).dot(&q.column(k));
                let qk = q.column(k).clone_owned();
                q.column_mut(j).axpy(-proj, &qk, 1.0);
            }
            let norm = q.column(j).norm();
            if norm < 1e-6 {
                ok = false;
                break;
            }
            q.column_mut(j).scale_mut(1.0 / norm);
        }
        if ok {
            return q;
        }
    }
}

pub fn random_symmetric(stream: &mut NormalStream, d: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |_, _| stream.next_normal());
    (&a + a.transpose()) * 0.5
}

pub fn frobenius_relative(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

/// Composite Simpson rule on `[lo, hi]` with `intervals` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, intervals: usize) -> f64 {
    let h = (hi - lo) / intervals as f64;
    let mut sum = f(lo) + f(hi);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(lo + i as f64 * h);
    }
    sum * h / 3.0
}

pub fn trapezoid(f: impl Fn(f64) -> f64, lo: f64, hi: f64, intervals: usize) -> f64 {
    let h = (hi - lo) / intervals as f64;
    let mut sum = 0.5 * (f(lo) + f(hi));
    for i in 1..intervals {
        sum += f(lo + i as f64 * h);
    }
    sum * h
}
