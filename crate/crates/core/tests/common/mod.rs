//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use nodal_atlas::field::FieldGrid;
use nodal_atlas::topology::{build_forest, label_domains, trace_curves, LabelOptions, NestingForest, PlaneMesh};

/// `J0(x) = 1/pi int_0^pi cos(x sin t) dt` by the trapezoid rule, which
/// converges geometrically for this periodic integrand.
pub fn j0_quadrature(x: f64) -> f64 {
    let n = 400 + 4 * x.abs().ceil() as usize;
    let h = PI / n as f64;
    let mut s = 0.5 * (1.0 + 1.0);
    for i in 1..n {
        s += (x * (h * i as f64).sin()).cos();
    }
    s * h / PI
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}

/// `E cos(<xi, r e>)` for `xi` uniform on the annulus `alpha <= |xi| <= 1`,
/// by direct quadrature over the spectral measure.
pub fn covariance_quadrature(dim: usize, alpha: f64, r: f64) -> f64 {
    match (dim, alpha >= 1.0) {
        (1, true) => r.cos(),
        (1, false) => simpson(alpha, 1.0, 4000, |s| (r * s).cos()) / (1.0 - alpha),
        (_, true) => j0_quadrature(r),
        (_, false) => {
            let norm = (1.0 - alpha * alpha) / 2.0;
            simpson(alpha, 1.0, 2000, |s| j0_quadrature(r * s) * s) / norm
        }
    }
}

/// First positive zero of `J0` by bisection on the quadrature oracle.
pub fn first_j0_zero() -> f64 {
    let (mut a, mut b) = (2.0, 3.0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if j0_quadrature(a) * j0_quadrature(m) <= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

/// `sup_A |p(A) - q(A)|` over all subsets of the atoms.
pub fn brute_force_discrepancy(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    let n = p.len();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << n) {
        let mut d = 0.0;
        for i in 0..n {
            if mask >> i & 1 == 1 {
                d += p[i] - q[i];
            }
        }
        best = best.max(d.abs());
    }
    best
}

pub fn forest_of(g: &FieldGrid) -> NestingForest {
    let m = PlaneMesh::new(g).unwrap();
    let l = label_domains(&m, LabelOptions::default()).unwrap();
    let c = trace_curves(&m, &l).unwrap();
    build_forest(&m, &l, c).unwrap()
}

/// Mean and standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}
