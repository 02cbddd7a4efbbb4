//! Interpolation of prescribed signs by monochromatic waves.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::LatticeSignPattern;
use crate::error::{Error, Result};
use crate::field::{gemm_nt, GridSpec};

/// Wavenumber of `sin(pi x) sin(pi y)`.
pub const CHECKERBOARD_WAVENUMBER: f64 = SQRT_2 * PI;

const MAX_RESIDUAL: f64 = 1e-6;
const MIN_DIRECTIONS: usize = 256;
const MAX_SWEEPS: usize = 200_000;
const DUAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonoWave {
    /// Direction angle in `[0, pi)`.
    pub theta: f64,
    pub amplitude: f64,
    pub phase: f64,
}

/// `psi(x) = sum_w A_w cos(k0 <x, theta_w> + phase_w)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonochromaticFit {
    pub wavenumber: f64,
    pub waves: Vec<MonoWave>,
    /// Largest violation of `eta(k) psi(k) >= 1` over the pattern.
    pub residual: f64,
    /// `min_k eta(k) psi(k)`.
    pub min_margin: f64,
    /// `max_k |psi(k)|`.
    pub max_value: f64,
}

impl MonochromaticFit {
    pub fn value_at(&self, x: [f64; 2]) -> f64 {
        self.waves
            .iter()
            .map(|w| w.amplitude * (self.wavenumber * (x[0] * w.theta.cos() + x[1] * w.theta.sin()) + w.phase).cos())
            .sum()
    }

    pub fn laplacian_at(&self, x: [f64; 2]) -> f64 {
        -self.wavenumber * self.wavenumber * self.value_at(x)
    }

    /// Values on a grid, row-major with `x` fastest.
    pub fn eval_grid(&self, spec: &GridSpec) -> Vec<f64> {
        let (nx, ny) = (spec.dims[0], spec.dims[1]);
        let m = self.waves.len();
        let k0 = self.wavenumber;
        // psi = sum_w cos(A_w(x)) u_w(y) + sin(A_w(x)) v_w(y)
        let mut xt = vec![0.0; nx * 2 * m];
        for ix in 0..nx {
            let x = spec.point(ix, 0)[0];
            for (w, wave) in self.waves.iter().enumerate() {
                let a = k0 * x * wave.theta.cos();
                xt[ix * 2 * m + w] = a.cos();
                xt[ix * 2 * m + m + w] = a.sin();
            }
        }
        let mut yt = vec![0.0; ny * 2 * m];
        for iy in 0..ny {
            let y = spec.point(0, iy)[1];
            for (w, wave) in self.waves.iter().enumerate() {
                let b = k0 * y * wave.theta.sin() + wave.phase;
                yt[iy * 2 * m + w] = wave.amplitude * b.cos();
                yt[iy * 2 * m + m + w] = -wave.amplitude * b.sin();
            }
        }
        let mut out = vec![0.0; nx * ny];
        gemm_nt(ny, 2 * m, nx, 1.0, &yt, &xt, &mut out);
        out
    }
}

/// Minimum-norm `psi` in the span of waves of wavenumber `k0 = sqrt(2) pi`
/// in `max(4 |K|, 256)` equispaced directions of the half circle (each with a
/// cosine and a sine phase) subject to `eta(k) psi(k) >= 1` on the pattern.
///
/// Exact interpolation `psi(k) = eta(k)` is also solvable but its minimum-norm
/// solution grows like the inverse of the smallest singular value of the
/// restriction map, which reaches 1e8 at forty-odd points; the sign margin
/// version stays of order one. Points where the margin is active are exactly
/// interpolated. The dual problem is solved by coordinate descent on the
/// kernel `G(k, l) = mean_w cos(k0 <k - l, theta_w>)`.
pub fn fit_monochromatic(pattern: &LatticeSignPattern) -> Result<MonochromaticFit> {
    let k = pattern.points.len();
    if k == 0 {
        return Err(Error::Precondition("pattern has no points".into()));
    }
    let k0 = CHECKERBOARD_WAVENUMBER;
    let n_dir = (4 * k).max(MIN_DIRECTIONS);
    let thetas: Vec<f64> = (0..n_dir).map(|w| PI * w as f64 / n_dir as f64).collect();
    let pts: Vec<[f64; 2]> = pattern.points.iter().map(|p| [p[0] as f64, p[1] as f64]).collect();
    let phase = DMatrix::from_fn(k, n_dir, |r, w| k0 * (pts[r][0] * thetas[w].cos() + pts[r][1] * thetas[w].sin()));
    let cos = phase.map(f64::cos);
    let sin = phase.map(f64::sin);
    let gram = (&cos * cos.transpose() + &sin * sin.transpose()) / n_dir as f64;
    let y: Vec<f64> = pattern.eta.iter().map(|&e| e as f64).collect();

    // dual: min 1/2 a^T H a - sum a, a >= 0, with H = diag(y) G diag(y)
    let mut alpha = vec![0.0f64; k];
    let mut grad = vec![-1.0f64; k];
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut worst: f64 = 0.0;
        for i in 0..k {
            // projected gradient before the update
            let pg = if alpha[i] > 0.0 { grad[i].abs() } else { (-grad[i]).max(0.0) };
            worst = worst.max(pg);
            let new = (alpha[i] - grad[i] / gram[(i, i)]).max(0.0);
            let delta = new - alpha[i];
            if delta != 0.0 {
                alpha[i] = new;
                for j in 0..k {
                    grad[j] += delta * y[i] * y[j] * gram[(i, j)];
                }
            }
        }
        if worst < DUAL_TOLERANCE {
            converged = true;
            break;
        }
    }
    let beta = DVector::from_fn(k, |i, _| alpha[i] * y[i]);
    let values = &gram * &beta;
    let margin = (0..k).map(|i| values[i] * y[i]).fold(f64::INFINITY, f64::min);
    let residual = (1.0 - margin).max(0.0);
    if !converged || residual >= MAX_RESIDUAL {
        return Err(Error::IllConditioned(format!(
            "sign fit on {k} points reached margin {margin:.3e} (converged: {converged})"
        )));
    }
    let c = cos.transpose() * &beta / n_dir as f64;
    let s = sin.transpose() * &beta / n_dir as f64;
    let waves = (0..n_dir)
        .map(|w| MonoWave {
            theta: thetas[w],
            // c cos(u) + s sin(u) = A cos(u + phase)
            amplitude: c[w].hypot(s[w]),
            phase: (-s[w]).atan2(c[w]),
        })
        .collect();
    Ok(MonochromaticFit {
        wavenumber: k0,
        waves,
        residual,
        min_margin: margin,
        max_value: values.amax(),
    })
}
