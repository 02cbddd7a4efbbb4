//! Kac-Rice densities for the plane-wave fields and the empirical counters
//! that check them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{radial_moment, second_moment_per_axis, FieldGrid, SpectralParams};
use crate::topology::NodalCurve;

/// Absolute constant used in [`critical_point_bound`].
pub const CRITICAL_BOUND_CONSTANT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralMoments {
    pub lambda0: f64,
    pub lambda2_per_axis: f64,
}

impl SpectralMoments {
    pub fn of(params: &SpectralParams) -> Result<Self> {
        params.validate()?;
        Ok(SpectralMoments {
            lambda0: 1.0,
            lambda2_per_axis: second_moment_per_axis(params.dim, params.alpha),
        })
    }
}

/// `sqrt(1 + a + a^2) / sqrt(3)`.
pub fn beta_1_alpha(alpha: f64) -> f64 {
    ((1.0 + alpha + alpha * alpha) / 3.0).sqrt()
}

/// Expected zeros per unit length, `sqrt(lambda2 / lambda0) / pi`.
pub fn zero_density_1d(params: &SpectralParams) -> Result<f64> {
    if params.dim != 1 {
        return Err(Error::Unsupported(format!("zero_density_1d needs n = 1, got {}", params.dim)));
    }
    let m = SpectralMoments::of(params)?;
    Ok((m.lambda2_per_axis / m.lambda0).sqrt() / PI)
}

/// Expected nodal length per unit area: `p_F(0) E|grad F| = sqrt(lambda2) / 2`
/// with `lambda2` the per-axis second moment.
pub fn nodal_length_density_2d(params: &SpectralParams) -> Result<f64> {
    if params.dim != 2 {
        return Err(Error::Unsupported(format!(
            "nodal_length_density_2d needs n = 2, got {}",
            params.dim
        )));
    }
    let m = SpectralMoments::of(params)?;
    let density_at_zero = 1.0 / (2.0 * PI * m.lambda0).sqrt();
    let mean_gradient_norm = (PI * m.lambda2_per_axis / 2.0).sqrt();
    Ok(density_at_zero * mean_gradient_norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalBound {
    /// `C * moment_ratio * Vol(B(r))`.
    pub bound: f64,
    /// `(E|D grad F|^2)^(n/2) / det(E[grad F grad F^T])^(1/2)`.
    pub moment_ratio: f64,
    pub constant: f64,
}

/// Upper bound on the expected number of critical points in `B(r)`, taking
/// `H = grad F` in the general zero-count bound. Here
/// `E|D H|^2 = E|xi|^4` and `E[H H^T] = lambda2 I`.
pub fn critical_point_bound(params: &SpectralParams, r: f64) -> Result<CriticalBound> {
    if !(r > 0.0) {
        return Err(Error::Precondition(format!("radius must be positive, got {r}")));
    }
    let m = SpectralMoments::of(params)?;
    let n = params.dim as i32;
    assert!(m.lambda2_per_axis > 0.0, "gradient covariance is nondegenerate for alpha in [0, 1]");
    let fourth = radial_moment(params.dim, params.alpha, 4);
    let moment_ratio = fourth.powf(n as f64 / 2.0) / m.lambda2_per_axis.powf(n as f64 / 2.0);
    let vol = match n {
        1 => 2.0 * r,
        _ => PI * r * r,
    };
    Ok(CriticalBound {
        bound: CRITICAL_BOUND_CONSTANT * moment_ratio * vol,
        moment_ratio,
        constant: CRITICAL_BOUND_CONSTANT,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalCount {
    pub count: u64,
    /// A gradient component vanishes identically on part of the grid, so the
    /// critical set is not isolated and the count is not meaningful.
    pub degenerate: bool,
}

/// Fraction of vanishing samples of one gradient component above which the
/// input is flagged.
const DEGENERATE_FRACTION: f64 = 0.5;

/// Cells whose four corners show both signs in each gradient component,
/// restricted to cells inside the grid's window disk.
pub fn count_critical_points(grid: &FieldGrid) -> Result<CriticalCount> {
    let grad = grid
        .grad
        .as_ref()
        .ok_or_else(|| Error::Precondition("count_critical_points needs gradients".into()))?;
    let (nx, ny) = (grid.nx(), grid.ny());
    if ny < 2 {
        return Err(Error::Unsupported("critical point count needs a 2D grid".into()));
    }
    let scale = (grad.iter().map(|g| g[0] * g[0] + g[1] * g[1]).sum::<f64>() / grad.len() as f64).sqrt();
    let tiny = 1e-9 * scale.max(f64::MIN_POSITIVE);
    let mut degenerate = false;
    for c in 0..2 {
        let zeros = grad.iter().filter(|g| g[c].abs() <= tiny).count();
        if zeros as f64 > DEGENERATE_FRACTION * grad.len() as f64 {
            degenerate = true;
        }
    }
    let r = grid.window_radius;
    let mut count = 0;
    for iy in 0..ny - 1 {
        for ix in 0..nx - 1 {
            let corners = [(ix, iy), (ix + 1, iy), (ix, iy + 1), (ix + 1, iy + 1)];
            if corners.iter().any(|&(a, b)| {
                let p = grid.spec.point(a, b);
                p[0].hypot(p[1]) >= r
            }) {
                continue;
            }
            let changes = |c: usize| {
                let pos = corners.iter().filter(|&&(a, b)| grad[b * nx + a][c] >= 0.0).count();
                pos > 0 && pos < 4
            };
            if changes(0) && changes(1) {
                count += 1;
            }
        }
    }
    Ok(CriticalCount { count, degenerate })
}

/// Sign changes between consecutive samples; exact zeros count as positive.
pub fn count_sign_changes(values: &[f64]) -> u64 {
    values.windows(2).filter(|w| (w[0] >= 0.0) != (w[1] >= 0.0)).count() as u64
}

/// Total length of curve segments whose midpoint lies in `B(r)`.
pub fn nodal_length_in_disk(curves: &[NodalCurve], r: f64) -> f64 {
    let mut total = 0.0;
    for c in curves {
        let n = c.polyline.len();
        let segs = if c.closed { n } else { n.saturating_sub(1) };
        for k in 0..segs {
            let (a, b) = (c.polyline[k], c.polyline[(k + 1) % n]);
            let m = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
            if m[0].hypot(m[1]) < r {
                total += (a[0] - b[0]).hypot(a[1] - b[1]);
            }
        }
    }
    total
}

/// Analytic value paired with a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiceComparison {
    pub analytic: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub relative_error: f64,
}

impl RiceComparison {
    pub fn from_samples(analytic: f64, per_sample: &[f64]) -> Self {
        let n = per_sample.len() as f64;
        let mean = per_sample.iter().sum::<f64>() / n;
        let var = if n > 1.0 {
            per_sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        RiceComparison {
            analytic,
            estimate: mean,
            stderr: (var / n).sqrt(),
            relative_error: (mean - analytic).abs() / analytic,
        }
    }
}
