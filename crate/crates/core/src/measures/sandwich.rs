use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::geometry::point_segment_distance;
use crate::topology::{NestingForest, NodalCurve};

/// Lattice approximation of the averaged-count bracketing
///
/// `1/|B(r)| int_{B(R-r)} N(r, u) du <= N(R) <= 1/|B(r)| int_{B(R+r)} N*(r, u) du`
///
/// where `N(r, u)` counts closed curves inside `B(u, r)` and `N*(r, u)` counts
/// curves meeting it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub lower: f64,
    pub mid: f64,
    pub upper: f64,
    /// One lattice cell's worth of count per counted curve of `mid`.
    pub tolerance: f64,
    pub lattice_spacing: f64,
    pub violated: bool,
}

fn flat(c: &NodalCurve) -> Vec<[f64; 2]> {
    c.polyline.iter().map(|p| [p[0], p[1]]).collect()
}

fn lattice_range(lo: f64, hi: f64, s: f64) -> std::ops::RangeInclusive<i64> {
    (lo / s).ceil() as i64..=(hi / s).floor() as i64
}

/// `spacing` is clamped to at most `r / 8`.
pub fn sandwich_check(forest: &NestingForest, r: f64, big_r: f64, spacing: f64) -> Result<SandwichReport> {
    if !(r > 0.0 && r < big_r) {
        return Err(Error::Precondition(format!("sandwich needs 0 < r < R, got r = {r}, R = {big_r}")));
    }
    let window = forest
        .window_radius()
        .ok_or_else(|| Error::Unsupported("sandwich check needs a planar window".into()))?;
    if window + 1e-9 < big_r + 2.0 * r {
        return Err(Error::Precondition(format!(
            "shifted balls reach radius R + 2r = {}, beyond the extracted window {window}",
            big_r + 2.0 * r
        )));
    }
    let s = spacing.min(r / 8.0);
    let cell = s * s / (PI * r * r);

    let mut mid = 0u64;
    let mut lower = 0u64;
    let mut upper = 0u64;
    for c in &forest.curves {
        let pts = flat(c);
        if pts.is_empty() {
            continue;
        }
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &pts {
            x0 = x0.min(p[0]);
            y0 = y0.min(p[1]);
            x1 = x1.max(p[0]);
            y1 = y1.max(p[1]);
        }
        if c.closed && pts.iter().all(|p| p[0].hypot(p[1]) < big_r) {
            mid += 1;
        }
        if c.closed {
            // u within r of every point: inside [x1 - r, x0 + r] x [y1 - r, y0 + r]
            for i in lattice_range(x1 - r, x0 + r, s) {
                for j in lattice_range(y1 - r, y0 + r, s) {
                    let u = [i as f64 * s, j as f64 * s];
                    if u[0].hypot(u[1]) > big_r - r {
                        continue;
                    }
                    if pts.iter().all(|p| (p[0] - u[0]).hypot(p[1] - u[1]) < r) {
                        lower += 1;
                    }
                }
            }
        }
        let n = pts.len();
        let segs = if c.closed { n } else { n.saturating_sub(1) };
        for i in lattice_range(x0 - r, x1 + r, s) {
            for j in lattice_range(y0 - r, y1 + r, s) {
                let u = [i as f64 * s, j as f64 * s];
                if u[0].hypot(u[1]) > big_r + r {
                    continue;
                }
                let near = if n == 1 {
                    (pts[0][0] - u[0]).hypot(pts[0][1] - u[1]) <= r
                } else {
                    (0..segs).any(|k| point_segment_distance(u, pts[k], pts[(k + 1) % n]) <= r)
                };
                if near {
                    upper += 1;
                }
            }
        }
    }
    let (lower, mid, upper) = (lower as f64 * cell, mid as f64, upper as f64 * cell);
    let tolerance = mid.max(1.0) * cell;
    Ok(SandwichReport {
        lower,
        mid,
        upper,
        tolerance,
        lattice_spacing: s,
        violated: lower > mid + tolerance || mid > upper + tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FieldGrid, GridSpec};
    use crate::topology::{build_forest, label_domains, trace_curves, LabelOptions, PlaneMesh};

    fn forest(g: &FieldGrid) -> NestingForest {
        let m = PlaneMesh::new(g).unwrap();
        let l = label_domains(&m, LabelOptions { allow_coarse: true }).unwrap();
        let c = trace_curves(&m, &l).unwrap();
        build_forest(&m, &l, c).unwrap()
    }

    #[test]
    fn single_bump_is_bracketed() {
        let g = FieldGrid::from_fn(GridSpec::covering_ball(20.0, 0.1), 20.0, |x| 1.0 - x[0] * x[0] - x[1] * x[1]);
        let f = forest(&g);
        let rep = sandwich_check(&f, 5.0, 10.0, 0.5).unwrap();
        assert_eq!(rep.mid, 1.0);
        assert!(rep.lower <= 1.0 + rep.tolerance && rep.upper + rep.tolerance >= 1.0, "{rep:?}");
        assert!(!rep.violated);
    }

    #[test]
    fn separated_bumps() {
        let centres = [[-8.0, 0.0], [8.0, 0.0], [0.0, 8.0], [0.0, -8.0], [0.0, 0.0]];
        let g = FieldGrid::from_fn(GridSpec::covering_ball(30.0, 0.1), 30.0, |x| {
            let mut v = -0.5;
            for c in &centres {
                v += (-(x[0] - c[0]).powi(2) - (x[1] - c[1]).powi(2)).exp();
            }
            v
        });
        let f = forest(&g);
        let rep = sandwich_check(&f, 4.0, 14.0, 0.5).unwrap();
        assert_eq!(rep.mid, 5.0);
        assert!(rep.lower <= rep.mid && rep.mid <= rep.upper, "{rep:?}");
        assert!(!rep.violated);
        assert!(rep.lattice_spacing <= 0.5);
    }

    #[test]
    fn preconditions() {
        let g = FieldGrid::from_fn(GridSpec::covering_ball(10.0, 0.1), 10.0, |x| x[0]);
        let f = forest(&g);
        assert!(matches!(sandwich_check(&f, 5.0, 5.0, 0.1), Err(Error::Precondition(_))));
        assert!(matches!(sandwich_check(&f, 3.0, 6.0, 0.1), Err(Error::Precondition(_))));
    }
}
