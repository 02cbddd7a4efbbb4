//! Realization of a pattern as the nesting end of `phi + eps psi`.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{fit_monochromatic, pattern_for_tree, LatticeSignPattern, MonochromaticFit};
use crate::error::{Error, Result};
use crate::field::{FieldGrid, GridSpec};
use crate::render::write_sign_pgm;
use crate::topology::{
    build_forest, label_domains, trace_curves, tree_end, LabelOptions, NestingForest, PlaneMesh, RootedTreeCode,
};

/// Perturbation sizes tried in order by [`realize_with_sweep`].
pub const EPSILON_SWEEP: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
pub const REALIZE_SPACING: f64 = 0.125;
/// Lattice units between the pattern's points and the grid edge.
pub const REALIZE_MARGIN: i32 = 2;

#[derive(Debug, Clone)]
pub struct Realization {
    pub target: RootedTreeCode,
    pub epsilon: f64,
    pub grid: FieldGrid,
    pub code: RootedTreeCode,
    pub matched: bool,
    pub fit_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub target: RootedTreeCode,
    /// `(epsilon, extracted code)` for each tried value, failures as `None`.
    pub tried: Vec<(f64, Option<String>)>,
    /// First epsilon that matched.
    pub matched_at: Option<f64>,
}

/// Grid over the pattern's bounding box plus the margin, offset by half a
/// step so that no sample lands on the checkerboard's nodal lines.
pub fn realization_grid(pattern: &LatticeSignPattern) -> GridSpec {
    let [lo, hi] = pattern.bounding_box;
    let h = REALIZE_SPACING;
    let x0 = (lo[0] - REALIZE_MARGIN) as f64 + h / 2.0;
    let y0 = (lo[1] - REALIZE_MARGIN) as f64 + h / 2.0;
    let nx = ((hi[0] - lo[0] + 2 * REALIZE_MARGIN) as f64 / h).round() as usize;
    let ny = ((hi[1] - lo[1] + 2 * REALIZE_MARGIN) as f64 / h).round() as usize;
    GridSpec {
        origin: [x0, y0],
        spacing: h,
        dims: [nx, ny],
    }
}

/// `phi + eps psi / max_k |psi(k)|`: the fit only fixes signs, so its scale is
/// normalized before the perturbation size applies.
fn perturbed_grid(spec: GridSpec, fit: &MonochromaticFit, epsilon: f64) -> FieldGrid {
    let psi = fit.eval_grid(&spec);
    let epsilon = epsilon / fit.max_value;
    let mut g = FieldGrid::from_fn(spec, f64::INFINITY, |x| (PI * x[0]).sin() * (PI * x[1]).sin());
    for (v, p) in g.values.iter_mut().zip(&psi) {
        *v += epsilon * p;
    }
    g
}

/// Realizes `pattern_for_tree(target)` at one epsilon and extracts the tree
/// end of the curve around the pattern's root. A failure to find that curve
/// writes the sign image into `dump_dir` (the system temporary directory when
/// `None`).
pub fn realize_and_verify_in(
    target: &RootedTreeCode,
    epsilon: f64,
    dump_dir: Option<&Path>,
) -> Result<Realization> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::Precondition(format!(
            "epsilon must be positive, got {epsilon}; the bare checkerboard has degenerate crossings"
        )));
    }
    let pattern = pattern_for_tree(target)?;
    let fit = fit_monochromatic(&pattern)?;
    let spec = realization_grid(&pattern);
    let grid = perturbed_grid(spec, &fit, epsilon);
    match extract_root_end(&grid, &pattern, fit.wavenumber) {
        Ok(code) => Ok(Realization {
            matched: code == *target,
            target: target.clone(),
            epsilon,
            grid,
            code,
            fit_residual: fit.residual,
        }),
        Err(e) => {
            let dir: PathBuf = dump_dir.map(Path::to_path_buf).unwrap_or_else(std::env::temp_dir);
            let path = dir.join(format!("realize-{}-eps{epsilon}.pgm", target.code.replace('(', "L").replace(')', "R")));
            let note = match write_sign_pgm(&grid, &path) {
                Ok(()) => format!("sign image written to {}", path.display()),
                Err(w) => format!("sign image could not be written: {w}"),
            };
            Err(Error::Realization(format!("{target} at epsilon {epsilon}: {e}; {note}")))
        }
    }
}

pub fn realize_and_verify(target: &RootedTreeCode, epsilon: f64) -> Result<Realization> {
    realize_and_verify_in(target, epsilon, None)
}

fn extract_root_end(grid: &FieldGrid, pattern: &LatticeSignPattern, k0: f64) -> Result<RootedTreeCode> {
    let mesh = PlaneMesh::with_wavenumber(grid, k0)?;
    let labels = label_domains(&mesh, LabelOptions::default())?;
    let curves = trace_curves(&mesh, &labels)?;
    let forest = build_forest(&mesh, &labels, curves)?;
    let c = pattern.root_square_centre(0).expect("tree patterns have one figure");
    let spec = grid.spec;
    let ix = ((c[0] - spec.origin[0]) / spec.spacing).round() as usize;
    let iy = ((c[1] - spec.origin[1]) / spec.spacing).round() as usize;
    let root = labels.component[iy * spec.dims[0] + ix];
    let outer = outer_curve(&forest, root)
        .ok_or_else(|| Error::Realization(format!("no closed curve has domain {root} inside")))?;
    tree_end(&forest, outer)
}

fn outer_curve(forest: &NestingForest, domain: u32) -> Option<u32> {
    forest
        .countable_curves()
        .find(|c| c.inside() == domain)
        .map(|c| c.id)
}

/// Tries [`EPSILON_SWEEP`] from the largest value down and stops at the first
/// match.
pub fn realize_with_sweep(target: &RootedTreeCode, dump_dir: Option<&Path>) -> SweepOutcome {
    let mut tried = Vec::new();
    let mut matched_at = None;
    for &eps in &EPSILON_SWEEP {
        match realize_and_verify_in(target, eps, dump_dir) {
            Ok(r) => {
                tried.push((eps, Some(r.code.code.clone())));
                if r.matched {
                    matched_at = Some(eps);
                    break;
                }
            }
            Err(e) => {
                log::warn!("{e}");
                tried.push((eps, None));
            }
        }
    }
    SweepOutcome {
        target: target.clone(),
        tried,
        matched_at,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leaf_matches() {
        let r = realize_and_verify(&RootedTreeCode::leaf(), 0.1).unwrap();
        assert!(r.matched, "got {}", r.code);
    }

    #[test]
    fn zero_epsilon_rejected() {
        assert!(matches!(
            realize_and_verify(&RootedTreeCode::leaf(), 0.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn signs_at_crossings_follow_eta() {
        let t = RootedTreeCode::parse("((())())").unwrap();
        let p = pattern_for_tree(&t).unwrap();
        let f = fit_monochromatic(&p).unwrap();
        for eps in EPSILON_SWEEP {
            for (x, e) in p.points.iter().zip(&p.eta) {
                let x = [x[0] as f64, x[1] as f64];
                let v = (PI * x[0]).sin() * (PI * x[1]).sin() + eps * f.value_at(x);
                assert_eq!(v.signum() as i8, *e);
            }
        }
    }
}
