//! Image output: 8-bit binary PGM rasters and SVG curve overlays.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::field::FieldGrid;
use crate::sphere::SphereGrid;
use crate::topology::NestingForest;

fn pgm(width: usize, height: usize, pixel: impl Fn(usize, usize) -> u8) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.reserve(width * height);
    for row in 0..height {
        for col in 0..width {
            out.push(pixel(col, row));
        }
    }
    out
}

/// Positive samples white, negative black; the top row is the largest `y`.
pub fn sign_pgm(grid: &FieldGrid) -> Vec<u8> {
    let (nx, ny) = (grid.nx(), grid.ny());
    pgm(nx, ny, |c, r| if grid.value(c, ny - 1 - r) >= 0.0 { 255 } else { 0 })
}

/// Values mapped linearly from `[min, max]` to `[0, 255]`; a constant field
/// renders as uniform mid-grey.
pub fn intensity_pgm(grid: &FieldGrid) -> Vec<u8> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let lo = grid.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    pgm(nx, ny, |c, r| {
        if !(span > 0.0) {
            return 128;
        }
        let t = (grid.value(c, ny - 1 - r) - lo) / span;
        (t * 255.0).round().clamp(0.0, 255.0) as u8
    })
}

/// Latitude rows from north to south, longitude columns from 0 to 2 pi.
pub fn sphere_sign_pgm(grid: &SphereGrid) -> Vec<u8> {
    pgm(grid.n_lon, grid.n_lat, |c, r| if grid.value(r, c) >= 0.0 { 255 } else { 0 })
}

pub fn write_sign_pgm(grid: &FieldGrid, path: &Path) -> Result<()> {
    fs::write(path, sign_pgm(grid))?;
    Ok(())
}

pub fn write_intensity_pgm(grid: &FieldGrid, path: &Path) -> Result<()> {
    fs::write(path, intensity_pgm(grid))?;
    Ok(())
}

const PALETTE: [&str; 6] = ["#1f4e9c", "#c0392b", "#27ae60", "#8e44ad", "#d68910", "#17a589"];

/// Nesting depth of every domain: 0 for the roots, parents one less than
/// their children. Domains unreachable through closed curves get 0.
pub fn domain_depths(forest: &NestingForest) -> Vec<u32> {
    let mut depth = vec![u32::MAX; forest.domain_count];
    let mut queue = VecDeque::new();
    for &r in &forest.roots {
        depth[r as usize] = 0;
        queue.push_back(r);
    }
    loop {
        while let Some(d) = queue.pop_front() {
            for &e in forest.edges_of(d) {
                let c = &forest.curves[e as usize];
                let other = if c.outside() == d { c.inside() } else { c.outside() };
                if depth[other as usize] == u32::MAX {
                    depth[other as usize] = depth[d as usize] + 1;
                    queue.push_back(other);
                }
            }
        }
        // components of the forest that contain no root
        match depth.iter().position(|&x| x == u32::MAX) {
            Some(d) => {
                depth[d] = 0;
                queue.push_back(d as u32);
            }
            None => break,
        }
    }
    depth
}

/// Every traced curve as a polyline, coloured by the depth of the domain on
/// its outer side; clipped curves are dashed. `view` is
/// `[x_min, y_min, x_max, y_max]`.
pub fn curves_svg(forest: &NestingForest, view: [f64; 4]) -> String {
    let depth = domain_depths(forest);
    let [x0, y0, x1, y1] = view;
    let (w, h) = (x1 - x0, y1 - y0);
    let stroke = w.max(h) / 800.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0} {} {w} {h}" width="800" height="{}">"#,
        -y1,
        (800.0 * h / w).round()
    );
    for c in &forest.curves {
        let colour = PALETTE[depth[c.outside() as usize] as usize % PALETTE.len()];
        let mut pts = String::new();
        for p in &c.polyline {
            let _ = write!(pts, "{:.4},{:.4} ", p[0], -p[1]);
        }
        let tag = if c.closed { "polygon" } else { "polyline" };
        let dash = if c.clipped {
            format!(r#" stroke-dasharray="{:.4}""#, 4.0 * stroke)
        } else {
            String::new()
        };
        let _ = writeln!(
            s,
            r#"<{tag} points="{}" fill="none" stroke="{colour}" stroke-width="{stroke:.4}"{dash}/>"#,
            pts.trim_end()
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_curves_svg(forest: &NestingForest, view: [f64; 4], path: &Path) -> Result<()> {
    fs::write(path, curves_svg(forest, view))?;
    Ok(())
}
