//! Nodal domains, nodal curves and nesting forests of sampled fields.
//!
//! Extraction runs on any oriented surface mesh whose faces are triangles or
//! quadrilaterals listed counter-clockwise; the plane grid and the
//! latitude-longitude sphere both implement [`NodalMesh`].

mod curves;
mod dump;
mod forest;
pub mod geometry;
mod label;
mod tree;
mod unionfind;

use std::f64::consts::{FRAC_PI_4, PI, TAU};

pub use curves::{trace_curves, NodalCurve};
pub use dump::{parse_forest_dump, write_forest_dump, DumpEdge, DumpVertex, ForestDump};
pub use forest::{build_forest, tree_end, tree_ends, NestingForest};
pub use label::{label_domains, DomainLabeling, LabelOptions};
pub use tree::{canonical_code, enumerate_rooted_trees, random_rooted_tree, RootedTree, RootedTreeCode};
pub use unionfind::UnionFind;

use crate::error::{Error, Result};
use crate::field::FieldGrid;
use crate::sphere::SphereGrid;

/// Where the extraction window ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshKind {
    /// Planar grid restricted to the disk of the given radius.
    Planar { window_radius: f64 },
    /// Closed surface without boundary.
    Closed,
}

pub trait NodalMesh {
    fn vertex_count(&self) -> usize;
    fn value(&self, v: usize) -> f64;
    fn face_count(&self) -> usize;
    /// Writes the face's vertices in counter-clockwise order, returns 3 or 4.
    fn face(&self, f: usize, out: &mut [u32; 4]) -> usize;
    fn position(&self, v: usize) -> [f64; 3];
    /// Area represented by the vertex.
    fn weight(&self, v: usize) -> f64;
    /// Vertex lies on or outside the window boundary.
    fn on_window_boundary(&self, v: usize) -> bool;
    fn kind(&self) -> MeshKind;
    /// Spacing in units where the field's top wavenumber is 1, if meaningful.
    fn resolution(&self) -> Option<f64>;
    /// Vertex used to root the nesting tree on closed surfaces.
    fn root_vertex(&self) -> usize {
        self.vertex_count() - 1
    }
}

/// Coarsest admissible plane grid spacing at unit wavenumber (8 per wavelength).
pub const MAX_UNIT_SPACING: f64 = FRAC_PI_4;

/// Plane grids: vertex `(ix, iy)` has index `iy * nx + ix`.
pub struct PlaneMesh<'a> {
    grid: &'a FieldGrid,
    wavenumber: f64,
}

impl<'a> PlaneMesh<'a> {
    pub fn new(grid: &'a FieldGrid) -> Result<Self> {
        Self::with_wavenumber(grid, 1.0)
    }

    /// For synthetic fields whose top wavenumber differs from 1.
    pub fn with_wavenumber(grid: &'a FieldGrid, wavenumber: f64) -> Result<Self> {
        if grid.nx() < 2 || grid.ny() < 2 {
            return Err(Error::Precondition("plane mesh needs a 2D grid".into()));
        }
        Ok(PlaneMesh { grid, wavenumber })
    }

    pub fn grid(&self) -> &FieldGrid {
        self.grid
    }
}

impl NodalMesh for PlaneMesh<'_> {
    fn vertex_count(&self) -> usize {
        self.grid.values.len()
    }

    fn value(&self, v: usize) -> f64 {
        self.grid.values[v]
    }

    fn face_count(&self) -> usize {
        (self.grid.nx() - 1) * (self.grid.ny() - 1)
    }

    fn face(&self, f: usize, out: &mut [u32; 4]) -> usize {
        let nx = self.grid.nx();
        let (ix, iy) = (f % (nx - 1), f / (nx - 1));
        let v = (iy * nx + ix) as u32;
        let nx = nx as u32;
        *out = [v, v + 1, v + 1 + nx, v + nx];
        4
    }

    fn position(&self, v: usize) -> [f64; 3] {
        let nx = self.grid.nx();
        let p = self.grid.spec.point(v % nx, v / nx);
        [p[0], p[1], 0.0]
    }

    fn weight(&self, _v: usize) -> f64 {
        self.grid.spec.spacing * self.grid.spec.spacing
    }

    fn on_window_boundary(&self, v: usize) -> bool {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let (ix, iy) = (v % nx, v / nx);
        if ix == 0 || iy == 0 || ix == nx - 1 || iy == ny - 1 {
            return true;
        }
        let p = self.grid.spec.point(ix, iy);
        p[0].hypot(p[1]) >= self.grid.window_radius
    }

    fn kind(&self) -> MeshKind {
        MeshKind::Planar {
            window_radius: self.grid.window_radius,
        }
    }

    fn resolution(&self) -> Option<f64> {
        Some(self.grid.spec.spacing * self.wavenumber)
    }
}

/// Sphere grids: ring vertices `ring * n_lon + j`, then north and south pole.
pub struct SphereMesh<'a> {
    grid: &'a SphereGrid,
}

impl<'a> SphereMesh<'a> {
    pub fn new(grid: &'a SphereGrid) -> Self {
        SphereMesh { grid }
    }

    pub fn north(&self) -> usize {
        self.grid.n_lat * self.grid.n_lon
    }

    pub fn south(&self) -> usize {
        self.north() + 1
    }
}

impl NodalMesh for SphereMesh<'_> {
    fn vertex_count(&self) -> usize {
        self.grid.values.len() + 2
    }

    fn value(&self, v: usize) -> f64 {
        let n = self.grid.values.len();
        if v < n {
            self.grid.values[v]
        } else if v == n {
            self.grid.north
        } else {
            self.grid.south
        }
    }

    fn face_count(&self) -> usize {
        (self.grid.n_lat + 1) * self.grid.n_lon
    }

    fn face(&self, f: usize, out: &mut [u32; 4]) -> usize {
        let (nl, nn) = (self.grid.n_lat, self.grid.n_lon);
        let id = |i: usize, j: usize| (i * nn + j % nn) as u32;
        let quads = (nl - 1) * nn;
        if f < quads {
            let (i, j) = (f / nn, f % nn);
            *out = [id(i, j), id(i, j + 1), id(i + 1, j + 1), id(i + 1, j)];
            4
        } else if f < quads + nn {
            let j = f - quads;
            *out = [self.north() as u32, id(0, j + 1), id(0, j), 0];
            3
        } else {
            let j = f - quads - nn;
            *out = [self.south() as u32, id(nl - 1, j), id(nl - 1, j + 1), 0];
            3
        }
    }

    fn position(&self, v: usize) -> [f64; 3] {
        if v == self.north() {
            return [0.0, 0.0, 1.0];
        }
        if v == self.south() {
            return [0.0, 0.0, -1.0];
        }
        let (i, j) = (v / self.grid.n_lon, v % self.grid.n_lon);
        let (st, ct) = self.grid.theta(i).sin_cos();
        let (sp, cp) = self.grid.phi(j).sin_cos();
        [st * cp, st * sp, ct]
    }

    fn weight(&self, v: usize) -> f64 {
        let dtheta = PI / (self.grid.n_lat + 1) as f64;
        if v >= self.north() {
            TAU * (1.0 - (dtheta / 2.0).cos())
        } else {
            let i = v / self.grid.n_lon;
            self.grid.theta(i).sin() * dtheta * TAU / self.grid.n_lon as f64
        }
    }

    fn on_window_boundary(&self, _v: usize) -> bool {
        false
    }

    fn kind(&self) -> MeshKind {
        MeshKind::Closed
    }

    fn resolution(&self) -> Option<f64> {
        None
    }

    fn root_vertex(&self) -> usize {
        self.south()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Every directed mesh edge must appear reversed in exactly one other face.
    fn assert_oriented(mesh: &dyn NodalMesh) {
        use std::collections::HashMap;
        let mut seen: HashMap<(u32, u32), usize> = HashMap::new();
        let mut buf = [0u32; 4];
        for f in 0..mesh.face_count() {
            let k = mesh.face(f, &mut buf);
            for i in 0..k {
                *seen.entry((buf[i], buf[(i + 1) % k])).or_default() += 1;
            }
        }
        for (&(a, b), &c) in &seen {
            assert_eq!(c, 1, "edge {a}->{b} repeated");
            assert_eq!(seen.get(&(b, a)), Some(&1), "edge {a}->{b} has no twin");
        }
    }

    #[test]
    fn sphere_mesh_is_closed_and_oriented() {
        let g = SphereGrid {
            n_lat: 5,
            n_lon: 8,
            values: vec![1.0; 40],
            north: 1.0,
            south: 1.0,
            resolution_warning: false,
        };
        let m = SphereMesh::new(&g);
        assert_oriented(&m);
        // Euler characteristic of the sphere
        let v = m.vertex_count() as i64;
        let f = m.face_count() as i64;
        let mut edges = std::collections::HashSet::new();
        let mut buf = [0u32; 4];
        for fi in 0..m.face_count() {
            let k = m.face(fi, &mut buf);
            for i in 0..k {
                let (a, b) = (buf[i], buf[(i + 1) % k]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        assert_eq!(v - edges.len() as i64 + f, 2);
        let total: f64 = (0..m.vertex_count()).map(|i| m.weight(i)).sum();
        assert!((total - 4.0 * PI).abs() < 0.2);
    }

    #[test]
    fn plane_faces_are_counter_clockwise() {
        let spec = crate::field::GridSpec::covering_ball(2.0, 0.5);
        let g = FieldGrid::from_fn(spec, 2.0, |_| 1.0);
        let m = PlaneMesh::new(&g).unwrap();
        let mut buf = [0u32; 4];
        for f in 0..m.face_count() {
            m.face(f, &mut buf);
            let pts: Vec<[f64; 3]> = buf.iter().map(|&v| m.position(v as usize)).collect();
            assert!(geometry::signed_area(&pts) > 0.0);
        }
    }
}
