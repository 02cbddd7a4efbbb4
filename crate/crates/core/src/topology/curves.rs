use std::collections::HashMap;

use super::geometry::{diameter, dist3, polyline_length, signed_area};
use super::label::is_saddle;
use super::{DomainLabeling, MeshKind, NodalMesh};
use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct NodalCurve {
    pub id: u32,
    /// Zero crossings on mesh edges, traversed with the positive side on the left.
    pub polyline: Vec<[f64; 3]>,
    pub closed: bool,
    pub plus_domain: u32,
    pub minus_domain: u32,
    /// `(outside, inside)`; for clipped curves the order is `(minus, plus)`.
    pub adjacent: (u32, u32),
    pub clipped: bool,
    pub length: f64,
    /// Area of the region inside the curve; zero for clipped curves.
    pub enclosed_area: f64,
    pub diameter: f64,
}

impl NodalCurve {
    pub fn outside(&self) -> u32 {
        self.adjacent.0
    }

    pub fn inside(&self) -> u32 {
        self.adjacent.1
    }

    /// Largest distance of a polyline point from the origin.
    pub fn max_radius(&self) -> f64 {
        self.polyline.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max)
    }
}

struct Crossings {
    plus: Vec<u32>,
    minus: Vec<u32>,
    index: HashMap<u64, u32>,
    next: Vec<u32>,
    prev: Vec<u32>,
}

impl Crossings {
    fn edge(&mut self, a: u32, b: u32, positive: &[bool]) -> u32 {
        let key = ((a.min(b) as u64) << 32) | a.max(b) as u64;
        let n = self.plus.len() as u32;
        let id = *self.index.entry(key).or_insert(n);
        if id == n {
            let (p, m) = if positive[a as usize] { (a, b) } else { (b, a) };
            self.plus.push(p);
            self.minus.push(m);
            self.next.push(NONE);
            self.prev.push(NONE);
        }
        id
    }

    fn link(&mut self, from: u32, to: u32) -> Result<()> {
        if self.next[from as usize] != NONE || self.prev[to as usize] != NONE {
            return Err(Error::Invariant(format!(
                "crossing edge linked twice ({from} -> {to}); mesh is not consistently oriented"
            )));
        }
        self.next[from as usize] = to;
        self.prev[to as usize] = from;
        Ok(())
    }
}

/// Marching-squares style tracing of the zero set, one segment per face
/// (two in saddle quads, split according to the labeling's centre rule).
pub fn trace_curves(mesh: &dyn NodalMesh, labeling: &DomainLabeling) -> Result<Vec<NodalCurve>> {
    let positive = &labeling.positive;
    if positive.len() != mesh.vertex_count() {
        return Err(Error::Invariant("labeling does not match mesh".into()));
    }
    let mut cx = Crossings {
        plus: Vec::new(),
        minus: Vec::new(),
        index: HashMap::new(),
        next: Vec::new(),
        prev: Vec::new(),
    };
    let mut f = [0u32; 4];
    for face in 0..mesh.face_count() {
        let k = mesh.face(face, &mut f);
        let s = |i: usize| positive[f[i % k] as usize];
        if !(0..k).any(|i| s(i) != s(i + 1)) {
            continue;
        }
        if k == 4 && is_saddle(positive, &f) {
            let e: Vec<u32> = (0..4).map(|i| cx.edge(f[i], f[(i + 1) % 4], positive)).collect();
            let centre: f64 = f.iter().map(|&v| labeling.adjusted(mesh.value(v as usize))).sum::<f64>() / 4.0;
            let centre_positive = labeling.adjusted(centre) > 0.0;
            for i in 0..4 {
                if s(i) == centre_positive {
                    continue;
                }
                // corner i is cut off from the centre
                let before = e[(i + 3) % 4];
                let after = e[i];
                if centre_positive {
                    cx.link(before, after)?;
                } else {
                    cx.link(after, before)?;
                }
            }
        } else {
            let mut out = NONE;
            let mut inn = NONE;
            for i in 0..k {
                if s(i) && !s(i + 1) {
                    out = cx.edge(f[i], f[(i + 1) % k], positive);
                } else if !s(i) && s(i + 1) {
                    inn = cx.edge(f[i], f[(i + 1) % k], positive);
                }
            }
            cx.link(out, inn)?;
        }
    }

    let n = cx.plus.len();
    let mut visited = vec![false; n];
    let mut chains: Vec<(Vec<u32>, bool)> = Vec::new();
    for start in 0..n {
        if cx.prev[start] == NONE && !visited[start] {
            let mut chain = Vec::new();
            let mut e = start as u32;
            while e != NONE {
                if visited[e as usize] {
                    return Err(Error::Invariant("open chain revisits an edge".into()));
                }
                visited[e as usize] = true;
                chain.push(e);
                e = cx.next[e as usize];
            }
            chains.push((chain, false));
        }
    }
    for start in 0..n {
        if !visited[start] {
            let mut chain = Vec::new();
            let mut e = start as u32;
            loop {
                if e == NONE {
                    return Err(Error::Invariant("cycle broken".into()));
                }
                visited[e as usize] = true;
                chain.push(e);
                e = cx.next[e as usize];
                if e == start as u32 {
                    break;
                }
            }
            chains.push((chain, true));
        }
    }

    let kind = mesh.kind();
    let mut curves = Vec::with_capacity(chains.len());
    for (id, (chain, closed)) in chains.into_iter().enumerate() {
        let plus_domain = labeling.component[cx.plus[chain[0] as usize] as usize];
        let minus_domain = labeling.component[cx.minus[chain[0] as usize] as usize];
        let mut polyline = Vec::with_capacity(chain.len());
        for &e in &chain {
            let (a, b) = (cx.plus[e as usize] as usize, cx.minus[e as usize] as usize);
            if labeling.component[a] != plus_domain || labeling.component[b] != minus_domain {
                return Err(Error::Invariant(format!("curve {id} separates more than two domains")));
            }
            let (fa, fb) = (labeling.adjusted(mesh.value(a)), labeling.adjusted(mesh.value(b)));
            let t = fa / (fa - fb);
            let (pa, pb) = (mesh.position(a), mesh.position(b));
            polyline.push([0, 1, 2].map(|i| pa[i] + t * (pb[i] - pa[i])));
        }
        if plus_domain == minus_domain {
            return Err(Error::Invariant(format!("curve {id} has the same domain on both sides")));
        }
        let length = polyline_length(&polyline, closed);
        let mut curve = NodalCurve {
            id: id as u32,
            polyline,
            closed,
            plus_domain,
            minus_domain,
            adjacent: (minus_domain, plus_domain),
            clipped: !closed,
            length,
            enclosed_area: 0.0,
            diameter: 0.0,
        };
        match kind {
            MeshKind::Planar { window_radius } => {
                let flat: Vec<[f64; 2]> = curve.polyline.iter().map(|p| [p[0], p[1]]).collect();
                curve.diameter = diameter(&flat);
                curve.clipped = !closed || curve.max_radius() >= window_radius;
                if closed {
                    let a = signed_area(&curve.polyline);
                    curve.enclosed_area = a.abs();
                    // positive side on the left: counter-clockwise curves enclose the + domain
                    if a < 0.0 {
                        curve.adjacent = (plus_domain, minus_domain);
                    }
                }
            }
            MeshKind::Closed => {
                let mut lo = [f64::INFINITY; 3];
                let mut hi = [f64::NEG_INFINITY; 3];
                for p in &curve.polyline {
                    for i in 0..3 {
                        lo[i] = lo[i].min(p[i]);
                        hi[i] = hi[i].max(p[i]);
                    }
                }
                curve.diameter = dist3(lo, hi);
            }
        }
        curves.push(curve);
    }
    Ok(curves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FieldGrid, GridSpec};
    use crate::topology::{label_domains, LabelOptions, PlaneMesh};
    use std::f64::consts::PI;

    fn extract(g: &FieldGrid) -> (DomainLabeling, Vec<NodalCurve>) {
        let m = PlaneMesh::new(g).unwrap();
        let l = label_domains(&m, LabelOptions { allow_coarse: true }).unwrap();
        let c = trace_curves(&m, &l).unwrap();
        (l, c)
    }

    #[test]
    fn single_bump() {
        let g = FieldGrid::from_fn(GridSpec::covering_ball(5.0, 0.1), 5.0, |x| 4.0 - x[0] * x[0] - x[1] * x[1]);
        let (l, c) = extract(&g);
        assert_eq!(l.domain_count, 2);
        assert_eq!(c.len(), 1);
        let island = l.component[g.values.len() / 2];
        let sea = l.component[0];
        assert!(!c[0].clipped && c[0].closed);
        assert_eq!(c[0].adjacent, (sea, island));
    }

    #[test]
    fn circle_geometry() {
        let rho = 3.0;
        let h = rho / 50.0;
        let g = FieldGrid::from_fn(GridSpec::covering_ball(5.0, h), 5.0, |x| rho * rho - x[0] * x[0] - x[1] * x[1]);
        let (_, c) = extract(&g);
        assert_eq!(c.len(), 1);
        let c = &c[0];
        assert!((c.length - 2.0 * PI * rho).abs() / (2.0 * PI * rho) < 0.01);
        assert!((c.enclosed_area - PI * rho * rho).abs() / (PI * rho * rho) < 0.01);
        assert!((c.diameter - 2.0 * rho).abs() < 2.0 * h);
    }

    #[test]
    fn negative_island_is_inside() {
        let g = FieldGrid::from_fn(GridSpec::covering_ball(5.0, 0.1), 5.0, |x| x[0] * x[0] + x[1] * x[1] - 4.0);
        let (l, c) = extract(&g);
        let hole = l.component[g.values.len() / 2];
        assert!(!l.domain_positive[hole as usize]);
        assert_eq!(c[0].inside(), hole);
        assert_eq!(c[0].minus_domain, hole);
    }

    #[test]
    fn strips_are_clipped() {
        let g = FieldGrid::from_fn(GridSpec::covering_ball(10.0, 0.1), 10.0, |x| 2f64.sqrt() * x[0].cos());
        let (_, c) = extract(&g);
        assert_eq!(c.len(), 6);
        assert!(c.iter().all(|c| c.clipped));
    }

    #[test]
    fn curve_near_rim_is_clipped() {
        // closed circle crossing the disk window but inside the square grid
        let g = FieldGrid::from_fn(GridSpec::covering_ball(5.0, 0.1), 5.0, |x| {
            1.0 - (x[0] - 3.8).powi(2) - (x[1] - 3.8).powi(2)
        });
        let (_, c) = extract(&g);
        assert_eq!(c.len(), 1);
        assert!(c[0].closed && c[0].clipped);
    }
}
