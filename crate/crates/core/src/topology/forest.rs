use std::collections::VecDeque;

use super::{canonical_code, DomainLabeling, MeshKind, NodalCurve, NodalMesh, RootedTree, RootedTreeCode, UnionFind};
use crate::error::{Error, Result};

/// Domains as vertices, closed in-window curves as edges.
#[derive(Debug, Clone)]
pub struct NestingForest {
    pub kind: MeshKind,
    pub domain_count: usize,
    pub curves: Vec<NodalCurve>,
    /// Curve ids of the forest edges (the non-clipped curves).
    pub edges: Vec<u32>,
    /// `m(omega)`: number of curves bounding each domain, clipped ones included.
    pub connectivity: Vec<u32>,
    /// Domain avoids the window boundary and all of its curves are non-clipped.
    pub interior: Vec<bool>,
    pub touches_boundary: Vec<bool>,
    pub domain_area: Vec<f64>,
    pub domain_positive: Vec<bool>,
    /// Boundary domains in a window, or the chosen root on a closed surface.
    pub roots: Vec<u32>,
    adj_start: Vec<u32>,
    adj: Vec<u32>,
}

impl NestingForest {
    /// Non-clipped curves bounding `domain`.
    pub fn edges_of(&self, domain: u32) -> &[u32] {
        let d = domain as usize;
        &self.adj[self.adj_start[d] as usize..self.adj_start[d + 1] as usize]
    }

    /// Forest degree of a domain.
    pub fn degree(&self, domain: u32) -> usize {
        self.edges_of(domain).len()
    }

    pub fn window_radius(&self) -> Option<f64> {
        match self.kind {
            MeshKind::Planar { window_radius } => Some(window_radius),
            MeshKind::Closed => None,
        }
    }

    /// Curves that are closed and lie inside the window.
    pub fn countable_curves(&self) -> impl Iterator<Item = &NodalCurve> {
        self.curves.iter().filter(|c| !c.clipped)
    }
}

pub fn build_forest(mesh: &dyn NodalMesh, labeling: &DomainLabeling, mut curves: Vec<NodalCurve>) -> Result<NestingForest> {
    let n = labeling.domain_count;
    let mut connectivity = vec![0u32; n];
    let mut has_clipped = vec![false; n];
    let mut degree = vec![0u32; n];
    let mut uf = UnionFind::new(n);
    let mut edges = Vec::new();
    for c in &curves {
        for d in [c.plus_domain, c.minus_domain] {
            if d as usize >= n {
                return Err(Error::Invariant(format!("curve {} names unknown domain {d}", c.id)));
            }
            connectivity[d as usize] += 1;
            if c.clipped {
                has_clipped[d as usize] = true;
            }
        }
        if !c.clipped {
            if !uf.union(c.plus_domain, c.minus_domain) {
                return Err(Error::Invariant(format!("nesting graph has a cycle through curve {}", c.id)));
            }
            degree[c.plus_domain as usize] += 1;
            degree[c.minus_domain as usize] += 1;
            edges.push(c.id);
        }
    }
    let mut adj_start = vec![0u32; n + 1];
    for d in 0..n {
        adj_start[d + 1] = adj_start[d] + degree[d];
    }
    let mut fill = adj_start.clone();
    let mut adj = vec![0u32; edges.len() * 2];
    for &e in &edges {
        let c = &curves[e as usize];
        for d in [c.plus_domain, c.minus_domain] {
            adj[fill[d as usize] as usize] = e;
            fill[d as usize] += 1;
        }
    }

    let kind = mesh.kind();
    let roots = match kind {
        MeshKind::Planar { .. } => (0..n as u32).filter(|&d| labeling.domain_touches_boundary[d as usize]).collect(),
        MeshKind::Closed => {
            let root = labeling.component[mesh.root_vertex()];
            orient_from_root(root, n, &adj_start, &adj, &mut curves, &labeling.domain_area)?;
            vec![root]
        }
    };
    let interior = (0..n)
        .map(|d| !labeling.domain_touches_boundary[d] && !has_clipped[d])
        .collect();
    Ok(NestingForest {
        kind,
        domain_count: n,
        curves,
        edges,
        connectivity,
        interior,
        touches_boundary: labeling.domain_touches_boundary.clone(),
        domain_area: labeling.domain_area.clone(),
        domain_positive: labeling.domain_positive.clone(),
        roots,
        adj_start,
        adj,
    })
}

/// On a closed surface the inside of a curve is the side away from the root.
fn orient_from_root(
    root: u32,
    n: usize,
    adj_start: &[u32],
    adj: &[u32],
    curves: &mut [NodalCurve],
    area: &[f64],
) -> Result<()> {
    let mut parent_curve = vec![u32::MAX; n];
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::from([root]);
    seen[root as usize] = true;
    while let Some(d) = queue.pop_front() {
        order.push(d);
        for &e in &adj[adj_start[d as usize] as usize..adj_start[d as usize + 1] as usize] {
            let c = &mut curves[e as usize];
            let other = if c.plus_domain == d { c.minus_domain } else { c.plus_domain };
            if !seen[other as usize] {
                seen[other as usize] = true;
                c.adjacent = (d, other);
                parent_curve[other as usize] = e;
                queue.push_back(other);
            }
        }
    }
    if order.len() != n {
        return Err(Error::Invariant(format!(
            "nesting graph on a closed surface is disconnected ({} of {n} domains reached)",
            order.len()
        )));
    }
    let mut subtree = area.to_vec();
    for &d in order.iter().rev() {
        let e = parent_curve[d as usize];
        if e != u32::MAX {
            let c = &mut curves[e as usize];
            c.enclosed_area = subtree[d as usize];
            subtree[c.adjacent.0 as usize] += subtree[d as usize];
        }
    }
    Ok(())
}

/// Rooted tree of the domains inside `curve_id`, rooted at the domain just inside.
pub fn tree_end(forest: &NestingForest, curve_id: u32) -> Result<RootedTreeCode> {
    let mut scratch = Scratch::new(forest.domain_count);
    tree_end_with(forest, curve_id, &mut scratch)
}

/// Tree ends of every curve; `None` where the curve is not countable.
pub fn tree_ends(forest: &NestingForest) -> Vec<Option<RootedTreeCode>> {
    let mut scratch = Scratch::new(forest.domain_count);
    forest
        .curves
        .iter()
        .map(|c| tree_end_with(forest, c.id, &mut scratch).ok())
        .collect()
}

struct Scratch {
    stamp: Vec<u32>,
    generation: u32,
    local: Vec<u32>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            stamp: vec![0; n],
            generation: 0,
            local: vec![0; n],
        }
    }
}

fn tree_end_with(forest: &NestingForest, curve_id: u32, s: &mut Scratch) -> Result<RootedTreeCode> {
    let curve = forest
        .curves
        .get(curve_id as usize)
        .ok_or_else(|| Error::Precondition(format!("no curve {curve_id}")))?;
    if curve.clipped {
        return Err(Error::NotCountable(format!("curve {curve_id} is clipped by the window")));
    }
    s.generation += 1;
    let g = s.generation;
    let root = curve.inside();
    let outside = curve.outside();
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    let mut queue = VecDeque::from([root]);
    s.stamp[root as usize] = g;
    s.local[root as usize] = 0;
    s.stamp[outside as usize] = g;
    while let Some(d) = queue.pop_front() {
        if !forest.interior[d as usize] {
            return Err(Error::NotCountable(format!(
                "inside of curve {curve_id} reaches the window boundary"
            )));
        }
        for &e in forest.edges_of(d) {
            if e == curve_id {
                continue;
            }
            let c = &forest.curves[e as usize];
            let other = if c.plus_domain == d { c.minus_domain } else { c.plus_domain };
            if s.stamp[other as usize] == g {
                continue;
            }
            if c.outside() != d {
                return Err(Error::Invariant(format!(
                    "curve {e} is oriented against the nesting below curve {curve_id}"
                )));
            }
            s.stamp[other as usize] = g;
            let id = children.len();
            s.local[other as usize] = id as u32;
            children.push(Vec::new());
            children[s.local[d as usize] as usize].push(id);
            queue.push_back(other);
        }
    }
    Ok(canonical_code(&RootedTree { children }))
}
