use super::{MeshKind, NodalMesh, UnionFind, MAX_UNIT_SPACING};
use crate::error::{Error, Result};

/// Relative size of the perturbation applied to exact zeros.
pub const TIE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default)]
pub struct LabelOptions {
    /// Accept grids coarser than 8 points per unit wavelength.
    pub allow_coarse: bool,
}

/// Sign components of the mesh vertices. Each vertex stands for the cell of
/// the dual mesh around it.
#[derive(Debug, Clone)]
pub struct DomainLabeling {
    pub positive: Vec<bool>,
    pub component: Vec<u32>,
    pub domain_count: usize,
    pub domain_positive: Vec<bool>,
    pub domain_area: Vec<f64>,
    pub domain_touches_boundary: Vec<bool>,
    /// Value added to exact zeros before taking signs.
    pub tie_epsilon: f64,
}

impl DomainLabeling {
    /// Value used for sign decisions and interpolation.
    pub fn adjusted(&self, raw: f64) -> f64 {
        if raw == 0.0 {
            self.tie_epsilon
        } else {
            raw
        }
    }
}

/// Union-find labeling over same-sign mesh edges; in quadrilaterals with
/// alternating corner signs the diagonal whose sign matches the bilinear
/// centre value is joined as well.
pub fn label_domains(mesh: &dyn NodalMesh, opts: LabelOptions) -> Result<DomainLabeling> {
    if let (MeshKind::Planar { .. }, Some(h)) = (mesh.kind(), mesh.resolution()) {
        if h > MAX_UNIT_SPACING && !opts.allow_coarse {
            return Err(Error::Precondition(format!(
                "grid spacing {h} exceeds {MAX_UNIT_SPACING} (8 points per wavelength)"
            )));
        }
    }
    let n = mesh.vertex_count();
    let rms = ((0..n).map(|v| mesh.value(v).powi(2)).sum::<f64>() / n.max(1) as f64).sqrt();
    let tie = if rms > 0.0 { TIE_EPSILON * rms } else { TIE_EPSILON };
    let adj = |x: f64| if x == 0.0 { tie } else { x };
    let positive: Vec<bool> = (0..n).map(|v| adj(mesh.value(v)) > 0.0).collect();

    let mut uf = UnionFind::new(n);
    let mut f = [0u32; 4];
    for face in 0..mesh.face_count() {
        let k = mesh.face(face, &mut f);
        for i in 0..k {
            let (a, b) = (f[i], f[(i + 1) % k]);
            if positive[a as usize] == positive[b as usize] {
                uf.union(a, b);
            }
        }
        if k == 4 && is_saddle(&positive, &f) {
            let centre: f64 = f.iter().map(|&v| adj(mesh.value(v as usize))).sum::<f64>() / 4.0;
            let centre_positive = adj(centre) > 0.0;
            if positive[f[0] as usize] == centre_positive {
                uf.union(f[0], f[2]);
            } else {
                uf.union(f[1], f[3]);
            }
        }
    }

    let mut component = vec![u32::MAX; n];
    let mut root_label = vec![u32::MAX; n];
    let mut domain_positive = Vec::new();
    let mut domain_area = Vec::new();
    let mut domain_touches_boundary = Vec::new();
    for v in 0..n {
        let r = uf.find(v as u32) as usize;
        if root_label[r] == u32::MAX {
            root_label[r] = domain_positive.len() as u32;
            domain_positive.push(positive[v]);
            domain_area.push(0.0);
            domain_touches_boundary.push(false);
        }
        let d = root_label[r];
        component[v] = d;
        domain_area[d as usize] += mesh.weight(v);
        if mesh.on_window_boundary(v) {
            domain_touches_boundary[d as usize] = true;
        }
    }
    Ok(DomainLabeling {
        positive,
        component,
        domain_count: domain_positive.len(),
        domain_positive,
        domain_area,
        domain_touches_boundary,
        tie_epsilon: tie,
    })
}

pub(crate) fn is_saddle(positive: &[bool], f: &[u32; 4]) -> bool {
    let s: [bool; 4] = [0, 1, 2, 3].map(|i| positive[f[i] as usize]);
    s[0] == s[2] && s[1] == s[3] && s[0] != s[1]
}
