use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::diagnostics::{small_long_diagnostics, Diagnostics};
use super::EmpiricalMeasure;
use crate::error::{Error, Result};
use crate::topology::geometry::convex_hull;
use crate::topology::{tree_ends, MeshKind, NestingForest, NodalCurve};

/// How observations inside a finite window are weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeCorrection {
    /// Every fully observed atom counts once.
    None,
    /// Each fully observed atom is weighted by `|W| / |W eroded by its hull|`,
    /// the inverse chance that a random translate of it fits in the window.
    /// Large objects are otherwise under-represented.
    MilesLantuejoul,
}

/// Angular resolution of the erosion-area quadrature.
const EROSION_ANGLES: usize = 720;

/// Area of `{u : K + u inside B(R)}` for a point set `K` inside `B(R)`.
///
/// The set is an intersection of disks and star-shaped about 0, so its area
/// is `1/2 int rho(theta)^2 dtheta` with `rho` the nearest exit along each ray.
pub fn erosion_area(hull: &[[f64; 2]], radius: f64) -> f64 {
    let r2 = radius * radius;
    let mut acc = 0.0;
    for i in 0..EROSION_ANGLES {
        let (s, c) = (TAU * i as f64 / EROSION_ANGLES as f64).sin_cos();
        let mut rho = f64::INFINITY;
        for k in hull {
            let ek = c * k[0] + s * k[1];
            let kk = k[0] * k[0] + k[1] * k[1];
            rho = rho.min(-ek + (ek * ek - kk + r2).max(0.0).sqrt());
        }
        acc += 0.5 * rho.max(0.0).powi(2);
    }
    acc * TAU / EROSION_ANGLES as f64
}

/// Edge-correction weight of a closed curve in the disk window.
pub fn window_weight(curve: &NodalCurve, radius: f64) -> f64 {
    let flat: Vec<[f64; 2]> = curve.polyline.iter().map(|p| [p[0], p[1]]).collect();
    let hull = convex_hull(&flat);
    let a = erosion_area(&hull, radius);
    if a <= 0.0 {
        return super::empirical::MAX_WEIGHT;
    }
    (PI * radius * radius / a).min(super::empirical::MAX_WEIGHT)
}

/// Per-sample counts of nodal components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub sample_index: u64,
    pub seed: u64,
    pub dim: usize,
    /// `None` on closed surfaces.
    pub window_radius: Option<f64>,
    /// Components lying entirely in the window.
    pub n_components: u64,
    /// Components meeting the window.
    pub n_components_star: u64,
    pub volume: f64,
    pub n_domains: u64,
    pub n_interior_domains: u64,
    /// Sum of `m(omega)` over all domains equals twice the curve count.
    pub handshake_ok: bool,
    /// `|Omega| = |E| + 1`; only checked on closed surfaces.
    pub tree_identity_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleContribution {
    pub mu_gamma: EmpiricalMeasure<u32>,
    pub mu_x: EmpiricalMeasure<String>,
    pub report: CountReport,
    pub diagnostics: Diagnostics,
}

/// Settings for the per-sample diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticParams {
    pub xi: f64,
    pub d: f64,
}

impl Default for DiagnosticParams {
    fn default() -> Self {
        DiagnosticParams { xi: 1.0, d: 20.0 }
    }
}

/// Connectivities of interior domains and tree ends of countable curves.
pub fn accumulate(
    forest: &NestingForest,
    sample_index: u64,
    seed: u64,
    correction: EdgeCorrection,
    diag: DiagnosticParams,
) -> Result<SampleContribution> {
    let window = forest.window_radius();
    let weight_of = |c: &NodalCurve| match (correction, window) {
        (EdgeCorrection::MilesLantuejoul, Some(r)) => window_weight(c, r),
        _ => 1.0,
    };

    let mut mu_gamma = EmpiricalMeasure::new();
    let mut mu_x = EmpiricalMeasure::new();
    let ends = tree_ends(forest);
    let mut n_components = 0u64;
    for (c, end) in forest.curves.iter().zip(&ends) {
        if c.clipped {
            continue;
        }
        n_components += 1;
        let w = weight_of(c);
        if let Some(code) = end {
            mu_x.add_weighted(code.code.clone(), w);
        }
        // every bounded interior domain is the inside of exactly one curve
        if forest.interior[c.inside() as usize] {
            mu_gamma.add_weighted(forest.connectivity[c.inside() as usize], w);
        }
    }
    // on a closed surface the root domain has no enclosing curve
    if forest.kind == MeshKind::Closed {
        for &r in &forest.roots {
            mu_gamma.add(forest.connectivity[r as usize]);
        }
    }
    if mu_gamma.is_empty() {
        log::debug!("sample {sample_index}: no countable domains");
    }

    let n_components_star = match window {
        Some(r) => forest
            .curves
            .iter()
            .filter(|c| c.polyline.iter().any(|p| p[0].hypot(p[1]) < r))
            .count() as u64,
        None => forest.curves.len() as u64,
    };
    let handshake_ok = forest.connectivity.iter().map(|&m| m as u64).sum::<u64>() == 2 * forest.curves.len() as u64
        && (0..forest.domain_count as u32).map(|d| forest.degree(d)).sum::<usize>() == 2 * forest.edges.len();
    let tree_identity_ok = (forest.kind == MeshKind::Closed).then(|| forest.domain_count == forest.edges.len() + 1);
    let volume = match window {
        Some(r) => PI * r * r,
        None => 4.0 * PI,
    };
    let report = CountReport {
        sample_index,
        seed,
        dim: 2,
        window_radius: window,
        n_components,
        n_components_star,
        volume,
        n_domains: forest.domain_count as u64,
        n_interior_domains: forest.interior.iter().filter(|&&b| b).count() as u64,
        handshake_ok,
        tree_identity_ok,
    };
    Ok(SampleContribution {
        mu_gamma,
        mu_x,
        report,
        diagnostics: small_long_diagnostics(forest, diag.xi, diag.d),
    })
}

/// Mergeable campaign state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Accumulator {
    /// Canonical description of the configuration; merging requires equality.
    pub config_key: String,
    pub mu_gamma: EmpiricalMeasure<u32>,
    pub mu_x: EmpiricalMeasure<String>,
    pub reports: BTreeMap<u64, CountReport>,
    pub diagnostics: Diagnostics,
}

impl Accumulator {
    pub fn new(config_key: impl Into<String>) -> Self {
        Accumulator {
            config_key: config_key.into(),
            mu_gamma: EmpiricalMeasure::new(),
            mu_x: EmpiricalMeasure::new(),
            reports: BTreeMap::new(),
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn add_sample(&mut self, s: SampleContribution) -> Result<()> {
        if self.reports.contains_key(&s.report.sample_index) {
            return Err(Error::Precondition(format!("sample {} added twice", s.report.sample_index)));
        }
        self.mu_gamma.merge(&s.mu_gamma);
        self.mu_x.merge(&s.mu_x);
        self.diagnostics.merge(&s.diagnostics);
        self.reports.insert(s.report.sample_index, s.report);
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        self.reports.len()
    }

    pub fn report_list(&self) -> Vec<CountReport> {
        self.reports.values().cloned().collect()
    }
}

/// Atomwise sum of two accumulators over disjoint sample sets.
pub fn merge(a: &Accumulator, b: &Accumulator) -> Result<Accumulator> {
    if a.config_key != b.config_key {
        return Err(Error::Config(format!(
            "cannot merge accumulators of different configurations:\n  {}\n  {}",
            a.config_key, b.config_key
        )));
    }
    let mut out = a.clone();
    for (k, r) in &b.reports {
        if out.reports.insert(*k, r.clone()).is_some() {
            return Err(Error::Precondition(format!("sample {k} present in both accumulators")));
        }
    }
    out.mu_gamma.merge(&b.mu_gamma);
    out.mu_x.merge(&b.mu_x);
    out.diagnostics.merge(&b.diagnostics);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NsEstimate {
    /// Mean of `N_C / Vol(B(R))`.
    pub estimate: f64,
    pub stderr: f64,
    /// `estimate * (2 pi)^n / omega_n`.
    pub beta_hat: f64,
    pub beta_stderr: f64,
}

/// Volume of the unit ball in dimension 1 or 2.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        _ => PI,
    }
}

pub fn ns_constant_estimate(reports: &[CountReport]) -> Result<NsEstimate> {
    if reports.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "ns_constant_estimate needs at least 2 reports, got {}",
            reports.len()
        )));
    }
    let r0 = reports[0].window_radius;
    let dim = reports[0].dim;
    if reports.iter().any(|r| r.window_radius != r0 || r.dim != dim) {
        return Err(Error::Config("reports mix different window radii or dimensions".into()));
    }
    let xs: Vec<f64> = reports.iter().map(|r| r.n_components as f64 / r.volume).collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let stderr = (var / n).sqrt();
    let factor = TAU.powi(dim as i32) / unit_ball_volume(dim);
    Ok(NsEstimate {
        estimate: mean,
        stderr,
        beta_hat: mean * factor,
        beta_stderr: stderr * factor,
    })
}
