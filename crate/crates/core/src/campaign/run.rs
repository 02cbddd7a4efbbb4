use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{hex, Mode, Precision, RunConfig};
use crate::construct::{realize_and_verify_in, realize_with_sweep, SweepOutcome};
use crate::error::{Error, Result};
use crate::field::{
    draw_plane_waves, eval_field_single, eval_field_with_budget, FieldGrid, GridSpec, DEFAULT_MAX_GRID_POINTS,
};
use crate::kacrice::{
    count_sign_changes, nodal_length_density_2d, nodal_length_in_disk, zero_density_1d, RiceComparison,
};
use crate::measures::{
    accumulate, merge, ns_constant_estimate, tail_exponent, Accumulator, Diagnostics, NsEstimate,
    SampleContribution, TailFit,
};
use crate::rng::{stream_key, StreamTag};
use crate::sphere::{draw_spherical, eval_sphere_grid, grid_size_for, SphereGrid};
use crate::topology::{
    build_forest, enumerate_rooted_trees, label_domains, trace_curves, LabelOptions, NestingForest, PlaneMesh,
    RootedTreeCode, SphereMesh,
};

pub const MU_GAMMA_FILE: &str = "mu_gamma.csv";
pub const MU_X_FILE: &str = "mu_x.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const ACCUMULATOR_FILE: &str = "accumulator.json";
pub const CONFIG_FILE: &str = "config.txt";
pub const KACRICE_FILE: &str = "kacrice.csv";
pub const CONSTRUCT_FILE: &str = "construct.json";

/// Stream key of one sample, so a single sample can be regenerated alone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSeed {
    pub index: u64,
    pub stream_key: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub mean_sample_seconds: f64,
    pub threads: usize,
}

/// Provenance of a run. Timing differs between runs; every other output file
/// is a pure function of the configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub code_version: String,
    /// Full configuration including defaults.
    pub config: RunConfig,
    pub samples: Vec<SampleSeed>,
    pub timing: Timing,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructSummary {
    pub trees: usize,
    pub matched: usize,
}

/// Results derived from the accumulated state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mode: Mode,
    pub config_hash: String,
    pub n_samples: u64,
    /// Raw number of observed domains behind `mu_gamma`.
    pub n_domains: u64,
    pub n_curves: u64,
    pub mean_connectivity: Option<f64>,
    pub mean_connectivity_stderr: Option<f64>,
    pub ns_constant: Option<NsEstimate>,
    pub gamma_hat: Option<TailFit>,
    /// Mean number of nodal domains per sample, all domains included.
    pub mean_domain_count: Option<f64>,
    pub handshake_failures: u64,
    pub tree_identity_failures: u64,
    pub diagnostics: Diagnostics,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kacrice: Option<RiceComparison>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub construct: Option<ConstructSummary>,
    pub warnings: Vec<String>,
}

impl Summary {
    fn empty(cfg: &RunConfig) -> Self {
        Summary {
            mode: cfg.mode,
            config_hash: cfg.config_hash(),
            n_samples: 0,
            n_domains: 0,
            n_curves: 0,
            mean_connectivity: None,
            mean_connectivity_stderr: None,
            ns_constant: None,
            gamma_hat: None,
            mean_domain_count: None,
            handshake_failures: 0,
            tree_identity_failures: 0,
            diagnostics: Diagnostics::default(),
            kacrice: None,
            construct: None,
            warnings: Vec::new(),
        }
    }
}

/// In-memory result of [`run_campaign`].
#[derive(Debug, Clone)]
pub struct CampaignResult {
    pub manifest: RunManifest,
    pub summary: Summary,
    /// Present for plane and sphere campaigns.
    pub accumulator: Option<Accumulator>,
    /// Kac-Rice campaigns: `(sample, density)`.
    pub densities: Vec<(u64, f64)>,
    /// Construct campaigns.
    pub outcomes: Vec<SweepOutcome>,
}

/// Field of plane sample `index` on the campaign grid.
pub fn plane_sample_grid(cfg: &RunConfig, index: u64) -> Result<FieldGrid> {
    let waves = draw_plane_waves(&cfg.spectral_params()?, index)?;
    let spec = GridSpec::covering_ball(cfg.radius, cfg.spacing);
    match cfg.precision {
        Precision::Single => eval_field_single(&waves, spec, DEFAULT_MAX_GRID_POINTS),
        Precision::Double => eval_field_with_budget(&waves, spec, false, DEFAULT_MAX_GRID_POINTS),
    }
}

/// Nesting forest of plane sample `index`.
pub fn plane_sample_forest(cfg: &RunConfig, index: u64) -> Result<(FieldGrid, NestingForest)> {
    let grid = plane_sample_grid(cfg, index)?;
    let forest = {
        let mesh = PlaneMesh::new(&grid)?;
        let labels = label_domains(&mesh, LabelOptions::default())?;
        let curves = trace_curves(&mesh, &labels)?;
        build_forest(&mesh, &labels, curves)?
    };
    Ok((grid, forest))
}

pub fn sphere_sample_grid(cfg: &RunConfig, index: u64) -> Result<SphereGrid> {
    let sample = draw_spherical(&cfg.sphere_params(), index)?;
    let (n_lat, n_lon) = grid_size_for(cfg.t, cfg.points_per_wavelength);
    eval_sphere_grid(&sample, n_lat, n_lon)
}

pub fn sphere_sample_forest(cfg: &RunConfig, index: u64) -> Result<(SphereGrid, NestingForest)> {
    let grid = sphere_sample_grid(cfg, index)?;
    let forest = {
        let mesh = SphereMesh::new(&grid);
        let labels = label_domains(&mesh, LabelOptions::default())?;
        let curves = trace_curves(&mesh, &labels)?;
        build_forest(&mesh, &labels, curves)?
    };
    Ok((grid, forest))
}

fn sample_contribution(cfg: &RunConfig, index: u64) -> Result<SampleContribution> {
    let forest = match cfg.mode {
        Mode::Plane => plane_sample_forest(cfg, index)?.1,
        Mode::Sphere => sphere_sample_forest(cfg, index)?.1,
        _ => unreachable!("only forest campaigns accumulate"),
    };
    accumulate(&forest, index, cfg.seed, cfg.edge_correction, cfg.diagnostic_params())
}

fn stream_tag(mode: Mode) -> StreamTag {
    match mode {
        Mode::Sphere => StreamTag::SphereCoefficients,
        _ => StreamTag::PlaneWaves,
    }
}

/// Runs `f` over the indices on the current rayon pool; results come back in
/// index order whatever the thread count.
fn par_samples<T: Send>(indices: &[u64], f: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    let total = indices.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    indices
        .par_iter()
        .map(|&i| {
            let out = f(i);
            let k = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
            if total >= 10 && k % (total / 10) == 0 {
                log::info!("{k}/{total} samples");
            }
            out
        })
        .collect()
}

/// Derives the summary of a plane or sphere campaign from its accumulator.
pub fn summarize(cfg: &RunConfig, acc: &Accumulator) -> Summary {
    let mut s = Summary::empty(cfg);
    s.n_samples = acc.n_samples() as u64;
    s.n_domains = acc.mu_gamma.total;
    s.n_curves = acc.mu_x.total;
    s.diagnostics = acc.diagnostics;
    if acc.n_samples() == 0 {
        s.warnings.push("no samples requested; measures are empty".into());
        return s;
    }
    if !acc.mu_gamma.is_empty() {
        let (m, se) = acc.mu_gamma.mean_with_stderr();
        s.mean_connectivity = Some(m);
        s.mean_connectivity_stderr = Some(se);
    } else {
        s.warnings.push("no countable domains were observed".into());
    }
    let reports = acc.report_list();
    s.ns_constant = ns_constant_estimate(&reports).ok();
    match tail_exponent(&acc.mu_gamma, cfg.m_min, cfg.bootstrap, cfg.seed) {
        Ok(t) => s.gamma_hat = Some(t),
        Err(e) => s.warnings.push(format!("tail exponent unavailable: {e}")),
    }
    s.mean_domain_count = Some(reports.iter().map(|r| r.n_domains as f64).sum::<f64>() / reports.len() as f64);
    s.handshake_failures = reports.iter().filter(|r| !r.handshake_ok).count() as u64;
    s.tree_identity_failures = reports.iter().filter(|r| r.tree_identity_ok == Some(false)).count() as u64;
    if s.handshake_failures + s.tree_identity_failures > 0 {
        s.warnings.push(format!(
            "structural identities failed on {} samples",
            s.handshake_failures + s.tree_identity_failures
        ));
    }
    s
}

/// Executes the campaign described by `cfg` and writes its outputs into `cfg.out`.
pub fn run_campaign(cfg: &RunConfig) -> Result<CampaignResult> {
    let result = compute_campaign(cfg)?;
    write_outputs(cfg, &result)?;
    Ok(result)
}

/// Same as [`run_campaign`] without touching the filesystem (except for
/// failure images of construct runs, which go to `cfg.out`).
pub fn compute_campaign(cfg: &RunConfig) -> Result<CampaignResult> {
    cfg.validate()?;
    let start = Instant::now();
    let indices = cfg.sample_indices();
    let mut densities = Vec::new();
    let mut outcomes = Vec::new();
    let (summary, accumulator) = match cfg.mode {
        Mode::Plane | Mode::Sphere => {
            let parts = par_samples(&indices, |i| sample_contribution(cfg, i))?;
            let mut acc = Accumulator::new(cfg.config_key());
            for p in parts {
                acc.add_sample(p)?;
            }
            (summarize(cfg, &acc), Some(acc))
        }
        Mode::Kacrice => {
            let per = par_samples(&indices, |i| kacrice_sample(cfg, i))?;
            let analytic = if cfg.dim == 1 {
                zero_density_1d(&cfg.spectral_params()?)?
            } else {
                nodal_length_density_2d(&cfg.spectral_params()?)?
            };
            let mut s = Summary::empty(cfg);
            s.n_samples = per.len() as u64;
            if per.is_empty() {
                s.warnings.push("no samples requested; measures are empty".into());
            } else {
                s.kacrice = Some(RiceComparison::from_samples(analytic, &per));
            }
            densities = indices.iter().copied().zip(per).collect();
            (s, None)
        }
        Mode::Construct => {
            outcomes = construct_targets(cfg)?;
            let mut s = Summary::empty(cfg);
            s.construct = Some(ConstructSummary {
                trees: outcomes.len(),
                matched: outcomes.iter().filter(|o| o.matched_at.is_some()).count(),
            });
            for o in outcomes.iter().filter(|o| o.matched_at.is_none()) {
                s.warnings.push(format!("tree {} was not realized", o.target));
            }
            (s, None)
        }
    };
    let elapsed = start.elapsed().as_secs_f64();
    let tag = stream_tag(cfg.mode);
    let samples = match cfg.mode {
        Mode::Construct => Vec::new(),
        _ => indices
            .iter()
            .map(|&i| SampleSeed {
                index: i,
                stream_key: hex(&stream_key(cfg.seed, i, tag)),
            })
            .collect(),
    };
    let manifest = RunManifest {
        config_hash: cfg.config_hash(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        samples,
        timing: Timing {
            total_seconds: elapsed,
            mean_sample_seconds: if indices.is_empty() { 0.0 } else { elapsed / indices.len() as f64 },
            threads: rayon::current_num_threads(),
        },
        outputs: output_files(cfg.mode),
        warnings: summary.warnings.clone(),
    };
    Ok(CampaignResult {
        manifest,
        summary,
        accumulator,
        densities,
        outcomes,
    })
}

/// Zeros per unit length (1D) or nodal length per unit area (2D) of one sample.
pub fn kacrice_sample(cfg: &RunConfig, index: u64) -> Result<f64> {
    let params = cfg.spectral_params()?;
    let waves = draw_plane_waves(&params, index)?;
    if cfg.dim == 1 {
        let spec = GridSpec::covering_interval(cfg.radius, cfg.spacing);
        let g = eval_field_with_budget(&waves, spec, false, DEFAULT_MAX_GRID_POINTS)?;
        let length = cfg.spacing * (g.values.len() - 1) as f64;
        Ok(count_sign_changes(&g.values) as f64 / length)
    } else {
        let (_, forest) = plane_sample_forest(cfg, index)?;
        let r = forest.window_radius().unwrap_or(cfg.radius);
        Ok(nodal_length_in_disk(&forest.curves, r) / (std::f64::consts::PI * r * r))
    }
}

fn construct_targets(cfg: &RunConfig) -> Result<Vec<SweepOutcome>> {
    let targets: Vec<RootedTreeCode> = match &cfg.tree {
        Some(code) => vec![RootedTreeCode::parse(code)?],
        None => (1..=cfg.max_vertices).flat_map(enumerate_rooted_trees).collect(),
    };
    std::fs::create_dir_all(&cfg.out)?;
    let dump = Some(cfg.out.as_path());
    let found = targets
        .par_iter()
        .map(|t| match cfg.epsilon {
            None => realize_with_sweep(t, dump),
            Some(eps) => {
                let got = realize_and_verify_in(t, eps, dump);
                if let Err(e) = &got {
                    log::warn!("{e}");
                }
                let code = got.as_ref().ok().map(|r| r.code.code.clone());
                SweepOutcome {
                    target: t.clone(),
                    matched_at: got.ok().filter(|r| r.matched).map(|_| eps),
                    tried: vec![(eps, code)],
                }
            }
        })
        .collect();
    Ok(found)
}

fn output_files(mode: Mode) -> Vec<String> {
    let mut v: Vec<&str> = match mode {
        Mode::Plane | Mode::Sphere => vec![MU_GAMMA_FILE, MU_X_FILE, ACCUMULATOR_FILE],
        Mode::Kacrice => vec![KACRICE_FILE],
        Mode::Construct => vec![CONSTRUCT_FILE],
    };
    v.extend([SUMMARY_FILE, CONFIG_FILE, MANIFEST_FILE]);
    v.into_iter().map(String::from).collect()
}

/// Writes `bytes` to `dir/name` through a temporary file and a rename, so
/// readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let path = dir.join(name);
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, &path)?;
    Ok(path)
}

fn measure_csv<K: Ord + Clone + ToString>(header: [&str; 3], rows: Vec<(K, u64, f64)>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for (k, c, p) in rows {
        w.write_record([k.to_string(), c.to_string(), p.to_string()])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn pretty<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    Ok(s)
}

fn write_outputs(cfg: &RunConfig, r: &CampaignResult) -> Result<()> {
    let dir = &cfg.out;
    std::fs::create_dir_all(dir)?;
    if let Some(acc) = &r.accumulator {
        write_atomic(dir, MU_GAMMA_FILE, &measure_csv(["key", "count", "probability"], acc.mu_gamma.rows())?)?;
        write_atomic(dir, MU_X_FILE, &measure_csv(["code", "count", "probability"], acc.mu_x.rows())?)?;
        write_atomic(dir, ACCUMULATOR_FILE, &pretty(acc)?)?;
    }
    match cfg.mode {
        Mode::Kacrice => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["sample", "density"])?;
            for (i, d) in &r.densities {
                w.write_record([i.to_string(), d.to_string()])?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            write_atomic(dir, KACRICE_FILE, &bytes)?;
        }
        Mode::Construct => {
            write_atomic(dir, CONSTRUCT_FILE, &pretty(&r.outcomes)?)?;
        }
        _ => {}
    }
    write_atomic(dir, SUMMARY_FILE, &pretty(&r.summary)?)?;
    write_atomic(dir, CONFIG_FILE, cfg.to_kv_string().as_bytes())?;
    write_atomic(dir, MANIFEST_FILE, &pretty(&r.manifest)?)?;
    Ok(())
}

/// Merges the accumulators of shard runs into `out`, producing the same
/// measure and summary files as one run over all samples.
pub fn merge_shards(shard_dirs: &[PathBuf], out: &Path) -> Result<CampaignResult> {
    if shard_dirs.is_empty() {
        return Err(Error::Precondition("nothing to merge".into()));
    }
    let mut acc: Option<Accumulator> = None;
    let mut cfg: Option<RunConfig> = None;
    let mut samples = Vec::new();
    let mut total_seconds = 0.0;
    for d in shard_dirs {
        let m: RunManifest = serde_json::from_slice(&std::fs::read(d.join(MANIFEST_FILE))?)?;
        let a: Accumulator = serde_json::from_slice(&std::fs::read(d.join(ACCUMULATOR_FILE))?)?;
        if a.config_key != m.config.config_key() {
            return Err(Error::Malformed(format!("{}: accumulator does not match its manifest", d.display())));
        }
        samples.extend(m.samples);
        total_seconds += m.timing.total_seconds;
        acc = Some(match acc {
            None => a,
            Some(prev) => merge(&prev, &a)?,
        });
        cfg.get_or_insert(m.config);
    }
    let acc = acc.expect("at least one shard");
    let mut cfg = cfg.expect("at least one shard");
    cfg.shard_index = 0;
    cfg.shard_count = 1;
    cfg.out = out.to_path_buf();
    samples.sort_by_key(|s| s.index);
    if (acc.n_samples() as u64) < cfg.samples {
        log::warn!("merged {} of {} samples", acc.n_samples(), cfg.samples);
    }
    let summary = summarize(&cfg, &acc);
    let n = samples.len().max(1) as f64;
    let manifest = RunManifest {
        config_hash: cfg.config_hash(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        samples,
        timing: Timing {
            total_seconds,
            mean_sample_seconds: total_seconds / n,
            threads: rayon::current_num_threads(),
        },
        outputs: output_files(cfg.mode),
        warnings: summary.warnings.clone(),
    };
    let result = CampaignResult {
        manifest,
        summary,
        accumulator: Some(acc),
        densities: Vec::new(),
        outcomes: Vec::new(),
    };
    write_outputs(&cfg, &result)?;
    Ok(result)
}
