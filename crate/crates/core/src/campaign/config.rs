use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{SpectralParams, DEFAULT_WAVE_COUNT};
use crate::measures::{DiagnosticParams, EdgeCorrection};
use crate::sphere::{SphereEnsembleParams, DEFAULT_ETA_EXPONENT};
use crate::topology::MAX_UNIT_SPACING;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Plane,
    Sphere,
    Construct,
    Kacrice,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plane" => Ok(Mode::Plane),
            "sphere" => Ok(Mode::Sphere),
            "construct" => Ok(Mode::Construct),
            "kacrice" => Ok(Mode::Kacrice),
            _ => Err(Error::Config(format!("unknown mode {s:?}"))),
        }
    }
}

/// Arithmetic used for plane-wave sums in campaigns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    /// Products accumulated in `f32`; values only.
    Single,
    Double,
}

/// Everything that determines a campaign's outputs. Serialized names are the
/// keys of the `key = value` format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    /// Kac-Rice mode only; plane campaigns are two-dimensional.
    pub dim: usize,
    pub alpha: f64,
    #[serde(rename = "M")]
    pub wave_count: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "h")]
    pub spacing: f64,
    pub samples: u64,
    pub seed: u64,
    #[serde(rename = "T")]
    pub t: f64,
    pub eta_exponent: f64,
    /// Sphere grid resolution at the band edge.
    pub points_per_wavelength: f64,
    pub xi: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub edge_correction: EdgeCorrection,
    pub precision: Precision,
    pub m_min: u32,
    pub bootstrap: usize,
    /// Construct mode: one target tree; all trees up to `max_vertices` when absent.
    pub tree: Option<String>,
    pub max_vertices: usize,
    /// Construct mode: a single perturbation size instead of the sweep.
    pub epsilon: Option<f64>,
    /// This run handles the samples `i` with `i % shard_count == shard_index`.
    pub shard_index: u64,
    pub shard_count: u64,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Plane,
            dim: 2,
            alpha: 1.0,
            wave_count: DEFAULT_WAVE_COUNT,
            radius: 60.0,
            spacing: 0.15,
            samples: 50,
            seed: 0,
            t: 60.0,
            eta_exponent: DEFAULT_ETA_EXPONENT,
            points_per_wavelength: 8.0,
            xi: 1.0,
            d: 20.0,
            edge_correction: EdgeCorrection::MilesLantuejoul,
            precision: Precision::Single,
            m_min: 3,
            bootstrap: 200,
            tree: None,
            max_vertices: 4,
            epsilon: None,
            shard_index: 0,
            shard_count: 1,
            out: PathBuf::from("out"),
        }
    }
}

/// Keys that do not change what is computed, only where and in which piece.
const PLACEMENT_KEYS: [&str; 3] = ["out", "shard_index", "shard_count"];

fn parse_scalar(raw: &str) -> Value {
    let raw = raw.trim();
    if raw == "null" {
        return Value::Null;
    }
    if let Ok(b) = raw.parse::<bool>() {
        return Value::Bool(b);
    }
    if let Ok(u) = raw.parse::<u64>() {
        return Value::from(u);
    }
    if let Ok(f) = raw.parse::<f64>() {
        if f.is_finite() {
            return Value::from(f);
        }
    }
    let unquoted = raw
        .strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(raw);
    Value::String(unquoted.to_string())
}

impl RunConfig {
    /// Flat `key = value` text; `#` starts a comment, unknown keys are errors.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut map = Map::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got {line:?}", n + 1)))?;
            map.insert(k.trim().to_string(), parse_scalar(v));
        }
        Self::from_value(Value::Object(map))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_value(serde_json::from_str(text)?)
    }

    fn from_value(v: Value) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_value(v).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// JSON when the first non-blank character is `{`, key-value text otherwise.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if text.trim_start().starts_with('{') {
            Self::from_json_str(&text)
        } else {
            Self::from_kv_str(&text)
        }
    }

    /// Applies one `key=value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let mut v = serde_json::to_value(&*self)?;
        let obj = v.as_object_mut().expect("config serializes to an object");
        if !obj.contains_key(key) {
            return Err(Error::Config(format!("unknown config key {key:?}")));
        }
        obj.insert(key.to_string(), parse_scalar(value));
        *self = serde_json::from_value(v).map_err(|e| Error::Config(format!("{key}: {e}")))?;
        Ok(())
    }

    /// Every key with its value, sorted, one per line.
    pub fn to_kv_string(&self) -> String {
        let v = serde_json::to_value(self).expect("config serializes");
        let mut out = String::new();
        for (k, v) in v.as_object().expect("object") {
            let shown = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k} = {shown}\n"));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if self.wave_count == 0 {
            return bad("M must be positive".into());
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad(format!("R must be positive, got {}", self.radius));
        }
        if !(self.spacing > 0.0) {
            return bad(format!("h must be positive, got {}", self.spacing));
        }
        if self.mode == Mode::Plane && self.spacing > MAX_UNIT_SPACING {
            return bad(format!("h = {} exceeds pi/4 at unit wavenumber", self.spacing));
        }
        if self.mode == Mode::Kacrice && !(self.dim == 1 || self.dim == 2) {
            return bad(format!("dim must be 1 or 2, got {}", self.dim));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return bad(format!("T must be positive, got {}", self.t));
        }
        if !(self.points_per_wavelength > 0.0) {
            return bad("points_per_wavelength must be positive".into());
        }
        if self.m_min < 1 {
            return bad("m_min must be at least 1".into());
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0) {
                return bad(format!("epsilon must be positive, got {e}"));
            }
        }
        if self.shard_count == 0 || self.shard_index >= self.shard_count {
            return bad(format!("shard {} of {} does not exist", self.shard_index, self.shard_count));
        }
        if self.shard_count > 1 && matches!(self.mode, Mode::Construct | Mode::Kacrice) {
            return bad("only plane and sphere campaigns can be sharded".into());
        }
        Ok(())
    }

    /// Canonical JSON of the settings that determine the results, excluding
    /// output placement and sharding. Shards merge only when keys agree.
    pub fn config_key(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        let obj = v.as_object_mut().expect("object");
        for k in PLACEMENT_KEYS {
            obj.remove(k);
        }
        v.to_string()
    }

    /// SHA-256 of [`Self::config_key`], hex encoded.
    pub fn config_hash(&self) -> String {
        hex(&Sha256::digest(self.config_key().as_bytes()))
    }

    pub fn spectral_params(&self) -> Result<SpectralParams> {
        let dim = if self.mode == Mode::Kacrice { self.dim } else { 2 };
        SpectralParams::new(dim, self.alpha, self.wave_count, self.seed)
    }

    pub fn sphere_params(&self) -> SphereEnsembleParams {
        SphereEnsembleParams {
            eta_exponent: self.eta_exponent,
            ..SphereEnsembleParams::new(self.t, self.alpha, self.seed)
        }
    }

    pub fn diagnostic_params(&self) -> DiagnosticParams {
        DiagnosticParams { xi: self.xi, d: self.d }
    }

    /// Sample indices owned by this shard, in increasing order.
    pub fn sample_indices(&self) -> Vec<u64> {
        (0..self.samples)
            .filter(|i| i % self.shard_count == self.shard_index)
            .collect()
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
