use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Connectivity law of monochromatic waves, atoms 1 to 26.
pub const REFERENCE_ALPHA1: &str = include_str!("../../data/connectivity_alpha1.csv");
/// Connectivity law at `alpha = 0`, atoms 1 to 26.
pub const REFERENCE_ALPHA0: &str = include_str!("../../data/connectivity_alpha0.csv");

/// Shipped reference table for `alpha`, when there is one.
pub fn reference_table(alpha: f64) -> Option<BTreeMap<u32, f64>> {
    let text = if alpha == 1.0 {
        REFERENCE_ALPHA1
    } else if alpha == 0.0 {
        REFERENCE_ALPHA0
    } else {
        return None;
    };
    Some(parse_probabilities(text).expect("shipped tables are well formed"))
}

/// Reads the `key` and `probability` columns of a CSV with a header row;
/// lines starting with `#` are comments. Accepts both reference tables and
/// campaign `mu_gamma.csv` files.
pub fn parse_probabilities(text: &str) -> Result<BTreeMap<u32, f64>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Malformed(format!("missing column {name:?}")))
    };
    let (kc, pc) = (col("key")?, col("probability")?);
    let mut out = BTreeMap::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let k: u32 = field(kc)
            .parse()
            .map_err(|_| Error::Malformed(format!("row {}: bad key {:?}", line + 1, field(kc))))?;
        let p: f64 = field(pc)
            .parse()
            .map_err(|_| Error::Malformed(format!("row {}: bad probability {:?}", line + 1, field(pc))))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Malformed(format!("row {}: probability {p} outside [0, 1]", line + 1)));
        }
        if out.insert(k, p).is_some() {
            return Err(Error::Malformed(format!("row {}: key {k} repeated", line + 1)));
        }
    }
    if out.is_empty() {
        return Err(Error::Malformed("table has no rows".into()));
    }
    Ok(out)
}

pub fn read_probabilities(path: &Path) -> Result<BTreeMap<u32, f64>> {
    parse_probabilities(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Largest allowed `|observed - reference|` on each checked atom.
    pub atom: f64,
    /// Atoms checked against `atom`; every reference atom when empty.
    pub atoms: Vec<u32>,
    /// Largest allowed total-variation distance, if checked.
    pub total_variation: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            atom: 0.01,
            atoms: Vec::new(),
            total_variation: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomDifference {
    pub key: u32,
    pub observed: f64,
    pub reference: f64,
    pub difference: f64,
    pub checked: bool,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub atoms: Vec<AtomDifference>,
    /// `1/2 sum |p - q|` over the union of atoms. Mass the reference leaves
    /// untabulated is not counted.
    pub total_variation: f64,
    pub pass: bool,
}

pub fn compare_to_reference(
    observed: &BTreeMap<u32, f64>,
    reference: &BTreeMap<u32, f64>,
    tol: &Tolerances,
) -> DiscrepancyReport {
    let keys: BTreeSet<u32> = observed.keys().chain(reference.keys()).copied().collect();
    let mut atoms = Vec::new();
    let mut l1 = 0.0;
    for &k in &keys {
        let o = observed.get(&k).copied().unwrap_or(0.0);
        let r = reference.get(&k).copied();
        l1 += (o - r.unwrap_or(0.0)).abs();
        if let Some(r) = r {
            let checked = tol.atoms.is_empty() || tol.atoms.contains(&k);
            let difference = o - r;
            atoms.push(AtomDifference {
                key: k,
                observed: o,
                reference: r,
                difference,
                checked,
                within: difference.abs() < tol.atom,
            });
        }
    }
    let total_variation = 0.5 * l1;
    let pass = atoms.iter().all(|a| !a.checked || a.within)
        && tol.total_variation.is_none_or(|t| total_variation < t);
    DiscrepancyReport {
        atoms,
        total_variation,
        pass,
    }
}
