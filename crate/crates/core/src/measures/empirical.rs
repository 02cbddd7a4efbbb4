use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed-point scale for observation weights, so that merging is exact and
/// independent of order.
pub const MASS_SCALE: f64 = (1u64 << 20) as f64;

/// Largest weight a single observation may carry.
pub const MAX_WEIGHT: f64 = 1e6;

/// Atom counts with an attached (possibly weighted) mass per atom.
/// Unweighted observations carry mass 1, and probabilities are taken from
/// the mass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound(serialize = "K: Serialize + Ord", deserialize = "K: Deserialize<'de> + Ord"))]
pub struct EmpiricalMeasure<K> {
    pub counts: BTreeMap<K, u64>,
    mass: BTreeMap<K, u64>,
    pub total: u64,
    total_mass: u64,
}

impl<K: Ord> Default for EmpiricalMeasure<K> {
    fn default() -> Self {
        EmpiricalMeasure {
            counts: BTreeMap::new(),
            mass: BTreeMap::new(),
            total: 0,
            total_mass: 0,
        }
    }
}

fn quantize(weight: f64) -> u64 {
    (weight.clamp(0.0, MAX_WEIGHT) * MASS_SCALE).round() as u64
}

impl<K: Ord + Clone> EmpiricalMeasure<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: K) {
        self.add_weighted(key, 1.0);
    }

    pub fn add_weighted(&mut self, key: K, weight: f64) {
        let q = quantize(weight);
        *self.counts.entry(key.clone()).or_default() += 1;
        *self.mass.entry(key).or_default() += q;
        self.total += 1;
        self.total_mass += q;
    }

    pub fn from_counts(pairs: impl IntoIterator<Item = (K, u64)>) -> Self {
        let mut m = Self::new();
        for (k, c) in pairs {
            let q = quantize(1.0) * c;
            *m.counts.entry(k.clone()).or_default() += c;
            *m.mass.entry(k).or_default() += q;
            m.total += c;
            m.total_mass += q;
        }
        m
    }

    /// Probability measure given directly; stored with one pseudo-count per atom.
    pub fn from_probabilities(pairs: impl IntoIterator<Item = (K, f64)>) -> Self {
        let mut m = Self::new();
        for (k, p) in pairs {
            let q = (p.max(0.0) * MASS_SCALE * MASS_SCALE).round() as u64;
            *m.counts.entry(k.clone()).or_default() += 1;
            *m.mass.entry(k).or_default() += q;
            m.total += 1;
            m.total_mass += q;
        }
        m
    }

    pub fn merge(&mut self, other: &Self) {
        for (k, &c) in &other.counts {
            *self.counts.entry(k.clone()).or_default() += c;
        }
        for (k, &q) in &other.mass {
            *self.mass.entry(k.clone()).or_default() += q;
        }
        self.total += other.total;
        self.total_mass += other.total_mass;
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn count(&self, key: &K) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn mass(&self, key: &K) -> f64 {
        self.mass.get(key).copied().unwrap_or(0) as f64 / MASS_SCALE
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass as f64 / MASS_SCALE
    }

    pub fn probability(&self, key: &K) -> f64 {
        if self.total_mass == 0 {
            return 0.0;
        }
        self.mass.get(key).copied().unwrap_or(0) as f64 / self.total_mass as f64
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.counts.keys()
    }

    /// `(key, count, probability)` in key order.
    pub fn rows(&self) -> Vec<(K, u64, f64)> {
        self.counts.iter().map(|(k, &c)| (k.clone(), c, self.probability(k))).collect()
    }
}

impl EmpiricalMeasure<u32> {
    /// Mean of the normalized measure together with a standard error built
    /// from the raw counts.
    pub fn mean_with_stderr(&self) -> (f64, f64) {
        if self.total_mass == 0 {
            return (f64::NAN, f64::NAN);
        }
        let mean: f64 = self.counts.keys().map(|&k| k as f64 * self.probability(&k)).sum();
        let second: f64 = self.counts.keys().map(|&k| (k as f64).powi(2) * self.probability(&k)).sum();
        let var = (second - mean * mean).max(0.0);
        (mean, (var / self.total.max(1) as f64).sqrt())
    }
}

/// Total-variation distance `sup_A |mu(A) - nu(A)| = 1/2 sum |mu(k) - nu(k)|`.
pub fn discrepancy<K: Ord + Clone>(mu: &EmpiricalMeasure<K>, nu: &EmpiricalMeasure<K>) -> Result<f64> {
    if mu.total_mass == 0 || nu.total_mass == 0 {
        return Err(Error::Precondition("discrepancy of a zero-mass measure".into()));
    }
    let mut s = 0.0;
    for k in mu.keys() {
        s += (mu.probability(k) - nu.probability(k)).abs();
    }
    for k in nu.keys() {
        if !mu.counts.contains_key(k) {
            s += nu.probability(k);
        }
    }
    Ok(0.5 * s)
}
