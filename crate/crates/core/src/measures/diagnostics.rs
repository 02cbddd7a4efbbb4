use serde::{Deserialize, Serialize};

use crate::topology::NestingForest;

/// Counts of small-adjacent and long curves among countable curves.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub n_countable: u64,
    pub n_xi_small: u64,
    pub n_d_long: u64,
}

impl Diagnostics {
    pub fn frac_xi_small(&self) -> f64 {
        ratio(self.n_xi_small, self.n_countable)
    }

    pub fn frac_d_long(&self) -> f64 {
        ratio(self.n_d_long, self.n_countable)
    }

    pub fn merge(&mut self, other: &Diagnostics) {
        self.n_countable += other.n_countable;
        self.n_xi_small += other.n_xi_small;
        self.n_d_long += other.n_d_long;
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// A countable curve is xi-small when either adjacent domain has area below
/// `xi`, and D-long when its diameter exceeds `d`.
pub fn small_long_diagnostics(forest: &NestingForest, xi: f64, d: f64) -> Diagnostics {
    let mut out = Diagnostics::default();
    for c in forest.countable_curves() {
        out.n_countable += 1;
        let a = forest.domain_area[c.plus_domain as usize].min(forest.domain_area[c.minus_domain as usize]);
        if a < xi {
            out.n_xi_small += 1;
        }
        if c.diameter > d {
            out.n_d_long += 1;
        }
    }
    out
}
