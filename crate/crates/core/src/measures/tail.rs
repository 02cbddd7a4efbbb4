use rand::Rng;
use serde::{Deserialize, Serialize};

use super::EmpiricalMeasure;
use crate::error::{Error, Result};
use crate::rng::{stream, StreamTag};
use crate::special::hurwitz_zeta;

/// Minimum number of raw observations at or above `m_min`.
pub const MIN_TAIL_OBSERVATIONS: u64 = 50;

const GAMMA_RANGE: (f64, f64) = (1.01, 6.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub gamma_hat: f64,
    pub stderr: f64,
    pub m_min: u32,
    pub n_tail: u64,
}

/// Maximizer of `-gamma * mean_log - ln zeta(gamma, m_min)`, the per-observation
/// log-likelihood of `P(m) = m^-gamma / zeta(gamma, m_min)` for `m >= m_min`.
fn mle(mean_log: f64, m_min: u32) -> f64 {
    let q = m_min as f64;
    let ll = |g: f64| -g * mean_log - hurwitz_zeta(g, q).ln();
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = GAMMA_RANGE;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (ll(c), ll(d));
    while b - a > 1e-9 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = ll(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = ll(d);
        }
    }
    0.5 * (a + b)
}

/// Discrete power-law fit of the tail `m >= m_min`, using the measure's
/// (possibly edge-corrected) mass, with a seeded bootstrap standard error.
pub fn tail_exponent(mu: &EmpiricalMeasure<u32>, m_min: u32, n_bootstrap: usize, seed: u64) -> Result<TailFit> {
    if m_min < 1 {
        return Err(Error::Precondition("m_min must be at least 1".into()));
    }
    let atoms: Vec<(u32, u64, f64)> = mu
        .counts
        .iter()
        .filter(|(&k, _)| k >= m_min)
        .map(|(&k, &c)| (k, c, mu.mass(&k)))
        .collect();
    let n_tail: u64 = atoms.iter().map(|a| a.1).sum();
    if n_tail < MIN_TAIL_OBSERVATIONS {
        return Err(Error::InsufficientData(format!(
            "tail fit needs at least {MIN_TAIL_OBSERVATIONS} observations with m >= {m_min}, found {n_tail}"
        )));
    }
    let mean_log = |mass: &[f64]| {
        let w: f64 = mass.iter().sum();
        atoms.iter().zip(mass).map(|(a, m)| m * (a.0 as f64).ln()).sum::<f64>() / w
    };
    let mass: Vec<f64> = atoms.iter().map(|a| a.2).collect();
    let gamma_hat = mle(mean_log(&mass), m_min);

    let mut rng = stream(seed, 0, StreamTag::Bootstrap);
    let per_obs: Vec<f64> = atoms.iter().map(|a| a.2 / a.1 as f64).collect();
    let cumulative: Vec<u64> = atoms
        .iter()
        .scan(0u64, |s, a| {
            *s += a.1;
            Some(*s)
        })
        .collect();
    let mut fits = Vec::with_capacity(n_bootstrap);
    let mut resampled = vec![0.0; atoms.len()];
    for _ in 0..n_bootstrap {
        resampled.iter_mut().for_each(|x| *x = 0.0);
        for _ in 0..n_tail {
            let u = rng.random_range(0..n_tail);
            let i = cumulative.partition_point(|&c| c <= u);
            resampled[i] += per_obs[i];
        }
        fits.push(mle(mean_log(&resampled), m_min));
    }
    let stderr = if fits.len() > 1 {
        let m = fits.iter().sum::<f64>() / fits.len() as f64;
        (fits.iter().map(|g| (g - m).powi(2)).sum::<f64>() / (fits.len() - 1) as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(TailFit {
        gamma_hat,
        stderr,
        m_min,
        n_tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Zeta};

    fn synthetic(gamma: f64, m_min: u32, n: usize, seed: u64) -> EmpiricalMeasure<u32> {
        let z = Zeta::new(gamma).unwrap();
        let mut rng = stream(seed, 0, StreamTag::Synthetic);
        let mut mu = EmpiricalMeasure::new();
        let mut kept = 0;
        while kept < n {
            let k: f64 = z.sample(&mut rng);
            if k >= m_min as f64 && k < 4e9 {
                mu.add(k as u32);
                kept += 1;
            }
        }
        mu
    }

    #[test]
    fn recovers_fisher_exponent() {
        let gamma = 187.0 / 91.0;
        let mu = synthetic(gamma, 3, 100_000, 17);
        let fit = tail_exponent(&mu, 3, 50, 1).unwrap();
        assert!((fit.gamma_hat - gamma).abs() < 0.05, "{fit:?}");
        assert!(fit.stderr > 0.0 && fit.stderr < 0.05);
    }

    #[test]
    fn head_atoms_are_ignored() {
        let mut mu = synthetic(2.5, 2, 20_000, 3);
        let fit = tail_exponent(&mu, 2, 0, 0).unwrap();
        for _ in 0..1000 {
            mu.add(1);
        }
        assert_eq!(tail_exponent(&mu, 2, 0, 0).unwrap().gamma_hat, fit.gamma_hat);
    }

    #[test]
    fn insufficient_tail() {
        let mu = EmpiricalMeasure::from_counts([(1u32, 1000), (3, 10)]);
        let err = tail_exponent(&mu, 3, 10, 0).unwrap_err();
        assert!(err.to_string().contains("found 10"));
    }

    #[test]
    fn deterministic_bootstrap() {
        let mu = synthetic(2.2, 3, 2_000, 5);
        assert_eq!(tail_exponent(&mu, 3, 30, 9).unwrap(), tail_exponent(&mu, 3, 30, 9).unwrap());
    }
}
