//! Band-limited Gaussian ensembles on the round unit sphere, synthesized from
//! real spherical harmonics and sampled on an equiangular latitude-longitude
//! grid with single-vertex poles.

use std::f64::consts::{PI, TAU};

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, StreamTag};

pub const DEFAULT_ETA_EXPONENT: f64 = 0.4;

/// Minimum grid points per wavelength at the top degree before a warning is raised.
pub const MIN_POINTS_PER_WAVELENGTH: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereEnsembleParams {
    pub t: f64,
    pub alpha: f64,
    pub eta_exponent: f64,
    pub seed: u64,
}

impl SphereEnsembleParams {
    pub fn new(t: f64, alpha: f64, seed: u64) -> Self {
        SphereEnsembleParams {
            t,
            alpha,
            eta_exponent: DEFAULT_ETA_EXPONENT,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(Error::Config(format!("band edge T must be positive, got {}", self.t)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if !(self.eta_exponent > 0.0 && self.eta_exponent < 0.5) {
            return Err(Error::Config(format!(
                "eta exponent must lie in (0, 1/2), got {}",
                self.eta_exponent
            )));
        }
        Ok(())
    }

    /// Frequency window `[lo, T]`.
    pub fn window(&self) -> (f64, f64) {
        if self.alpha >= 1.0 {
            (self.t - self.t.powf(self.eta_exponent), self.t)
        } else {
            (self.alpha * self.t, self.t)
        }
    }
}

/// Frequency of degree `l`, i.e. the square root of the Laplace eigenvalue.
pub fn degree_frequency(l: usize) -> f64 {
    let l = l as f64;
    (l * (l + 1.0)).sqrt()
}

/// All degrees whose frequency lies in the band window.
pub fn select_degrees(params: &SphereEnsembleParams) -> Result<Vec<usize>> {
    params.validate()?;
    let (lo, hi) = params.window();
    let degrees: Vec<usize> = (0..)
        .take_while(|&l| degree_frequency(l) <= hi)
        .filter(|&l| degree_frequency(l) >= lo)
        .collect();
    if degrees.is_empty() {
        return Err(Error::Config(format!(
            "no spherical harmonic degree in the window [{lo}, {hi}] for T = {}, alpha = {}",
            params.t, params.alpha
        )));
    }
    Ok(degrees)
}

/// Coefficients against the real orthonormal harmonics; `coeffs[i][l + m]`
/// multiplies `Y_{l,m}` for `l = degrees[i]`, `-l <= m <= l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalSample {
    pub degrees: Vec<usize>,
    pub coeffs: Vec<Vec<f64>>,
}

impl SphericalSample {
    pub fn coefficient_count(&self) -> usize {
        self.coeffs.iter().map(Vec::len).sum()
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    /// Sum of squared coefficients; `4 pi` times the mean square of the field.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().flatten().map(|c| c * c).sum()
    }
}

pub fn draw_spherical(params: &SphereEnsembleParams, sample_index: u64) -> Result<SphericalSample> {
    let degrees = select_degrees(params)?;
    let mut rng = stream(params.seed, sample_index, StreamTag::SphereCoefficients);
    let coeffs = degrees
        .iter()
        .map(|&l| (0..2 * l + 1).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    Ok(SphericalSample { degrees, coeffs })
}

/// Fully normalized associated Legendre functions, `out[m][l - m]` for
/// `0 <= m <= l <= lmax`, such that `Y_{l,0} = P(l,0)` and
/// `Y_{l,+-m} = sqrt(2) P(l,m) {cos, sin}(m phi)` are orthonormal on the sphere.
pub fn normalized_legendre(lmax: usize, theta: f64) -> Vec<Vec<f64>> {
    let x = theta.cos();
    let s = theta.sin();
    let mut out: Vec<Vec<f64>> = (0..=lmax).map(|m| vec![0.0; lmax - m + 1]).collect();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            let mf = m as f64;
            pmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s;
        }
        let row = &mut out[m];
        row[0] = pmm;
        if m < lmax {
            row[1] = (2.0 * m as f64 + 3.0).sqrt() * x * pmm;
        }
        let mf = m as f64;
        for l in m + 2..=lmax {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            row[l - m] = a * (x * row[l - m - 1] - b * row[l - m - 2]);
        }
    }
    out
}

/// Point evaluation, used for poles and as a reference for the grid synthesis.
pub fn eval_point(sample: &SphericalSample, theta: f64, phi: f64) -> f64 {
    let lmax = sample.max_degree();
    let p = normalized_legendre(lmax, theta);
    let mut f = 0.0;
    for (&l, c) in sample.degrees.iter().zip(&sample.coeffs) {
        f += c[l] * p[0][l];
        for m in 1..=l {
            let (s, co) = (m as f64 * phi).sin_cos();
            f += 2f64.sqrt() * p[m][l - m] * (c[l + m] * co + c[l - m] * s);
        }
    }
    f
}

/// Field sampled on rings `theta_i = pi (i + 1) / (n_lat + 1)` and longitudes
/// `phi_j = 2 pi j / n_lon`, plus one value per pole.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    pub n_lat: usize,
    pub n_lon: usize,
    pub values: Vec<f64>,
    pub north: f64,
    pub south: f64,
    pub resolution_warning: bool,
}

impl SphereGrid {
    pub fn theta(&self, ring: usize) -> f64 {
        PI * (ring + 1) as f64 / (self.n_lat + 1) as f64
    }

    pub fn phi(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n_lon as f64
    }

    pub fn value(&self, ring: usize, j: usize) -> f64 {
        self.values[ring * self.n_lon + j]
    }

    /// Area-weighted mean of `f^2` using `sin(theta)` trapezoid weights.
    pub fn mean_square(&self) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..self.n_lat {
            let w = self.theta(i).sin();
            let row = &self.values[i * self.n_lon..(i + 1) * self.n_lon];
            num += w * row.iter().map(|v| v * v).sum::<f64>();
            den += w * self.n_lon as f64;
        }
        num / den
    }

    /// Same field with longitudes advanced by `shift` whole cells.
    pub fn shifted_longitude(&self, shift: usize) -> SphereGrid {
        let mut out = self.clone();
        for i in 0..self.n_lat {
            for j in 0..self.n_lon {
                out.values[i * self.n_lon + (j + shift) % self.n_lon] = self.value(i, j);
            }
        }
        out
    }
}

/// Smallest number of grid points per wavelength at degree `lmax`.
pub fn points_per_wavelength(lmax: usize, n_lat: usize, n_lon: usize) -> f64 {
    let freq = degree_frequency(lmax).max(1.0);
    let wavelength = TAU / freq;
    let dtheta = PI / (n_lat + 1) as f64;
    let dphi = TAU / n_lon as f64;
    wavelength / dtheta.max(dphi)
}

pub fn eval_sphere_grid(sample: &SphericalSample, n_lat: usize, n_lon: usize) -> Result<SphereGrid> {
    if n_lat < 4 || n_lon < 8 {
        return Err(Error::Config(format!(
            "sphere grid needs n_lat >= 4 and n_lon >= 8, got {n_lat} x {n_lon}"
        )));
    }
    let lmax = sample.max_degree();
    let resolution_warning = points_per_wavelength(lmax, n_lat, n_lon) < MIN_POINTS_PER_WAVELENGTH;
    if resolution_warning {
        log::warn!(
            "sphere grid {n_lat} x {n_lon} has fewer than {MIN_POINTS_PER_WAVELENGTH} points per wavelength at degree {lmax}"
        );
    }
    // cos/sin(m phi_j) tables, row m
    let mut cos_t = vec![0.0; (lmax + 1) * n_lon];
    let mut sin_t = vec![0.0; (lmax + 1) * n_lon];
    for m in 0..=lmax {
        for j in 0..n_lon {
            let (s, c) = (m as f64 * TAU * j as f64 / n_lon as f64).sin_cos();
            cos_t[m * n_lon + j] = c;
            sin_t[m * n_lon + j] = s;
        }
    }
    let mut values = vec![0.0; n_lat * n_lon];
    values.par_chunks_mut(n_lon).enumerate().for_each(|(i, row)| {
        let theta = PI * (i + 1) as f64 / (n_lat + 1) as f64;
        let p = normalized_legendre(lmax, theta);
        let mut a = vec![0.0; lmax + 1];
        let mut b = vec![0.0; lmax + 1];
        for (&l, c) in sample.degrees.iter().zip(&sample.coeffs) {
            a[0] += c[l] * p[0][l];
            for m in 1..=l {
                a[m] += 2f64.sqrt() * c[l + m] * p[m][l - m];
                b[m] += 2f64.sqrt() * c[l - m] * p[m][l - m];
            }
        }
        row.fill(a[0]);
        for m in 1..=lmax {
            let (cr, sr) = (&cos_t[m * n_lon..(m + 1) * n_lon], &sin_t[m * n_lon..(m + 1) * n_lon]);
            for j in 0..n_lon {
                row[j] += a[m] * cr[j] + b[m] * sr[j];
            }
        }
    });
    // only zonal terms survive at the poles
    let mut north = 0.0;
    let mut south = 0.0;
    for (&l, c) in sample.degrees.iter().zip(&sample.coeffs) {
        let y = ((2 * l + 1) as f64 / (4.0 * PI)).sqrt() * c[l];
        north += y;
        south += if l % 2 == 0 { y } else { -y };
    }
    Ok(SphereGrid {
        n_lat,
        n_lon,
        values,
        north,
        south,
        resolution_warning,
    })
}

/// Ring count giving about `points_per_wavelength` samples per wavelength
/// at band edge `t`; longitude count is twice that.
pub fn grid_size_for(t: f64, points_per_wavelength: f64) -> (usize, usize) {
    let n_lat = ((points_per_wavelength * t / 2.0).ceil() as usize).max(4);
    (n_lat, 2 * n_lat)
}
