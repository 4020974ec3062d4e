//! Differentiation of a noisy piecewise quadratic on `[0, 1]` with both
//! filters, for comparing their RMS errors.
//!
//! The quadratic is `0` on `[0, 1/4)`, `2x^2 - x + 1/8` on `(1/4, 1/2]`,
//! `3x - 2x^2 - 7/8` on `(1/2, 3/4]` and `1/4` afterwards. Its first
//! derivative is a hat function and its second derivative jumps at
//! `1/4, 1/2, 3/4`; at a jump the exact value is taken as the mean of the
//! one-sided limits.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{periodize, spectral_derivative, FilterSpec, SampledSignal};
use crate::error::{Error, Result};

pub const DEFAULT_SAMPLES: usize = 4097;

pub fn quadratic(x: f64) -> f64 {
    if x < 0.25 {
        0.0
    } else if x <= 0.5 {
        2.0 * x * x - x + 0.125
    } else if x <= 0.75 {
        3.0 * x - 2.0 * x * x - 0.875
    } else {
        0.25
    }
}

pub fn quadratic_d1(x: f64) -> f64 {
    if x < 0.25 || x > 0.75 {
        0.0
    } else if x <= 0.5 {
        4.0 * x - 1.0
    } else {
        3.0 - 4.0 * x
    }
}

pub fn quadratic_d2(x: f64) -> f64 {
    const JUMPS: [(f64, f64); 3] = [(0.25, 2.0), (0.5, 0.0), (0.75, -2.0)];
    if let Some(&(_, v)) = JUMPS.iter().find(|(at, _)| *at == x) {
        return v;
    }
    if x < 0.25 || x > 0.75 {
        0.0
    } else if x < 0.5 {
        4.0
    } else {
        -4.0
    }
}

/// Filter settings for one noise level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkedParams {
    pub noise_std: f64,
    pub first_alpha: f64,
    pub first_xi_max: f64,
    pub second_alpha: f64,
    pub second_xi_max: f64,
    /// Taper plateau fraction applied after reflection to `[0, 2)`.
    pub window: f64,
}

impl WorkedParams {
    /// Noise `1e-3`.
    pub fn high_noise() -> Self {
        Self {
            noise_std: 1e-3,
            first_alpha: 5e-5,
            first_xi_max: 64.0,
            second_alpha: 8e-5,
            second_xi_max: 40.0,
            window: 1.0,
        }
    }

    /// Noise `1e-4`.
    pub fn low_noise() -> Self {
        Self {
            noise_std: 1e-4,
            first_alpha: 5e-5,
            first_xi_max: 200.0,
            second_alpha: 5e-5,
            second_xi_max: 87.0,
            window: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WorkedRms {
    pub first_gauss: f64,
    pub first_trunc: f64,
    pub second_gauss: f64,
    pub second_trunc: f64,
}

#[derive(Clone, Debug)]
pub struct WorkedRun {
    pub x: Vec<f64>,
    pub noisy: Vec<f64>,
    pub exact_d1: Vec<f64>,
    pub exact_d2: Vec<f64>,
    pub gauss_d1: Vec<f64>,
    pub trunc_d1: Vec<f64>,
    pub gauss_d2: Vec<f64>,
    pub trunc_d2: Vec<f64>,
}

impl WorkedRun {
    pub fn rms(&self) -> WorkedRms {
        WorkedRms {
            first_gauss: rms_error(&self.gauss_d1, &self.exact_d1),
            first_trunc: rms_error(&self.trunc_d1, &self.exact_d1),
            second_gauss: rms_error(&self.gauss_d2, &self.exact_d2),
            second_trunc: rms_error(&self.trunc_d2, &self.exact_d2),
        }
    }
}

pub fn rms_error(a: &[f64], b: &[f64]) -> f64 {
    let ss: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (ss / a.len() as f64).sqrt()
}

/// Even reflection of samples on `[0, 1]` to one period of `[0, 2)`.
pub fn reflect_to_period(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut out = Vec::with_capacity(2 * n - 2);
    out.extend_from_slice(values);
    out.extend(values[1..n - 1].iter().rev());
    out
}

/// `p`-th derivative of samples on the uniform grid of `[0, 1]`.
pub fn differentiate_unit_interval(
    values: &[f64],
    p: u32,
    filter: FilterSpec,
    window: f64,
) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 4 {
        return Err(Error::InvalidConfig(format!("need at least 4 samples, got {n}")));
    }
    let dx = 1.0 / (n - 1) as f64;
    let period = SampledSignal::new(reflect_to_period(values), dx, n - 1)?;
    let tapered = periodize(&period, window)?;
    let d = spectral_derivative(&tapered, p, filter);
    Ok(d.values[..n].to_vec())
}

pub fn run_worked_example(params: &WorkedParams, n: usize, seed: u64) -> Result<WorkedRun> {
    if !(params.noise_std >= 0.0) {
        return Err(Error::InvalidConfig(format!("noise std must be >= 0, got {}", params.noise_std)));
    }
    let x: Vec<f64> = (0..n).map(|j| j as f64 / (n - 1) as f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let noisy: Vec<f64> =
        x.iter().map(|&t| quadratic(t) + params.noise_std * normal.sample(&mut rng)).collect();
    let w = params.window;
    let gauss = |p, alpha| differentiate_unit_interval(&noisy, p, FilterSpec::Gaussian { alpha }, w);
    let trunc = |p, xi_max| differentiate_unit_interval(&noisy, p, FilterSpec::Truncation { xi_max }, w);
    Ok(WorkedRun {
        exact_d1: x.iter().map(|&t| quadratic_d1(t)).collect(),
        exact_d2: x.iter().map(|&t| quadratic_d2(t)).collect(),
        gauss_d1: gauss(1, params.first_alpha)?,
        trunc_d1: trunc(1, params.first_xi_max)?,
        gauss_d2: gauss(2, params.second_alpha)?,
        trunc_d2: trunc(2, params.second_xi_max)?,
        x,
        noisy,
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 0 {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    }
}

/// Per-metric median over the given seeds.
pub fn median_rms(params: &WorkedParams, n: usize, seeds: &[u64]) -> Result<WorkedRms> {
    if seeds.is_empty() {
        return Err(Error::InvalidConfig("no seeds given".into()));
    }
    let runs = seeds
        .iter()
        .map(|&s| run_worked_example(params, n, s).map(|r| r.rms()))
        .collect::<Result<Vec<_>>>()?;
    let pick = |f: fn(&WorkedRms) -> f64| median(runs.iter().map(f).collect());
    Ok(WorkedRms {
        first_gauss: pick(|r| r.first_gauss),
        first_trunc: pick(|r| r.first_trunc),
        second_gauss: pick(|r| r.second_gauss),
        second_trunc: pick(|r| r.second_trunc),
    })
}
