//! Sinogram of the potential from DN measurements of cubic waves.
//!
//! For every angle a single plane wave `f1 = cbrt(H1)` at `(T/2, theta, 0)`
//! is sent in at amplitudes `eps_j = j eps / N`, `j = 1..=N`. For every
//! offset `eta` the counter-propagating trace `f0 = H2` at
//! `(T/2 + eta, theta, eta)` is integrated against each measurement,
//! giving `g(eps_j) = int f0 Lambda(eps_j f1) / (6 pi)`. The entry
//! `R(q)(theta, eta)` is the third derivative of `g` at zero, taken either
//! with the Gaussian-regularized spectral derivative of the odd extension
//! or with the plain finite-difference stencil.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::{sha256_hex, TraceStore};
use crate::error::{Error, Result};
use crate::field::PotentialField;
use crate::grid::{boundary_index_set, Edge, SpaceTimeGrid};
use crate::phantoms::PhantomSpec;
use crate::seed::measurement_seed;
use crate::solver::{add_noise, measure_dn, DNTrace};
use crate::sources::{default_cutoff, radon_trace_f0, radon_trace_f1, BoundaryTrace, PlaneWaveParams};
use crate::specdiff::{derivative_at_origin, FilterSpec, DEFAULT_WINDOW};
use crate::tomo::{angle_range, uniform_offsets, Sinogram};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadonReconConfig {
    pub grid: SpaceTimeGrid,
    pub phantom: PhantomSpec,
    /// Nonlinearity exponent; the reconstruction formula needs 3.
    pub power: u32,
    pub eps: f64,
    pub n_eps: usize,
    pub tau: f64,
    pub h: f64,
    pub alpha: f64,
    pub window: f64,
    pub angles_deg: Vec<f64>,
    pub offsets: Vec<f64>,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Also require `T/2 + eta` to lie in the admissible time window.
    #[serde(default)]
    pub strict_window: bool,
}

impl RadonReconConfig {
    /// Full-scale parameters on `grid`: 180 angles, 63 offsets on
    /// `[-0.4, 0.4]`, `eps = 1.5`, `N = 16`, `tau = 700`, `alpha = 0.01`,
    /// 2 % noise.
    pub fn paper_defaults(grid: SpaceTimeGrid, phantom: PhantomSpec) -> Self {
        let tau = 700.0;
        Self {
            grid,
            phantom,
            power: 3,
            eps: 1.5,
            n_eps: 16,
            tau,
            h: default_cutoff(tau),
            alpha: 0.01,
            window: DEFAULT_WINDOW,
            angles_deg: angle_range(0.0, 1.0, 180),
            offsets: uniform_offsets(-0.4, 0.4, 63),
            noise_sigma: 0.02,
            seed: 0,
            strict_window: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        g.check_cfl()?;
        let window = g.admissible_window(0.0)?;
        if self.power != 3 {
            return Err(Error::InvalidConfig(format!(
                "the Radon reconstruction needs p = 3, got p = {}",
                self.power
            )));
        }
        let positive = [("eps", self.eps), ("tau", self.tau), ("h", self.h), ("alpha", self.alpha)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.n_eps < 2 {
            return Err(Error::InvalidConfig(format!("n_eps must be at least 2, got {}", self.n_eps)));
        }
        if !(self.window > 0.0 && self.window <= 1.0) {
            return Err(Error::InvalidConfig(format!("window must be in (0, 1], got {}", self.window)));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::InvalidConfig(format!("noise sigma must be >= 0, got {}", self.noise_sigma)));
        }
        if self.angles_deg.is_empty() || self.offsets.is_empty() {
            return Err(Error::InvalidConfig("need at least one angle and one offset".into()));
        }
        // checks uniform spacing of both axes
        Sinogram::zeros(self.angles_deg.clone(), self.offsets.clone())?;
        for &eta in &self.offsets {
            if eta.abs() > window.r {
                return Err(Error::InvalidConfig(format!(
                    "offset {eta} lies outside [-r, r] with r = {:.6}",
                    window.r
                )));
            }
            let t0 = 0.5 * g.t_final + eta;
            if self.strict_window && !window.contains(t0) {
                return Err(Error::InvalidConfig(format!(
                    "time T/2 + eta = {t0:.6} lies outside the admissible window ({:.6}, {:.6})",
                    window.t1, window.t2
                )));
            }
        }
        self.phantom.validate(&g.space)
    }

    pub fn eps_values(&self) -> Vec<f64> {
        (1..=self.n_eps).map(|j| j as f64 * self.eps / self.n_eps as f64).collect()
    }

    pub fn filter(&self) -> FilterSpec {
        FilterSpec::Gaussian { alpha: self.alpha }
    }

    pub fn probe(&self, theta_deg: f64) -> PlaneWaveParams {
        PlaneWaveParams { tau: self.tau, h: self.h, t0: 0.5 * self.grid.t_final, theta_deg, eta: 0.0 }
    }

    pub fn auxiliary(&self, theta_deg: f64, eta: f64) -> PlaneWaveParams {
        PlaneWaveParams { tau: self.tau, h: self.h, t0: 0.5 * self.grid.t_final + eta, theta_deg, eta }
    }

    /// Hash of everything the measured traces depend on apart from angle,
    /// sweep index and seed.
    pub fn fingerprint(&self) -> String {
        #[derive(Serialize)]
        struct Key<'a> {
            grid: &'a SpaceTimeGrid,
            phantom: &'a PhantomSpec,
            power: u32,
            eps: f64,
            n_eps: usize,
            tau: f64,
            h: f64,
            noise_sigma: f64,
        }
        let key = Key {
            grid: &self.grid,
            phantom: &self.phantom,
            power: self.power,
            eps: self.eps,
            n_eps: self.n_eps,
            tau: self.tau,
            h: self.h,
            noise_sigma: self.noise_sigma,
        };
        let json = serde_json::to_string(&key).expect("config serializes");
        sha256_hex(json.as_bytes())[..16].to_string()
    }
}

/// One measurement `Lambda(eps_j f1) + noise` for the `index`-th
/// amplitude (1-based) at `theta_deg`.
pub fn measure_one(
    config: &RadonReconConfig,
    q: &PotentialField,
    f1: &BoundaryTrace,
    theta_deg: f64,
    index: usize,
    store: Option<&TraceStore>,
) -> Result<DNTrace> {
    let seed = measurement_seed(config.seed, theta_deg, index);
    if let Some(store) = store {
        if let Some(trace) = store.load(theta_deg, index, seed)? {
            return Ok(trace);
        }
    }
    let amplitude = index as f64 * config.eps / config.n_eps as f64;
    let wrap = |e: Error| Error::Measurement { angle_deg: theta_deg, index, source: Box::new(e) };
    let clean = measure_dn(&config.grid, q, config.power, &f1.scaled(amplitude)).map_err(wrap)?;
    let trace = if config.noise_sigma > 0.0 { add_noise(&clean, config.noise_sigma, seed) } else { clean };
    if let Some(store) = store {
        store.store(theta_deg, index, seed, &trace)?;
    }
    Ok(trace)
}

/// The `N` measurements for one angle, in amplitude order.
pub fn measure_angle(
    config: &RadonReconConfig,
    q: &PotentialField,
    theta_deg: f64,
    store: Option<&TraceStore>,
) -> Result<Vec<DNTrace>> {
    let f1 = radon_trace_f1(&config.probe(theta_deg), &config.grid);
    (1..=config.n_eps)
        .into_par_iter()
        .map(|j| measure_one(config, q, &f1, theta_deg, j, store))
        .collect()
}

/// One solve at the largest amplitude for the first angle, to catch
/// blow-up before the full sweep.
pub fn dry_run(config: &RadonReconConfig, q: &PotentialField) -> Result<()> {
    config.validate()?;
    let theta = config.angles_deg[0];
    let f1 = radon_trace_f1(&config.probe(theta), &config.grid);
    measure_dn(&config.grid, q, config.power, &f1.scaled(config.eps))
        .map(|_| ())
        .map_err(|e| Error::Measurement { angle_deg: theta, index: config.n_eps, source: Box::new(e) })
}

/// Quadrature weight of every boundary node: the spacing along its edge
/// times `dt`.
pub(crate) fn boundary_weights(grid: &SpaceTimeGrid) -> Vec<f64> {
    let sp = &grid.space;
    let dt = grid.dt();
    boundary_index_set(sp.n1, sp.n2)
        .iter()
        .map(|p| match p.edge {
            Edge::Left | Edge::Right => sp.dx2() * dt,
            Edge::Bottom | Edge::Top => sp.dx1() * dt,
        })
        .collect()
}

fn integrate_layers(weights: &[f64], f0: &[f64], dn: &[f64]) -> f64 {
    let nb = weights.len();
    f0.chunks_exact(nb)
        .zip(dn.chunks_exact(nb))
        .map(|(a, b)| a.iter().zip(b).zip(weights).map(|((x, y), w)| x * y * w).sum::<f64>())
        .sum()
}

/// Samples of `f0` on the boundary layer for every time level, in
/// `boundary_index_set` order.
fn boundary_layer(grid: &SpaceTimeGrid, params: &PlaneWaveParams) -> Vec<f64> {
    let sp = &grid.space;
    let coords: Vec<(f64, f64)> =
        boundary_index_set(sp.n1, sp.n2).iter().map(|p| (sp.x1(p.i), sp.x2(p.j))).collect();
    let mut out = Vec::with_capacity(coords.len() * grid.nt);
    for k in 0..grid.nt {
        let t = grid.time(k);
        out.extend(coords.iter().map(|&(x1, x2)| params.h2(x1, x2, t)));
    }
    out
}

/// Riemann sum of `f0 * dn` over the lateral boundary, using `f0` on the
/// boundary layer.
pub fn boundary_integral(f0: &BoundaryTrace, dn: &DNTrace, grid: &SpaceTimeGrid) -> Result<f64> {
    let dims = (grid.space.n1, grid.space.n2);
    if f0.dims() != dims || dn.dims() != dims || f0.nt() != grid.nt || dn.nt() != grid.nt {
        return Err(Error::ShapeMismatch(format!(
            "f0 is {:?}x{}, DN trace is {:?}x{}, grid is {:?}x{}",
            f0.dims(),
            f0.nt(),
            dn.dims(),
            dn.nt(),
            dims,
            grid.nt
        )));
    }
    let weights = boundary_weights(grid);
    Ok((0..grid.nt)
        .map(|k| integrate_layers(&weights, f0.boundary(k), dn.level(k)))
        .sum())
}

/// `g(eps_j) = int f0 dn_j / (6 pi)` for every measurement.
pub fn g_curve(traces: &[DNTrace], f0: &BoundaryTrace, grid: &SpaceTimeGrid) -> Result<Vec<f64>> {
    let c = 1.0 / (6.0 * std::f64::consts::PI);
    traces.iter().map(|dn| boundary_integral(f0, dn, grid).map(|v| c * v)).collect()
}

/// `(g(2h) - 2 g(h)) / h^3` with `h = eps / N`: the five-point central
/// stencil for the third derivative at zero, folded by oddness.
pub fn third_derivative_fd(g: &[f64], eps: f64) -> Result<f64> {
    if g.len() < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 samples, got {}", g.len())));
    }
    let h = eps / g.len() as f64;
    Ok((g[1] - 2.0 * g[0]) / (h * h * h))
}

/// One column, from both differentiation routes.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnEstimates {
    pub spectral: Vec<f64>,
    pub finite_difference: Vec<f64>,
    /// `g` samples, one row per offset.
    pub curves: Vec<Vec<f64>>,
}

/// Sweeps the offsets over the measurements of one angle.
pub fn column_from_traces(config: &RadonReconConfig, theta_deg: f64, traces: &[DNTrace]) -> Result<ColumnEstimates> {
    if traces.len() != config.n_eps {
        return Err(Error::ShapeMismatch(format!("{} traces for n_eps = {}", traces.len(), config.n_eps)));
    }
    let grid = &config.grid;
    let weights = boundary_weights(grid);
    let c = 1.0 / (6.0 * std::f64::consts::PI);
    let mut out = ColumnEstimates { spectral: vec![], finite_difference: vec![], curves: vec![] };
    for &eta in &config.offsets {
        let f0 = boundary_layer(grid, &config.auxiliary(theta_deg, eta));
        let g: Vec<f64> = traces.iter().map(|dn| c * integrate_layers(&weights, &f0, dn.values())).collect();
        out.spectral.push(derivative_at_origin(&g, config.eps, 3, config.filter(), config.window)?);
        out.finite_difference.push(third_derivative_fd(&g, config.eps)?);
        out.curves.push(g);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SinogramPair {
    /// Regularized spectral differentiation.
    pub spectral: Sinogram,
    /// Unregularized finite differences on the same data.
    pub finite_difference: Sinogram,
}

/// Full sinogram. Angles run in parallel; the result does not depend on
/// the number of worker threads.
pub fn reconstruct_sinogram_pair(config: &RadonReconConfig, store: Option<&TraceStore>) -> Result<SinogramPair> {
    config.validate()?;
    let q = config.phantom.sample(&config.grid.space);
    let columns: Vec<ColumnEstimates> = config
        .angles_deg
        .par_iter()
        .map(|&theta| {
            let traces = measure_angle(config, &q, theta, store)?;
            column_from_traces(config, theta, &traces)
        })
        .collect::<Result<_>>()?;
    let spectral: Vec<Vec<f64>> = columns.iter().map(|c| c.spectral.clone()).collect();
    let fd: Vec<Vec<f64>> = columns.iter().map(|c| c.finite_difference.clone()).collect();
    Ok(SinogramPair {
        spectral: Sinogram::from_columns(config.angles_deg.clone(), config.offsets.clone(), &spectral)?,
        finite_difference: Sinogram::from_columns(config.angles_deg.clone(), config.offsets.clone(), &fd)?,
    })
}

pub fn reconstruct_sinogram(config: &RadonReconConfig, store: Option<&TraceStore>) -> Result<Sinogram> {
    reconstruct_sinogram_pair(config, store).map(|p| p.spectral)
}

/// Standalone `f0` trace for an offset, for inspection and tests.
pub fn auxiliary_trace(config: &RadonReconConfig, theta_deg: f64, eta: f64) -> BoundaryTrace {
    radon_trace_f0(&config.auxiliary(theta_deg, eta), &config.grid)
}
