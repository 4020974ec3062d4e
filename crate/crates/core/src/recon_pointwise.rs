//! Pointwise recovery of `q(x0)` from the mixed derivative
//! `d_eps1 d_eps2^2` of `G(eps1, eps2) = int f0 Lambda(eps1 f1 + eps2 f2)`
//! at zero, by unregularized central differences.
//!
//! Since `Lambda(-f) = -Lambda(f)` for the cubic equation, the six-point
//! stencil folds to
//! `[G(e, e) + G(e, -e) - 2 G(e, 0)] / e^3`, which needs three solves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PotentialField;
use crate::grid::{SpaceTimeGrid, SpatialGrid};
use crate::recon_radon::boundary_weights;
use crate::phantoms::{PhantomSpec, RECON_HALF_WIDTH};
use crate::seed::point_seed;
use crate::solver::{add_noise, measure_dn, DNTrace};
use crate::sources::{default_cutoff, pointwise_traces, BoundaryTrace, PointProbe, PointwiseTraces};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointwiseConfig {
    pub grid: SpaceTimeGrid,
    pub phantom: PhantomSpec,
    pub power: u32,
    /// Nodes `x0` at which `q` is recovered.
    pub recon: SpatialGrid,
    pub eps: f64,
    pub tau: f64,
    pub h: f64,
    pub theta_deg: f64,
    /// Focus time; `None` means `T/2`.
    pub t0: Option<f64>,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl PointwiseConfig {
    /// 44 x 44 nodes on `[-0.2828, 0.2828]^2`, `eps = 0.1`, `tau = 700`,
    /// `theta = 45 deg`, 2 % noise.
    pub fn paper_defaults(grid: SpaceTimeGrid, phantom: PhantomSpec) -> Self {
        let tau = 700.0;
        Self {
            grid,
            phantom,
            power: 3,
            recon: SpatialGrid::centered_square(RECON_HALF_WIDTH, 44).expect("valid grid"),
            eps: 0.1,
            tau,
            h: default_cutoff(tau),
            theta_deg: 45.0,
            t0: None,
            noise_sigma: 0.02,
            seed: 0,
        }
    }

    pub fn focus_time(&self) -> f64 {
        self.t0.unwrap_or(0.5 * self.grid.t_final)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.check_cfl()?;
        let window = self.grid.admissible_window(0.0)?;
        if self.power != 3 {
            return Err(Error::InvalidConfig(format!(
                "the pointwise reconstruction needs p = 3, got p = {}",
                self.power
            )));
        }
        for (name, v) in [("eps", self.eps), ("tau", self.tau), ("h", self.h)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::InvalidConfig(format!("noise sigma must be >= 0, got {}", self.noise_sigma)));
        }
        let t0 = self.focus_time();
        if !window.contains(t0) {
            return Err(Error::InvalidConfig(format!(
                "focus time {t0} lies outside the admissible window ({:.6}, {:.6})",
                window.t1, window.t2
            )));
        }
        let sp = &self.grid.space;
        let r = &self.recon;
        if !(sp.contains(r.a1, r.a2) && sp.contains(r.b1, r.b2)) {
            return Err(Error::InvalidConfig("reconstruction grid must lie inside the domain".into()));
        }
        self.phantom.validate(sp)
    }

    pub fn probe(&self, x0: [f64; 2]) -> PointProbe {
        PointProbe { x0, t0: self.focus_time(), tau: self.tau, h: self.h, theta_deg: self.theta_deg }
    }
}

fn functional(grid: &SpaceTimeGrid, weights: &[f64], f0: &BoundaryTrace, dn: &DNTrace) -> f64 {
    (0..grid.nt)
        .map(|k| {
            f0.boundary(k).iter().zip(dn.level(k)).zip(weights).map(|((a, b), w)| a * b * w).sum::<f64>()
        })
        .sum()
}

struct PointSetup<'a> {
    config: &'a PointwiseConfig,
    q: &'a PotentialField,
    traces: PointwiseTraces,
    weights: Vec<f64>,
    node: (usize, usize),
}

impl PointSetup<'_> {
    /// `G(a, b)` with the noise of the `solve`-th measurement at this node.
    fn g(&self, a: f64, b: f64, solve: usize) -> Result<f64> {
        let c = self.config;
        let data = self.traces.f1.scaled(a).add_scaled(b, &self.traces.f2);
        let mut dn = measure_dn(&c.grid, self.q, c.power, &data)?;
        if c.noise_sigma > 0.0 {
            dn = add_noise(&dn, c.noise_sigma, point_seed(c.seed, self.node.0, self.node.1, solve));
        }
        Ok(functional(&c.grid, &self.weights, &self.traces.f0, &dn))
    }
}

fn normalization(eps: f64) -> f64 {
    6.0 * std::f64::consts::PI.powf(1.5) * eps.powi(3)
}

fn setup<'a>(config: &'a PointwiseConfig, q: &'a PotentialField, x0: [f64; 2], node: (usize, usize)) -> PointSetup<'a> {
    PointSetup {
        config,
        q,
        traces: pointwise_traces(&config.probe(x0), &config.grid),
        weights: boundary_weights(&config.grid),
        node,
    }
}

fn with_context(x0: [f64; 2], e: Error) -> Error {
    Error::PointSolve { x1: x0[0], x2: x0[1], source: Box::new(e) }
}

/// Three-solve estimate of `q(x0)`. `node` only selects the noise seeds.
pub fn reconstruct_point(config: &PointwiseConfig, q: &PotentialField, x0: [f64; 2], node: (usize, usize)) -> Result<f64> {
    let s = setup(config, q, x0, node);
    let e = config.eps;
    let run = || -> Result<f64> {
        let gpp = s.g(e, e, 0)?;
        let gp0 = s.g(e, 0.0, 1)?;
        let gpm = s.g(e, -e, 2)?;
        Ok((gpp + gpm - 2.0 * gp0) / normalization(e))
    };
    run().map_err(|err| with_context(x0, err))
}

/// Six-solve symmetric stencil; agrees with [`reconstruct_point`] to
/// roundoff when there is no noise.
pub fn reconstruct_point_six(config: &PointwiseConfig, q: &PotentialField, x0: [f64; 2], node: (usize, usize)) -> Result<f64> {
    let s = setup(config, q, x0, node);
    let e = config.eps;
    let run = || -> Result<f64> {
        let plus = s.g(e, e, 0)? - 2.0 * s.g(e, 0.0, 1)? + s.g(e, -e, 2)?;
        let minus = s.g(-e, e, 3)? - 2.0 * s.g(-e, 0.0, 4)? + s.g(-e, -e, 5)?;
        Ok((plus - minus) / (2.0 * normalization(e)))
    };
    run().map_err(|err| with_context(x0, err))
}

#[derive(Debug)]
pub struct PointwiseOutcome {
    /// Failed nodes hold zero.
    pub field: PotentialField,
    pub failures: Vec<Error>,
    pub solves: usize,
}

/// Maps [`reconstruct_point`] over every node of the reconstruction grid.
pub fn reconstruct_grid(config: &PointwiseConfig) -> Result<PointwiseOutcome> {
    config.validate()?;
    let q = config.phantom.sample(&config.grid.space);
    let r = config.recon;
    let nodes: Vec<(usize, usize)> = (1..=r.n1).flat_map(|i| (1..=r.n2).map(move |j| (i, j))).collect();
    let results: Vec<Result<f64>> = nodes
        .par_iter()
        .map(|&(i, j)| reconstruct_point(config, &q, [r.x1(i), r.x2(j)], (i, j)))
        .collect();
    let mut values = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for res in results {
        match res {
            Ok(v) => values.push(v),
            Err(e) => {
                values.push(0.0);
                failures.push(e);
            }
        }
    }
    Ok(PointwiseOutcome {
        field: PotentialField::from_nodes(r, &values).expect("node count matches grid"),
        failures,
        solves: 3 * nodes.len(),
    })
}
