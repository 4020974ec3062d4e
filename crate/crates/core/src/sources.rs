//! Mollified Gaussian plane waves and their traces on the two outer grid
//! rings (ghost and boundary), which is where the solver imposes
//! Dirichlet data.

use serde::{Deserialize, Serialize};

use crate::grid::{ring, BoundaryPoint, SpaceTimeGrid};

/// Smooth cutoff supported on `(-h, h)` with value 1 at the origin.
pub fn bump_cutoff(l: f64, h: f64) -> f64 {
    let r = l / h;
    if r.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

/// `H(l) = phi_h(l) sqrt(tau) exp(-tau l^2 / 2)`.
pub fn mollified_profile(l: f64, tau: f64, h: f64) -> f64 {
    let cut = bump_cutoff(l, h);
    if cut == 0.0 {
        return 0.0;
    }
    cut * tau.sqrt() * (-0.5 * tau * l * l).exp()
}

/// Default cutoff half-width `5 / sqrt(tau)`.
pub fn default_cutoff(tau: f64) -> f64 {
    5.0 / tau.sqrt()
}

/// Unit vector for an angle in degrees.
pub fn direction(angle_deg: f64) -> (f64, f64) {
    let (s, c) = angle_deg.to_radians().sin_cos();
    (c, s)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneWaveParams {
    pub tau: f64,
    pub h: f64,
    pub t0: f64,
    pub theta_deg: f64,
    pub eta: f64,
}

impl PlaneWaveParams {
    pub fn new(tau: f64, t0: f64, theta_deg: f64, eta: f64) -> Self {
        Self { tau, h: default_cutoff(tau), t0, theta_deg, eta }
    }

    /// `H1(x,t) = H(x.theta - t - (eta - t0))`, travelling along `theta`.
    pub fn h1(&self, x1: f64, x2: f64, t: f64) -> f64 {
        let (c, s) = direction(self.theta_deg);
        mollified_profile(c * x1 + s * x2 - t - (self.eta - self.t0), self.tau, self.h)
    }

    /// `H2(x,t) = H(-x.theta - t + (eta + t0))`, travelling along `-theta`.
    pub fn h2(&self, x1: f64, x2: f64, t: f64) -> f64 {
        let (c, s) = direction(self.theta_deg);
        mollified_profile(-(c * x1 + s * x2) - t + (self.eta + self.t0), self.tau, self.h)
    }
}

/// Dirichlet data on the ghost ring and the boundary ring for every time
/// level. Each level is stored as the ghost ring followed by the boundary
/// ring, both in [`ring`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryTrace {
    n1: usize,
    n2: usize,
    nt: usize,
    ghost_len: usize,
    boundary_len: usize,
    values: Vec<f64>,
}

impl BoundaryTrace {
    pub fn zeros(grid: &SpaceTimeGrid) -> Self {
        let (n1, n2) = (grid.space.n1, grid.space.n2);
        let ghost_len = ring(n1, n2, 0).len();
        let boundary_len = ring(n1, n2, 1).len();
        Self {
            n1,
            n2,
            nt: grid.nt,
            ghost_len,
            boundary_len,
            values: vec![0.0; grid.nt * (ghost_len + boundary_len)],
        }
    }

    /// Samples `f(x1, x2, t)` on both outer rings at every time level.
    pub fn from_fn(grid: &SpaceTimeGrid, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut trace = Self::zeros(grid);
        let sp = &grid.space;
        let coords: Vec<(f64, f64)> = ring(sp.n1, sp.n2, 0)
            .into_iter()
            .chain(ring(sp.n1, sp.n2, 1))
            .map(|p| (sp.x1(p.i), sp.x2(p.j)))
            .collect();
        let frame = trace.frame_len();
        for k in 0..grid.nt {
            let t = grid.time(k);
            let level = &mut trace.values[k * frame..(k + 1) * frame];
            for (v, &(x1, x2)) in level.iter_mut().zip(&coords) {
                *v = f(x1, x2, t);
            }
        }
        trace
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn frame_len(&self) -> usize {
        self.ghost_len + self.boundary_len
    }

    /// Ghost ring values at time level `k`.
    pub fn ghost(&self, k: usize) -> &[f64] {
        let off = k * self.frame_len();
        &self.values[off..off + self.ghost_len]
    }

    /// Boundary ring values at time level `k`, in `boundary_index_set` order.
    pub fn boundary(&self, k: usize) -> &[f64] {
        let off = k * self.frame_len() + self.ghost_len;
        &self.values[off..off + self.boundary_len]
    }

    /// Both rings at time level `k`.
    pub fn frame(&self, k: usize) -> &[f64] {
        let f = self.frame_len();
        &self.values[k * f..(k + 1) * f]
    }

    /// Node positions (array indices) matching [`Self::frame`].
    pub fn frame_points(&self) -> Vec<BoundaryPoint> {
        ring(self.n1, self.n2, 0).into_iter().chain(ring(self.n1, self.n2, 1)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { values: self.values.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }

    /// `self + c * other`; panics if the shapes differ.
    pub fn add_scaled(&self, c: f64, other: &Self) -> Self {
        assert_eq!(self.values.len(), other.values.len(), "trace shapes differ");
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect();
        Self { values, ..self.clone() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Probe for the Radon route: `f1 = cbrt(H1)` on the outer rings.
pub fn radon_trace_f1(params: &PlaneWaveParams, grid: &SpaceTimeGrid) -> BoundaryTrace {
    BoundaryTrace::from_fn(grid, |x1, x2, t| params.h1(x1, x2, t).cbrt())
}

/// Auxiliary trace for the Radon route: `f0 = H2` on the outer rings.
pub fn radon_trace_f0(params: &PlaneWaveParams, grid: &SpaceTimeGrid) -> BoundaryTrace {
    BoundaryTrace::from_fn(grid, |x1, x2, t| params.h2(x1, x2, t))
}

/// Plane waves focusing at a space-time point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointProbe {
    pub x0: [f64; 2],
    pub t0: f64,
    pub tau: f64,
    pub h: f64,
    pub theta_deg: f64,
}

impl PointProbe {
    fn arg(&self, dir: (f64, f64), sign: f64, x1: f64, x2: f64, t: f64) -> f64 {
        (t - self.t0) + sign * (dir.0 * (x1 - self.x0[0]) + dir.1 * (x2 - self.x0[1]))
    }

    /// `H((t-t0) - theta.(x-x0))`
    pub fn h1(&self, x1: f64, x2: f64, t: f64) -> f64 {
        let l = self.arg(direction(self.theta_deg), -1.0, x1, x2, t);
        mollified_profile(l, self.tau, self.h)
    }

    /// `H((t-t0) + theta.(x-x0))`
    pub fn h2(&self, x1: f64, x2: f64, t: f64) -> f64 {
        let l = self.arg(direction(self.theta_deg), 1.0, x1, x2, t);
        mollified_profile(l, self.tau, self.h)
    }

    /// `H((t-t0) - theta_perp.(x-x0))`, `theta_perp` = `theta` rotated +90 deg.
    pub fn h3(&self, x1: f64, x2: f64, t: f64) -> f64 {
        let l = self.arg(direction(self.theta_deg + 90.0), -1.0, x1, x2, t);
        mollified_profile(l, self.tau, self.h)
    }
}

#[derive(Clone, Debug)]
pub struct PointwiseTraces {
    pub f0: BoundaryTrace,
    pub f1: BoundaryTrace,
    pub f2: BoundaryTrace,
}

/// `f1 = H1`, `f2 = sqrt(H2)`, `f0 = H3` on the outer rings.
pub fn pointwise_traces(probe: &PointProbe, grid: &SpaceTimeGrid) -> PointwiseTraces {
    PointwiseTraces {
        f0: BoundaryTrace::from_fn(grid, |x1, x2, t| probe.h3(x1, x2, t)),
        f1: BoundaryTrace::from_fn(grid, |x1, x2, t| probe.h1(x1, x2, t)),
        f2: BoundaryTrace::from_fn(grid, |x1, x2, t| probe.h2(x1, x2, t).sqrt()),
    }
}
