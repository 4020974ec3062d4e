//! Explicit finite-difference solver for
//! `u_tt - Laplace(u) + q u^p = 0` on the rectangle with Dirichlet data on
//! the two outer rings and zero initial data, plus Dirichlet-to-Neumann
//! extraction and measurement noise.
//!
//! Time is discretized with second-order central differences and space
//! with the fourth-order five-point stencil in each direction. The
//! nonlinear term is evaluated at the current level, so every step is a
//! single explicit update.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::field::PotentialField;
use crate::grid::{boundary_index_set, BoundaryPoint, Edge, SpaceTimeGrid, SpatialGrid};
use crate::sources::BoundaryTrace;

/// Manufactured source term `F(x1, x2, t)` added to the right-hand side.
pub type Forcing<'a> = &'a (dyn Fn(f64, f64, f64) -> f64 + Sync);

#[derive(Clone, Copy)]
pub struct SolverOptions<'a> {
    /// Test hook for manufactured solutions; `None` in production.
    pub forcing: Option<Forcing<'a>>,
    /// Steps between blow-up checks.
    pub guard_interval: usize,
}

impl Default for SolverOptions<'_> {
    fn default() -> Self {
        Self { forcing: None, guard_interval: 50 }
    }
}

/// Full space-time solution including the ghost ring.
#[derive(Clone, Debug)]
pub struct WaveField {
    grid: SpaceTimeGrid,
    p: u32,
    values: Vec<f64>,
}

impl WaveField {
    /// Wraps externally computed levels (`nt` padded arrays, concatenated).
    pub fn from_levels(grid: SpaceTimeGrid, p: u32, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.nt * grid.space.padded_len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} values, got {}",
                grid.nt * grid.space.padded_len(),
                values.len()
            )));
        }
        Ok(Self { grid, p, values })
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn power(&self) -> u32 {
        self.p
    }

    pub fn level(&self, k: usize) -> &[f64] {
        let n = self.grid.space.padded_len();
        &self.values[k * n..(k + 1) * n]
    }

    /// Value at array index `(i, j)` and time level `k`.
    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.level(k)[self.grid.space.idx(i, j)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseRecord {
    pub sigma: f64,
    pub sigma0: f64,
    pub seed: u64,
}

/// Outward normal derivative on the boundary for every time level, in
/// `boundary_index_set` order.
#[derive(Clone, Debug, PartialEq)]
pub struct DNTrace {
    n1: usize,
    n2: usize,
    nt: usize,
    values: Vec<f64>,
    pub noise: Option<NoiseRecord>,
}

impl DNTrace {
    pub fn zeros(n1: usize, n2: usize, nt: usize) -> Self {
        let nb = boundary_index_set(n1, n2).len();
        Self { n1, n2, nt, values: vec![0.0; nb * nt], noise: None }
    }

    pub fn from_values(n1: usize, n2: usize, nt: usize, values: Vec<f64>) -> Result<Self> {
        let nb = boundary_index_set(n1, n2).len();
        if values.len() != nb * nt {
            return Err(Error::ShapeMismatch(format!(
                "DN trace for {n1}x{n2}x{nt} needs {} values, got {}",
                nb * nt,
                values.len()
            )));
        }
        Ok(Self { n1, n2, nt, values, noise: None })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn boundary_len(&self) -> usize {
        self.values.len() / self.nt
    }

    pub fn level(&self, k: usize) -> &[f64] {
        let nb = self.boundary_len();
        &self.values[k * nb..(k + 1) * nb]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { values: self.values.iter().map(|v| c * v).collect(), ..self.clone() }
    }

    pub fn mean_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() / self.values.len() as f64
    }

    pub fn rms(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64).sqrt()
    }
}

struct Stencil {
    stride: usize,
    n1: usize,
    n2: usize,
    cx1: f64,
    cx2: f64,
    dt2: f64,
}

impl Stencil {
    fn new(grid: &SpaceTimeGrid) -> Self {
        let sp = &grid.space;
        let dt = grid.dt();
        let dt2 = dt * dt;
        Self {
            stride: sp.n2 + 2,
            n1: sp.n1,
            n2: sp.n2,
            cx1: dt2 / (12.0 * sp.dx1() * sp.dx1()),
            cx2: dt2 / (12.0 * sp.dx2() * sp.dx2()),
            dt2,
        }
    }

    /// Interior update `next = 2 u - prev + dt^2 (Lap u - q u^p)`.
    fn step(&self, prev: &[f64], u: &[f64], next: &mut [f64], q: &[f64], p: i32) {
        let s = self.stride;
        for i in 2..self.n1 {
            let row = i * s;
            for c in (row + 2)..(row + self.n2) {
                let uc = u[c];
                let lap1 = -u[c + 2 * s] + 16.0 * u[c + s] - 30.0 * uc + 16.0 * u[c - s]
                    - u[c - 2 * s];
                let lap2 = -u[c + 2] + 16.0 * u[c + 1] - 30.0 * uc + 16.0 * u[c - 1] - u[c - 2];
                next[c] = 2.0 * uc - prev[c] + self.cx1 * lap1 + self.cx2 * lap2
                    - self.dt2 * q[c] * uc.powi(p);
            }
        }
    }

    fn add_forcing(&self, sp: &SpatialGrid, next: &mut [f64], t: f64, forcing: Forcing<'_>) {
        for i in 2..self.n1 {
            let x1 = sp.x1(i);
            for j in 2..self.n2 {
                next[sp.idx(i, j)] += self.dt2 * forcing(x1, sp.x2(j), t);
            }
        }
    }
}

fn check_inputs(grid: &SpaceTimeGrid, q: &PotentialField, f: &BoundaryTrace) -> Result<()> {
    grid.check_cfl()?;
    if q.grid() != &grid.space {
        return Err(Error::ShapeMismatch("potential is sampled on a different grid".into()));
    }
    if f.dims() != (grid.space.n1, grid.space.n2) || f.nt() != grid.nt {
        return Err(Error::ShapeMismatch(format!(
            "boundary trace is {:?}x{}, grid is {}x{}x{}",
            f.dims(),
            f.nt(),
            grid.space.n1,
            grid.space.n2,
            grid.nt
        )));
    }
    Ok(())
}

/// Time-marches the scheme, handing every completed level to `visit`.
fn march(
    grid: &SpaceTimeGrid,
    q: &PotentialField,
    p: u32,
    f: &BoundaryTrace,
    opts: SolverOptions<'_>,
    mut visit: impl FnMut(usize, &[f64]),
) -> Result<()> {
    check_inputs(grid, q, f)?;
    let sp = grid.space;
    let frame_idx: Vec<usize> = f.frame_points().iter().map(|pt| sp.idx(pt.i, pt.j)).collect();
    let apply_frame = |level: &mut [f64], k: usize| {
        for (&ix, &v) in frame_idx.iter().zip(f.frame(k)) {
            level[ix] = v;
        }
    };

    let stencil = Stencil::new(grid);
    let n = sp.padded_len();
    let mut prev = vec![0.0; n];
    let mut curr = vec![0.0; n];
    let mut next = vec![0.0; n];
    apply_frame(&mut prev, 0);
    visit(0, &prev);
    apply_frame(&mut curr, 1);
    visit(1, &curr);

    let guard = opts.guard_interval.max(1);
    let p = p as i32;
    for k in 1..grid.nt - 1 {
        stencil.step(&prev, &curr, &mut next, q.padded(), p);
        if let Some(forcing) = opts.forcing {
            stencil.add_forcing(&sp, &mut next, grid.time(k), forcing);
        }
        apply_frame(&mut next, k + 1);
        if ((k + 1) % guard == 0 || k + 2 == grid.nt) && next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: k + 1 });
        }
        visit(k + 1, &next);
        std::mem::swap(&mut prev, &mut curr);
        std::mem::swap(&mut curr, &mut next);
    }
    Ok(())
}

pub fn solve_forward(
    grid: &SpaceTimeGrid,
    q: &PotentialField,
    p: u32,
    f: &BoundaryTrace,
) -> Result<WaveField> {
    solve_forward_with(grid, q, p, f, SolverOptions::default())
}

pub fn solve_forward_with(
    grid: &SpaceTimeGrid,
    q: &PotentialField,
    p: u32,
    f: &BoundaryTrace,
    opts: SolverOptions<'_>,
) -> Result<WaveField> {
    let n = grid.space.padded_len();
    let mut values = vec![0.0; n * grid.nt];
    march(grid, q, p, f, opts, |k, level| values[k * n..(k + 1) * n].copy_from_slice(level))?;
    Ok(WaveField { grid: *grid, p, values })
}

/// Solves and extracts the DN trace without keeping the space-time history.
pub fn measure_dn(
    grid: &SpaceTimeGrid,
    q: &PotentialField,
    p: u32,
    f: &BoundaryTrace,
) -> Result<DNTrace> {
    measure_dn_with(grid, q, p, f, SolverOptions::default())
}

pub fn measure_dn_with(
    grid: &SpaceTimeGrid,
    q: &PotentialField,
    p: u32,
    f: &BoundaryTrace,
    opts: SolverOptions<'_>,
) -> Result<DNTrace> {
    let sp = grid.space;
    let points = boundary_index_set(sp.n1, sp.n2);
    let mut dn = DNTrace::zeros(sp.n1, sp.n2, grid.nt);
    let nb = points.len();
    march(grid, q, p, f, opts, |k, level| {
        dn_from_level(&sp, &points, level, &mut dn.values[k * nb..(k + 1) * nb]);
    })?;
    Ok(dn)
}

fn dn_from_level(sp: &SpatialGrid, points: &[BoundaryPoint], u: &[f64], out: &mut [f64]) {
    let inv1 = 1.0 / (2.0 * sp.dx1());
    let inv2 = 1.0 / (2.0 * sp.dx2());
    let (n1, n2) = (sp.n1, sp.n2);
    for (o, pt) in out.iter_mut().zip(points) {
        let (i, j) = (pt.i, pt.j);
        *o = match pt.edge {
            Edge::Left => -(u[sp.idx(3, j)] - u[sp.idx(1, j)]) * inv1,
            Edge::Right => (u[sp.idx(n1, j)] - u[sp.idx(n1 - 2, j)]) * inv1,
            Edge::Bottom => -(u[sp.idx(i, 3)] - u[sp.idx(i, 1)]) * inv2,
            Edge::Top => (u[sp.idx(i, n2)] - u[sp.idx(i, n2 - 2)]) * inv2,
        };
    }
}

/// Centered normal differences on the four edges for every time level.
pub fn extract_dn(field: &WaveField) -> DNTrace {
    let sp = field.grid.space;
    let points = boundary_index_set(sp.n1, sp.n2);
    let nb = points.len();
    let mut dn = DNTrace::zeros(sp.n1, sp.n2, field.grid.nt);
    for k in 0..field.grid.nt {
        dn_from_level(&sp, &points, field.level(k), &mut dn.values[k * nb..(k + 1) * nb]);
    }
    dn
}

/// Adds i.i.d. Gaussian noise with standard deviation `sigma * mean(|dn|)`.
pub fn add_noise(dn: &DNTrace, sigma: f64, seed: u64) -> DNTrace {
    let sigma0 = sigma * dn.mean_abs();
    let mut out = dn.clone();
    if sigma0 > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, sigma0).expect("finite standard deviation");
        for v in out.values.iter_mut() {
            *v += normal.sample(&mut rng);
        }
    }
    out.noise = Some(NoiseRecord { sigma, sigma0, seed });
    out
}

/// `20 log10(rms(clean) / rms(noisy - clean))`.
pub fn snr_db(clean: &DNTrace, noisy: &DNTrace) -> f64 {
    let noise_ms = clean
        .values
        .iter()
        .zip(&noisy.values)
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        / clean.values.len() as f64;
    20.0 * (clean.rms() / noise_ms.sqrt()).log10()
}
