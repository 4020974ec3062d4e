//! Uniform discretization of the rectangle `[a1,b1] x [a2,b2]` and the
//! time interval `[0,T]`.
//!
//! Array indices follow the ghost-layer convention used by the solver:
//! index `0` and `n+1` are ghost nodes one cell outside the rectangle, and
//! nodes `1..=n` are the physical grid points, so `x(i) = a + (i-1) dx`.
//! Time levels are zero-based: `t(k) = k dt` for `k in 0..nt`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stability bound for the explicit scheme.
pub const CFL_LIMIT: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Spatial part of a grid: a rectangle sampled at `n1 x n2` nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    pub n1: usize,
    pub n2: usize,
}

impl SpatialGrid {
    pub fn new(a1: f64, b1: f64, a2: f64, b2: f64, n1: usize, n2: usize) -> Result<Self> {
        if !(a1 < b1) || !(a2 < b2) {
            return Err(Error::InvalidGrid(format!(
                "bounds must satisfy a1 < b1 and a2 < b2, got [{a1}, {b1}] x [{a2}, {b2}]"
            )));
        }
        if n1 < 2 || n2 < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 nodes per axis, got {n1} x {n2}"
            )));
        }
        Ok(Self { a1, b1, a2, b2, n1, n2 })
    }

    /// Square grid `[-half, half]^2` with `n` nodes per axis.
    pub fn centered_square(half: f64, n: usize) -> Result<Self> {
        Self::new(-half, half, -half, half, n, n)
    }

    pub fn dx1(&self) -> f64 {
        (self.b1 - self.a1) / (self.n1 - 1) as f64
    }

    pub fn dx2(&self) -> f64 {
        (self.b2 - self.a2) / (self.n2 - 1) as f64
    }

    /// Coordinate of array index `i` along the first axis (ghost-aware).
    pub fn x1(&self, i: usize) -> f64 {
        self.a1 + (i as f64 - 1.0) * self.dx1()
    }

    pub fn x2(&self, j: usize) -> f64 {
        self.a2 + (j as f64 - 1.0) * self.dx2()
    }

    /// Padded array extents including one ghost layer on each side.
    pub fn padded_dims(&self) -> (usize, usize) {
        (self.n1 + 2, self.n2 + 2)
    }

    pub fn padded_len(&self) -> usize {
        (self.n1 + 2) * (self.n2 + 2)
    }

    /// Flat offset of array index `(i, j)`; `j` is the fast axis.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.n2 + 2) + j
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.a1 + self.b1), 0.5 * (self.a2 + self.b2))
    }

    /// Radius of the smallest ball containing the rectangle (half diagonal).
    pub fn enclosing_radius(&self) -> f64 {
        0.5 * (self.b1 - self.a1).hypot(self.b2 - self.a2)
    }

    pub fn contains(&self, x1: f64, x2: f64) -> bool {
        x1 >= self.a1 && x1 <= self.b1 && x2 >= self.a2 && x2 <= self.b2
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * ((self.b1 - self.a1) + (self.b2 - self.a2))
    }
}

/// Space-time grid for `Omega x [0, T]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeGrid {
    pub space: SpatialGrid,
    pub t_final: f64,
    pub nt: usize,
}

impl SpaceTimeGrid {
    pub fn new(space: SpatialGrid, t_final: f64, nt: usize) -> Result<Self> {
        if space.n1 < 5 || space.n2 < 5 {
            return Err(Error::InvalidGrid(format!(
                "the fourth-order stencil needs at least 5 nodes per axis, got {} x {}",
                space.n1, space.n2
            )));
        }
        if nt < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 time levels, got {nt}")));
        }
        if !(t_final > 0.0) || !t_final.is_finite() {
            return Err(Error::InvalidGrid(format!("final time must be positive, got {t_final}")));
        }
        Ok(Self { space, t_final, nt })
    }

    /// `[-half, half]^2 x [0, T]` with `n` spatial nodes per axis.
    pub fn centered_square(half: f64, n: usize, t_final: f64, nt: usize) -> Result<Self> {
        Self::new(SpatialGrid::centered_square(half, n)?, t_final, nt)
    }

    pub fn dt(&self) -> f64 {
        self.t_final / (self.nt - 1) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    /// `c = dt/dx1 + dt/dx2`.
    pub fn cfl(&self) -> f64 {
        let dt = self.dt();
        dt / self.space.dx1() + dt / self.space.dx2()
    }

    pub fn check_cfl(&self) -> Result<()> {
        let cfl = self.cfl();
        if cfl > CFL_LIMIT {
            Err(Error::CflViolation { cfl, bound: CFL_LIMIT })
        } else {
            Ok(())
        }
    }

    pub fn admissible_window(&self, margin: f64) -> Result<AdmissibleWindow> {
        admissible_window(self, margin)
    }
}

/// Time interval `(t1, t2)` inside which reconstruction points are reachable
/// from and observable at the lateral boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdmissibleWindow {
    pub r: f64,
    pub t1: f64,
    pub t2: f64,
}

impl AdmissibleWindow {
    pub fn contains(&self, t: f64) -> bool {
        t > self.t1 && t < self.t2
    }
}

pub fn admissible_window(grid: &SpaceTimeGrid, margin: f64) -> Result<AdmissibleWindow> {
    let r = grid.space.enclosing_radius();
    let t_final = grid.t_final;
    if t_final <= 4.0 * r {
        return Err(Error::InadmissibleGeometry { t_final, four_r: 4.0 * r });
    }
    let t1 = 2.0 * r + margin;
    let t2 = t_final - 2.0 * r - margin;
    if t1 >= t2 {
        return Err(Error::InvalidConfig(format!(
            "margin {margin} leaves an empty admissible window"
        )));
    }
    Ok(AdmissibleWindow { r, t1, t2 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Edge {
    /// `x1 = a1`
    Left,
    /// `x1 = b1`
    Right,
    /// `x2 = a2`
    Bottom,
    /// `x2 = b2`
    Top,
}

impl Edge {
    /// Outward unit normal.
    pub fn normal(self) -> (f64, f64) {
        match self {
            Edge::Left => (-1.0, 0.0),
            Edge::Right => (1.0, 0.0),
            Edge::Bottom => (0.0, -1.0),
            Edge::Top => (0.0, 1.0),
        }
    }
}

/// One node of a rectangular ring of the padded array.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryPoint {
    pub edge: Edge,
    /// Array index along the edge (`j` for left/right, `i` for bottom/top).
    pub along: usize,
    pub i: usize,
    pub j: usize,
}

/// Nodes of ring `layer` of the padded `(n1+2) x (n2+2)` array: layer 0 is
/// the ghost ring, layer 1 the physical boundary. Corners belong to the
/// left/right (x1-constant) edges. Order: left, right, bottom, top, each in
/// increasing along-edge index.
pub fn ring(n1: usize, n2: usize, layer: usize) -> Vec<BoundaryPoint> {
    assert!(layer <= 1, "only the ghost (0) and boundary (1) rings exist");
    let lo1 = layer;
    let hi1 = n1 + 1 - layer;
    let lo2 = layer;
    let hi2 = n2 + 1 - layer;
    let mut out = Vec::with_capacity(2 * (hi2 - lo2 + 1) + 2 * (hi1 - lo1).saturating_sub(1));
    for (edge, i) in [(Edge::Left, lo1), (Edge::Right, hi1)] {
        for j in lo2..=hi2 {
            out.push(BoundaryPoint { edge, along: j, i, j });
        }
    }
    for (edge, j) in [(Edge::Bottom, lo2), (Edge::Top, hi2)] {
        for i in (lo1 + 1)..hi1 {
            out.push(BoundaryPoint { edge, along: i, i, j });
        }
    }
    out
}

/// Canonical enumeration of the physical boundary nodes, each exactly once.
pub fn boundary_index_set(n1: usize, n2: usize) -> Vec<BoundaryPoint> {
    ring(n1, n2, 1)
}
