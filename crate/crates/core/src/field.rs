//! Scalar fields sampled on a [`SpatialGrid`] with a zero ghost ring.

use crate::grid::SpatialGrid;

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialField {
    grid: SpatialGrid,
    values: Vec<f64>,
}

impl PotentialField {
    pub fn zeros(grid: SpatialGrid) -> Self {
        Self { values: vec![0.0; grid.padded_len()], grid }
    }

    /// Evaluates `f` at every physical node; ghost nodes stay zero.
    pub fn from_fn(grid: SpatialGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut field = Self::zeros(grid);
        for i in 1..=grid.n1 {
            let x1 = grid.x1(i);
            for j in 1..=grid.n2 {
                field.values[grid.idx(i, j)] = f(x1, grid.x2(j));
            }
        }
        field
    }

    /// Average of `f` over `sub x sub` points spread evenly across the cell
    /// centered at each node. Suited to discontinuous functions, whose
    /// point samples misplace edges by up to half a cell.
    pub fn from_fn_cell_average(grid: SpatialGrid, sub: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let sub = sub.max(1);
        let offsets: Vec<f64> = (0..sub).map(|k| (k as f64 + 0.5) / sub as f64 - 0.5).collect();
        let (h1, h2) = (grid.dx1(), grid.dx2());
        let norm = 1.0 / (sub * sub) as f64;
        Self::from_fn(grid, |x1, x2| {
            let mut acc = 0.0;
            for &a in &offsets {
                for &b in &offsets {
                    acc += f(x1 + a * h1, x2 + b * h2);
                }
            }
            acc * norm
        })
    }

    /// Builds a field from node values laid out row-major with `x2` fastest
    /// (`values[(i-1) * n2 + (j-1)]`).
    pub fn from_nodes(grid: SpatialGrid, nodes: &[f64]) -> Option<Self> {
        if nodes.len() != grid.n1 * grid.n2 {
            return None;
        }
        let mut field = Self::zeros(grid);
        for i in 1..=grid.n1 {
            for j in 1..=grid.n2 {
                field.values[grid.idx(i, j)] = nodes[(i - 1) * grid.n2 + (j - 1)];
            }
        }
        Some(field)
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    /// Padded storage, including ghost nodes.
    pub fn padded(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.grid.idx(i, j);
        self.values[k] = v;
    }

    /// Node values without ghosts, `x2` fastest.
    pub fn nodes(&self) -> Vec<f64> {
        let g = &self.grid;
        let mut out = Vec::with_capacity(g.n1 * g.n2);
        for i in 1..=g.n1 {
            for j in 1..=g.n2 {
                out.push(self.get(i, j));
            }
        }
        out
    }

    /// Bilinear interpolation of node values; zero outside the rectangle.
    pub fn interpolate(&self, x1: f64, x2: f64) -> f64 {
        let g = &self.grid;
        if !g.contains(x1, x2) {
            return 0.0;
        }
        let s1 = (x1 - g.a1) / g.dx1();
        let s2 = (x2 - g.a2) / g.dx2();
        let i0 = (s1.floor() as usize).min(g.n1 - 2);
        let j0 = (s2.floor() as usize).min(g.n2 - 2);
        let f1 = s1 - i0 as f64;
        let f2 = s2 - j0 as f64;
        // array index = node index + 1
        let (i, j) = (i0 + 1, j0 + 1);
        let v00 = self.get(i, j);
        let v10 = self.get(i + 1, j);
        let v01 = self.get(i, j + 1);
        let v11 = self.get(i + 1, j + 1);
        (1.0 - f1) * ((1.0 - f2) * v00 + f2 * v01) + f1 * ((1.0 - f2) * v10 + f2 * v11)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Riemann sum of the node values times the cell area.
    pub fn integral(&self) -> f64 {
        let g = &self.grid;
        self.nodes().iter().sum::<f64>() * g.dx1() * g.dx2()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| c * v).collect() }
    }

    /// Pointwise sum; `None` if the grids differ.
    pub fn add(&self, other: &Self) -> Option<Self> {
        if self.grid != other.grid {
            return None;
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Some(Self { grid: self.grid, values })
    }
}
