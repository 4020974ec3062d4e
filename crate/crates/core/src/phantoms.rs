//! Analytic test potentials and their sampling on grids.
//!
//! A [`PhantomSpec`] is a sum of simple terms. The presets `example1` ..
//! `example4` are the four reference potentials used by the shipped
//! experiment configs. Their exact centers and axes are defaults chosen
//! inside the reconstruction window `[-0.2828, 0.2828]^2`; they can be
//! overridden from a config file.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PotentialField;
use crate::grid::SpatialGrid;

/// Half-width of the default reconstruction window.
pub const RECON_HALF_WIDTH: f64 = 0.2828;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhantomTerm {
    /// `amplitude * exp(1 / (u^2 + v^2 - 1))` inside the ellipse, where
    /// `(u, v)` are the rotated, axis-normalized coordinates.
    EllipseBump {
        center: [f64; 2],
        semi_axes: [f64; 2],
        #[serde(default)]
        rotation_deg: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    PolygonIndicator {
        vertices: Vec<[f64; 2]>,
        #[serde(default = "one")]
        amplitude: f64,
    },
    RectIndicator {
        min: [f64; 2],
        max: [f64; 2],
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `sin(4 pi k x1) sin(4 pi k x2)` on a rectangle.
    SinCheckerboard { k: f64, min: [f64; 2], max: [f64; 2] },
}

fn one() -> f64 {
    1.0
}

impl PhantomTerm {
    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        match self {
            PhantomTerm::EllipseBump { center, semi_axes, rotation_deg, amplitude } => {
                let (s, c) = rotation_deg.to_radians().sin_cos();
                let dx = x1 - center[0];
                let dy = x2 - center[1];
                let u = (c * dx + s * dy) / semi_axes[0];
                let v = (-s * dx + c * dy) / semi_axes[1];
                let rho = u * u + v * v;
                if rho < 1.0 {
                    amplitude * (1.0 / (rho - 1.0)).exp()
                } else {
                    0.0
                }
            }
            PhantomTerm::PolygonIndicator { vertices, amplitude } => {
                if point_in_polygon(vertices, x1, x2) {
                    *amplitude
                } else {
                    0.0
                }
            }
            PhantomTerm::RectIndicator { min, max, amplitude } => {
                if in_rect(min, max, x1, x2) {
                    *amplitude
                } else {
                    0.0
                }
            }
            PhantomTerm::SinCheckerboard { k, min, max } => {
                if in_rect(min, max, x1, x2) {
                    let w = 4.0 * std::f64::consts::PI * k;
                    (w * x1).sin() * (w * x2).sin()
                } else {
                    0.0
                }
            }
        }
    }

    /// Axis-aligned bounding box `(min, max)` of the support.
    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        match self {
            PhantomTerm::EllipseBump { center, semi_axes, rotation_deg, .. } => {
                let (s, c) = rotation_deg.to_radians().sin_cos();
                let (a, b) = (semi_axes[0], semi_axes[1]);
                let hx = ((a * c).powi(2) + (b * s).powi(2)).sqrt();
                let hy = ((a * s).powi(2) + (b * c).powi(2)).sqrt();
                ([center[0] - hx, center[1] - hy], [center[0] + hx, center[1] + hy])
            }
            PhantomTerm::PolygonIndicator { vertices, .. } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in vertices {
                    for d in 0..2 {
                        lo[d] = lo[d].min(v[d]);
                        hi[d] = hi[d].max(v[d]);
                    }
                }
                (lo, hi)
            }
            PhantomTerm::RectIndicator { min, max, .. }
            | PhantomTerm::SinCheckerboard { min, max, .. } => (*min, *max),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            PhantomTerm::EllipseBump { semi_axes, .. } => {
                if !(semi_axes[0] > 0.0 && semi_axes[1] > 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "ellipse semi-axes must be positive, got {semi_axes:?}"
                    )));
                }
            }
            PhantomTerm::PolygonIndicator { vertices, .. } => {
                if vertices.len() < 3 {
                    return Err(Error::InvalidConfig("polygon needs at least 3 vertices".into()));
                }
                if !polygon_is_simple(vertices) {
                    return Err(Error::InvalidConfig("polygon is self-intersecting".into()));
                }
            }
            PhantomTerm::RectIndicator { min, max, .. }
            | PhantomTerm::SinCheckerboard { min, max, .. } => {
                if !(min[0] < max[0] && min[1] < max[1]) {
                    return Err(Error::InvalidConfig(format!(
                        "empty rectangle {min:?}..{max:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn rotated(&self, angle_deg: f64) -> Self {
        let (s, c) = angle_deg.to_radians().sin_cos();
        let rot = |p: [f64; 2]| [c * p[0] - s * p[1], s * p[0] + c * p[1]];
        match self {
            PhantomTerm::EllipseBump { center, semi_axes, rotation_deg, amplitude } => {
                PhantomTerm::EllipseBump {
                    center: rot(*center),
                    semi_axes: *semi_axes,
                    rotation_deg: rotation_deg + angle_deg,
                    amplitude: *amplitude,
                }
            }
            PhantomTerm::PolygonIndicator { vertices, amplitude } => {
                PhantomTerm::PolygonIndicator {
                    vertices: vertices.iter().map(|v| rot(*v)).collect(),
                    amplitude: *amplitude,
                }
            }
            PhantomTerm::RectIndicator { min, max, amplitude } => {
                let v = vec![*min, [max[0], min[1]], *max, [min[0], max[1]]];
                PhantomTerm::PolygonIndicator {
                    vertices: v.into_iter().map(rot).collect(),
                    amplitude: *amplitude,
                }
            }
            other => other.clone(),
        }
    }
}

fn in_rect(min: &[f64; 2], max: &[f64; 2], x1: f64, x2: f64) -> bool {
    x1 >= min[0] && x1 <= max[0] && x2 >= min[1] && x2 <= max[1]
}

/// Even-odd ray casting.
fn point_in_polygon(vertices: &[[f64; 2]], x: f64, y: f64) -> bool {
    let n = vertices.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = (vertices[i][0], vertices[i][1]);
        let (xj, yj) = (vertices[j][0], vertices[j][1]);
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn segments_cross(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let orient = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    };
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

fn polygon_is_simple(v: &[[f64; 2]]) -> bool {
    let n = v.len();
    for a in 0..n {
        for b in (a + 2)..n {
            if a == 0 && b == n - 1 {
                continue;
            }
            if segments_cross(v[a], v[(a + 1) % n], v[b], v[(b + 1) % n]) {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub terms: Vec<PhantomTerm>,
}

impl PhantomSpec {
    pub fn new(terms: Vec<PhantomTerm>) -> Self {
        Self { terms }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(x1, x2)).sum()
    }

    /// Checks term parameters and that every support lies strictly inside
    /// the rectangle.
    pub fn validate(&self, domain: &SpatialGrid) -> Result<()> {
        for term in &self.terms {
            term.validate()?;
            let (lo, hi) = term.bounding_box();
            if !(lo[0] > domain.a1 && hi[0] < domain.b1 && lo[1] > domain.a2 && hi[1] < domain.b2)
            {
                return Err(Error::InvalidConfig(format!(
                    "phantom term support {lo:?}..{hi:?} is not strictly inside the domain"
                )));
            }
        }
        Ok(())
    }

    /// Same phantom rotated about the origin by `angle_deg`.
    pub fn rotated(&self, angle_deg: f64) -> Self {
        Self { terms: self.terms.iter().map(|t| t.rotated(angle_deg)).collect() }
    }

    pub fn sample(&self, grid: &SpatialGrid) -> PotentialField {
        sample_phantom(self, grid)
    }

    /// Single tilted smooth ellipse bump.
    pub fn example1() -> Self {
        Self::new(vec![PhantomTerm::EllipseBump {
            center: [0.05, 0.03],
            semi_axes: [0.16, 0.10],
            rotation_deg: 30.0,
            amplitude: 1.0,
        }])
    }

    /// Positive disc bump minus two ellipse bumps tilted by +-22.5 degrees
    /// from the vertical axis.
    pub fn example2() -> Self {
        Self::new(vec![
            PhantomTerm::EllipseBump {
                center: [0.0, 0.16],
                semi_axes: [0.09, 0.09],
                rotation_deg: 0.0,
                amplitude: 1.0,
            },
            // semi_axes = (horizontal, vertical) before rotation
            PhantomTerm::EllipseBump {
                center: [-0.13, -0.06],
                semi_axes: [0.065, 0.15],
                rotation_deg: -22.5,
                amplitude: -1.0,
            },
            PhantomTerm::EllipseBump {
                center: [0.13, -0.06],
                semi_axes: [0.065, 0.15],
                rotation_deg: 22.5,
                amplitude: -1.0,
            },
        ])
    }

    /// Indicator of an L-shaped set in the lower-left quadrant plus a disc
    /// bump in the upper right.
    pub fn example3() -> Self {
        Self::new(vec![
            PhantomTerm::PolygonIndicator {
                vertices: default_l_shape(),
                amplitude: 1.0,
            },
            PhantomTerm::EllipseBump {
                center: [0.12, 0.12],
                semi_axes: [0.1, 0.1],
                rotation_deg: 0.0,
                amplitude: 1.0,
            },
        ])
    }

    /// `sin(4 pi k x1) sin(4 pi k x2)` on `[-1/4, 1/4]^2`.
    pub fn example4(k: f64) -> Self {
        Self::new(vec![PhantomTerm::SinCheckerboard { k, min: [-0.25, -0.25], max: [0.25, 0.25] }])
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "zero" => Some(Self::zero()),
            "example1" => Some(Self::example1()),
            "example2" => Some(Self::example2()),
            "example3" => Some(Self::example3()),
            "example4_k2" => Some(Self::example4(2.0)),
            "example4_k3" => Some(Self::example4(3.0)),
            "example4_k4" => Some(Self::example4(4.0)),
            "example4_k5" => Some(Self::example4(5.0)),
            _ => None,
        }
    }
}

/// Vertices of the default L: a 0.20-wide vertical bar and a 0.22-long
/// horizontal bar meeting in the lower-left corner.
pub fn default_l_shape() -> Vec<[f64; 2]> {
    vec![
        [-0.24, -0.24],
        [-0.02, -0.24],
        [-0.02, -0.15],
        [-0.15, -0.15],
        [-0.15, 0.02],
        [-0.24, 0.02],
    ]
}

pub fn eval_phantom(spec: &PhantomSpec, x1: f64, x2: f64) -> f64 {
    spec.eval(x1, x2)
}

pub fn sample_phantom(spec: &PhantomSpec, grid: &SpatialGrid) -> PotentialField {
    PotentialField::from_fn(*grid, |x1, x2| spec.eval(x1, x2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_disc_bump() -> PhantomSpec {
        PhantomSpec::new(vec![PhantomTerm::EllipseBump {
            center: [0.0, 0.0],
            semi_axes: [1.0, 1.0],
            rotation_deg: 0.0,
            amplitude: 1.0,
        }])
    }

    #[test]
    fn bump_values() {
        let b = unit_disc_bump();
        assert!((b.eval(0.0, 0.0) - (-1.0_f64).exp()).abs() < 1e-15);
        assert_eq!(b.eval(1.0, 0.0), 0.0);
        assert_eq!(b.eval(0.6, 0.8), 0.0);
        assert!(b.eval(0.59, 0.8) > 0.0);
    }

    #[test]
    fn checkerboard_value() {
        let s = PhantomSpec::example4(2.0);
        assert!((s.eval(1.0 / 16.0, 1.0 / 16.0) - 1.0).abs() < 1e-12);
        assert_eq!(s.eval(0.3, 0.0), 0.0);
    }

    #[test]
    fn zero_spec_samples_to_zero() {
        let g = SpatialGrid::centered_square(0.5, 20).unwrap();
        assert_eq!(PhantomSpec::zero().sample(&g).max_abs(), 0.0);
    }

    #[test]
    fn example2_sign_pattern() {
        let spec = PhantomSpec::example2();
        let g = SpatialGrid::centered_square(0.5, 80).unwrap();
        let f = spec.sample(&g);
        for term in &spec.terms {
            if let PhantomTerm::EllipseBump { center, amplitude, .. } = term {
                let v = f.interpolate(center[0], center[1]);
                assert_eq!(v.signum(), amplitude.signum(), "center {center:?}");
                assert!(v.abs() > 0.2);
            }
        }
    }

    #[test]
    fn presets_are_valid_and_bounded() {
        let g = SpatialGrid::centered_square(0.5, 80).unwrap();
        for name in ["example1", "example2", "example3", "example4_k2", "example4_k5"] {
            let spec = PhantomSpec::preset(name).unwrap();
            spec.validate(&g).unwrap();
            let f = spec.sample(&g);
            assert!(f.max_abs() <= 1.0, "{name}");
            // zero on the boundary ring
            for p in crate::grid::boundary_index_set(g.n1, g.n2) {
                assert_eq!(f.get(p.i, p.j), 0.0);
            }
            let (lo, hi) = spec
                .terms
                .iter()
                .map(|t| t.bounding_box())
                .fold(([1.0f64; 2], [-1.0f64; 2]), |(lo, hi), (a, b)| {
                    ([lo[0].min(a[0]), lo[1].min(a[1])], [hi[0].max(b[0]), hi[1].max(b[1])])
                });
            for d in 0..2 {
                assert!(lo[d] >= -RECON_HALF_WIDTH && hi[d] <= RECON_HALF_WIDTH, "{name}");
            }
        }
    }

    #[test]
    fn rejects_bad_terms() {
        let g = SpatialGrid::centered_square(0.5, 20).unwrap();
        let flat = PhantomSpec::new(vec![PhantomTerm::EllipseBump {
            center: [0.0, 0.0],
            semi_axes: [0.0, 0.1],
            rotation_deg: 0.0,
            amplitude: 1.0,
        }]);
        assert!(flat.validate(&g).is_err());
        let bowtie = PhantomSpec::new(vec![PhantomTerm::PolygonIndicator {
            vertices: vec![[0.0, 0.0], [0.1, 0.1], [0.1, 0.0], [0.0, 0.1]],
            amplitude: 1.0,
        }]);
        assert!(bowtie.validate(&g).is_err());
        let outside = PhantomSpec::new(vec![PhantomTerm::RectIndicator {
            min: [0.3, 0.3],
            max: [0.6, 0.4],
            amplitude: 1.0,
        }]);
        assert!(outside.validate(&g).is_err());
    }

    #[test]
    fn l_shape_membership() {
        let spec = PhantomSpec::example3();
        assert_eq!(spec.eval(-0.2, -0.2), 1.0);
        assert_eq!(spec.eval(-0.05, -0.2), 1.0);
        assert_eq!(spec.eval(-0.2, 0.0), 1.0);
        assert_eq!(spec.eval(-0.05, -0.05), 0.0);
    }

    proptest! {
        #[test]
        fn sampling_is_linear(seed_pts in prop::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 5)) {
            let g = SpatialGrid::centered_square(0.5, 33).unwrap();
            let spec = PhantomSpec::example2();
            let whole = spec.sample(&g);
            let mut sum = PotentialField::zeros(g);
            for t in &spec.terms {
                sum = sum.add(&PhantomSpec::new(vec![t.clone()]).sample(&g)).unwrap();
            }
            for i in 0..whole.padded().len() {
                prop_assert!((whole.padded()[i] - sum.padded()[i]).abs() < 1e-14);
            }
            // random off-node spot check of eval vs sampled node values
            for (x, y) in seed_pts {
                let i = ((x - g.a1) / g.dx1()).round() as usize + 1;
                let j = ((y - g.a2) / g.dx2()).round() as usize + 1;
                prop_assert_eq!(whole.get(i, j), spec.eval(g.x1(i), g.x2(j)));
            }
        }

        #[test]
        fn ellipse_rotation_invariance(
            angle in -180.0f64..180.0,
            x in -0.4f64..0.4,
            y in -0.4f64..0.4,
        ) {
            let spec = PhantomSpec::example1();
            let rotated = spec.rotated(angle);
            let (s, c) = angle.to_radians().sin_cos();
            let (xr, yr) = (c * x - s * y, s * x + c * y);
            prop_assert!((spec.eval(x, y) - rotated.eval(xr, yr)).abs() < 1e-12);
        }
    }
}
