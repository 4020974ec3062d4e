//! Parallel-beam Radon transform of a sampled field and filtered
//! backprojection with the Ram-Lak filter.
//!
//! Angles are in degrees. The line for `(theta, eta)` is
//! `{x : x . theta = eta}` with `theta = (cos, sin)`.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::field::PotentialField;
use crate::grid::SpatialGrid;
use crate::sources::direction;

const SPACING_TOL: f64 = 1e-9;

/// Radon-domain data. Rows are offsets, columns are angles.
#[derive(Clone, Debug, PartialEq)]
pub struct Sinogram {
    angles_deg: Vec<f64>,
    offsets: Vec<f64>,
    values: Vec<f64>,
}

fn check_uniform(name: &str, v: &[f64]) -> Result<()> {
    if v.len() < 2 {
        return Ok(());
    }
    let step = v[1] - v[0];
    if !(step > 0.0) {
        return Err(Error::InvalidConfig(format!("{name} must be increasing")));
    }
    for w in v.windows(2) {
        if ((w[1] - w[0]) - step).abs() > SPACING_TOL * step.abs().max(1.0) {
            return Err(Error::InvalidConfig(format!("{name} must be uniformly spaced")));
        }
    }
    Ok(())
}

impl Sinogram {
    pub fn new(angles_deg: Vec<f64>, offsets: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if angles_deg.is_empty() || offsets.is_empty() {
            return Err(Error::InvalidConfig("sinogram needs angles and offsets".into()));
        }
        check_uniform("angles", &angles_deg)?;
        check_uniform("offsets", &offsets)?;
        if values.len() != angles_deg.len() * offsets.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {} offsets x {} angles",
                values.len(),
                offsets.len(),
                angles_deg.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("sinogram values must be finite".into()));
        }
        Ok(Self { angles_deg, offsets, values })
    }

    pub fn zeros(angles_deg: Vec<f64>, offsets: Vec<f64>) -> Result<Self> {
        let n = angles_deg.len() * offsets.len();
        Self::new(angles_deg, offsets, vec![0.0; n])
    }

    /// Assembles a sinogram from one column per angle.
    pub fn from_columns(angles_deg: Vec<f64>, offsets: Vec<f64>, columns: &[Vec<f64>]) -> Result<Self> {
        if columns.len() != angles_deg.len() || columns.iter().any(|c| c.len() != offsets.len()) {
            return Err(Error::ShapeMismatch("column count or length does not match the axes".into()));
        }
        let na = angles_deg.len();
        let mut values = vec![0.0; na * offsets.len()];
        for (a, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                values[i * na + a] = v;
            }
        }
        Self::new(angles_deg, offsets, values)
    }

    pub fn angles_deg(&self) -> &[f64] {
        &self.angles_deg
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Row-major values, offsets by angles.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_angles(&self) -> usize {
        self.angles_deg.len()
    }

    pub fn n_offsets(&self) -> usize {
        self.offsets.len()
    }

    pub fn get(&self, offset: usize, angle: usize) -> f64 {
        self.values[offset * self.n_angles() + angle]
    }

    pub fn column(&self, angle: usize) -> Vec<f64> {
        (0..self.n_offsets()).map(|i| self.get(i, angle)).collect()
    }

    /// Physical offset spacing; zero for a single offset.
    pub fn offset_spacing(&self) -> f64 {
        if self.offsets.len() < 2 {
            0.0
        } else {
            (self.offsets[self.offsets.len() - 1] - self.offsets[0]) / (self.offsets.len() - 1) as f64
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { values: self.values.iter().map(|v| c * v).collect(), ..self.clone() }
    }

    /// `||self - reference|| / ||reference||` over all entries.
    pub fn relative_l2(&self, reference: &Sinogram) -> Result<f64> {
        if self.values.len() != reference.values.len() {
            return Err(Error::ShapeMismatch("sinograms have different sizes".into()));
        }
        Ok(crate::metrics::relative_l2(&self.values, &reference.values))
    }
}

/// `n` equally spaced offsets covering `[lo, hi]`.
pub fn uniform_offsets(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// `n` angles starting at `start` with spacing `step`, in degrees.
pub fn angle_range(start: f64, step: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| start + step * i as f64).collect()
}

/// Half-length of the integration segment: distance from the origin to
/// the farthest corner of the rectangle.
fn reach(grid: &SpatialGrid) -> f64 {
    let xs = [grid.a1.abs(), grid.b1.abs()];
    let ys = [grid.a2.abs(), grid.b2.abs()];
    xs[0].max(xs[1]).hypot(ys[0].max(ys[1]))
}

/// Line integral of the bilinearly interpolated field along `x . theta = eta`.
pub fn line_integral(q: &PotentialField, theta_deg: f64, eta: f64) -> f64 {
    let g = q.grid();
    let rho = reach(g);
    let step = 0.5 * g.dx1().min(g.dx2());
    let n = (2.0 * rho / step).ceil() as usize;
    let ds = 2.0 * rho / n as f64;
    let (c, s) = direction(theta_deg);
    let (bx, by) = (eta * c, eta * s);
    let mut sum = 0.0;
    for k in 0..n {
        let t = -rho + (k as f64 + 0.5) * ds;
        sum += q.interpolate(bx - t * s, by + t * c);
    }
    sum * ds
}

/// Sinogram oracle of a sampled field.
pub fn forward_radon(q: &PotentialField, angles_deg: &[f64], offsets: &[f64]) -> Result<Sinogram> {
    let columns: Vec<Vec<f64>> = angles_deg
        .par_iter()
        .map(|&theta| offsets.iter().map(|&eta| line_integral(q, theta, eta)).collect())
        .collect();
    Sinogram::from_columns(angles_deg.to_vec(), offsets.to_vec(), &columns)
}

/// Per-angle `sum_eta R(theta, eta) d_eta`.
pub fn sinogram_mass_check(sino: &Sinogram) -> Vec<f64> {
    let d = sino.offset_spacing();
    (0..sino.n_angles()).map(|a| sino.column(a).iter().sum::<f64>() * d).collect()
}

/// Frequency response of the band-limited ramp, obtained from the
/// spatial Ram-Lak kernel sampled at the offset spacing.
fn ramp_response(m: usize, d_eta: f64) -> Vec<f64> {
    let mut kernel = vec![Complex64::new(0.0, 0.0); m];
    kernel[0] = Complex64::new(1.0 / (4.0 * d_eta * d_eta), 0.0);
    for k in 1..=m / 2 {
        if k % 2 == 1 {
            let v = -1.0 / (std::f64::consts::PI.powi(2) * (k * k) as f64 * d_eta * d_eta);
            kernel[k] = Complex64::new(v, 0.0);
            kernel[m - k] = Complex64::new(v, 0.0);
        }
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut kernel);
    kernel.iter().map(|c| c.re).collect()
}

/// Ramp-filtered projections, one per angle.
pub fn filter_projections(sino: &Sinogram) -> Vec<Vec<f64>> {
    let n = sino.n_offsets();
    let d = sino.offset_spacing();
    let m = (2 * n).next_power_of_two();
    let response = ramp_response(m, d);
    let fft = FftPlanner::new().plan_fft_forward(m);
    let ifft = FftPlanner::new().plan_fft_inverse(m);
    (0..sino.n_angles())
        .map(|a| {
            let mut buf = vec![Complex64::new(0.0, 0.0); m];
            for (i, v) in sino.column(a).into_iter().enumerate() {
                buf[i].re = v;
            }
            fft.process(&mut buf);
            for (c, r) in buf.iter_mut().zip(&response) {
                *c *= *r;
            }
            ifft.process(&mut buf);
            // 1/m from the inverse FFT, d from the convolution sum
            let scale = d / m as f64;
            buf[..n].iter().map(|c| c.re * scale).collect()
        })
        .collect()
}

/// Filtered backprojection onto the nodes of `out`.
pub fn fbp(sino: &Sinogram, out: &SpatialGrid) -> Result<PotentialField> {
    let na = sino.n_angles();
    if na < 2 {
        return Err(Error::DegenerateSinogram(na));
    }
    if sino.n_offsets() < 2 {
        return Err(Error::InvalidConfig("backprojection needs at least two offsets".into()));
    }
    let filtered = filter_projections(sino);
    let dirs: Vec<(f64, f64)> = sino.angles_deg().iter().map(|&a| direction(a)).collect();
    let eta0 = sino.offsets()[0];
    let d = sino.offset_spacing();
    let last = sino.n_offsets() - 1;
    let scale = std::f64::consts::PI / na as f64;
    let rows: Vec<Vec<f64>> = (1..=out.n1)
        .into_par_iter()
        .map(|i| {
            let x1 = out.x1(i);
            (1..=out.n2)
                .map(|j| {
                    let x2 = out.x2(j);
                    let mut acc = 0.0;
                    for (proj, &(c, s)) in filtered.iter().zip(&dirs) {
                        let u = (x1 * c + x2 * s - eta0) / d;
                        if u < 0.0 || u > last as f64 {
                            continue;
                        }
                        let k = (u.floor() as usize).min(last - 1);
                        let f = u - k as f64;
                        acc += (1.0 - f) * proj[k] + f * proj[k + 1];
                    }
                    acc * scale
                })
                .collect()
        })
        .collect();
    let nodes: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(PotentialField::from_nodes(*out, &nodes).expect("node count matches grid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantoms::{PhantomSpec, PhantomTerm};
    use proptest::prelude::*;

    fn paper_grid() -> SpatialGrid {
        SpatialGrid::centered_square(0.5, 80).unwrap()
    }

    fn disc(grid: SpatialGrid, c: [f64; 2], r: f64) -> PotentialField {
        PotentialField::from_fn_cell_average(grid, 4, |x, y| if (x - c[0]).hypot(y - c[1]) < r { 1.0 } else { 0.0 })
    }

    fn bump(center: [f64; 2], semi_axes: [f64; 2], rotation_deg: f64) -> PhantomSpec {
        PhantomSpec::new(vec![PhantomTerm::EllipseBump { center, semi_axes, rotation_deg, amplitude: 1.0 }])
    }

    #[test]
    fn disc_chords() {
        let r = 0.4;
        let q = disc(paper_grid(), [0.0, 0.0], r);
        let offsets = uniform_offsets(-0.8 * r, 0.8 * r, 41);
        let angles = angle_range(0.0, 7.5, 24);
        let sino = forward_radon(&q, &angles, &offsets).unwrap();
        let mut worst = 0.0f64;
        for (i, &eta) in offsets.iter().enumerate() {
            let exact = 2.0 * (r * r - eta * eta).sqrt();
            for a in 0..angles.len() {
                worst = worst.max((sino.get(i, a) - exact).abs() / exact);
            }
        }
        assert!(worst <= 0.02, "worst relative chord error {worst}");
    }

    #[test]
    fn zero_field() {
        let q = PotentialField::zeros(paper_grid());
        let sino = forward_radon(&q, &angle_range(0.0, 10.0, 18), &uniform_offsets(-0.4, 0.4, 9)).unwrap();
        assert_eq!(sino.max_abs(), 0.0);
        assert!(sinogram_mass_check(&sino).iter().all(|&m| m == 0.0));
        let img = fbp(&sino, &SpatialGrid::centered_square(0.3, 20).unwrap()).unwrap();
        assert_eq!(img.max_abs(), 0.0);
    }

    #[test]
    fn opposite_line_symmetry() {
        let q = PhantomSpec::example2().sample(&paper_grid());
        let offsets = uniform_offsets(-0.4, 0.4, 17);
        let angles = angle_range(0.0, 15.0, 24);
        let sino = forward_radon(&q, &angles, &offsets).unwrap();
        let n = offsets.len();
        for a in 0..12 {
            for i in 0..n {
                let d = (sino.get(i, a) - sino.get(n - 1 - i, a + 12)).abs();
                assert!(d <= 1e-3 * sino.max_abs(), "angle {a} offset {i}: {d}");
            }
        }
    }

    #[test]
    fn mass_is_angle_independent() {
        let grid = paper_grid();
        let q = PhantomSpec::example1().sample(&grid);
        let offsets = uniform_offsets(-0.49, 0.49, 99);
        let sino = forward_radon(&q, &angle_range(0.0, 10.0, 18), &offsets).unwrap();
        let totals = sinogram_mass_check(&sino);
        let area = q.integral();
        for t in totals {
            assert!((t - area).abs() <= 0.02 * area, "{t} vs {area}");
        }
        let r = 0.3;
        let dq = disc(grid, [0.0, 0.0], r);
        let ds = forward_radon(&dq, &angle_range(0.0, 10.0, 18), &offsets).unwrap();
        let area = std::f64::consts::PI * r * r;
        for t in sinogram_mass_check(&ds) {
            assert!((t - area).abs() <= 0.02 * area, "{t} vs {area}");
        }
    }

    #[test]
    fn round_trip_smooth_bump() {
        let grid = paper_grid();
        let spec = bump([0.05, -0.03], [0.2, 0.14], 25.0);
        let q = spec.sample(&grid);
        let sino = forward_radon(&q, &angle_range(0.0, 1.0, 180), &uniform_offsets(-0.4, 0.4, 63)).unwrap();
        let out = SpatialGrid::centered_square(0.2828, 44).unwrap();
        let rec = fbp(&sino, &out).unwrap();
        let truth = spec.sample(&out);
        let err = crate::metrics::relative_l2(&rec.nodes(), &truth.nodes());
        assert!(err <= 0.10, "round-trip error {err}");
    }

    #[test]
    fn centroid_of_off_center_disc() {
        let grid = paper_grid();
        let c = [0.12, -0.08];
        let q = disc(grid, c, 0.1);
        let offsets = uniform_offsets(-0.4, 0.4, 63);
        let sino = forward_radon(&q, &angle_range(0.0, 2.0, 90), &offsets).unwrap();
        let out = SpatialGrid::centered_square(0.2828, 44).unwrap();
        let rec = fbp(&sino, &out).unwrap();
        let (mut m, mut mx, mut my) = (0.0, 0.0, 0.0);
        for i in 1..=out.n1 {
            for j in 1..=out.n2 {
                let v = rec.get(i, j).max(0.0);
                m += v;
                mx += v * out.x1(i);
                my += v * out.x2(j);
            }
        }
        let d = sino.offset_spacing();
        assert!((mx / m - c[0]).abs() <= d && (my / m - c[1]).abs() <= d, "({}, {})", mx / m, my / m);
    }

    #[test]
    fn rotation_shifts_columns() {
        let grid = paper_grid();
        let step = 6.0;
        let spec = bump([0.1, 0.05], [0.18, 0.09], 10.0);
        let angles = angle_range(0.0, step, 30);
        let offsets = uniform_offsets(-0.4, 0.4, 33);
        let a = forward_radon(&spec.sample(&grid), &angles, &offsets).unwrap();
        let b = forward_radon(&spec.rotated(step).sample(&grid), &angles, &offsets).unwrap();
        for k in 1..angles.len() {
            for i in 0..offsets.len() {
                assert!((b.get(i, k) - a.get(i, k - 1)).abs() <= 0.01 * a.max_abs());
            }
        }
    }

    #[test]
    fn fbp_needs_two_angles() {
        let s = Sinogram::zeros(vec![0.0], uniform_offsets(-0.4, 0.4, 9)).unwrap();
        assert!(matches!(fbp(&s, &paper_grid()), Err(Error::DegenerateSinogram(1))));
    }

    #[test]
    fn rejects_nonuniform_axes() {
        assert!(Sinogram::zeros(vec![0.0, 1.0, 3.0], vec![0.0, 1.0]).is_err());
        assert!(Sinogram::new(vec![0.0, 1.0], vec![0.0], vec![1.0]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn linearity(a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let grid = SpatialGrid::centered_square(0.5, 32).unwrap();
            let f = PhantomSpec::example1().sample(&grid);
            let g = PhantomSpec::example2().sample(&grid);
            let combo = f.scaled(a).add(&g.scaled(b)).unwrap();
            let angles = angle_range(0.0, 20.0, 9);
            let offsets = uniform_offsets(-0.4, 0.4, 11);
            let sf = forward_radon(&f, &angles, &offsets).unwrap();
            let sg = forward_radon(&g, &angles, &offsets).unwrap();
            let sc = forward_radon(&combo, &angles, &offsets).unwrap();
            let scale = sf.max_abs() + sg.max_abs();
            for k in 0..sc.values().len() {
                prop_assert!((sc.values()[k] - a * sf.values()[k] - b * sg.values()[k]).abs() <= 1e-12 * scale);
            }
            let out = SpatialGrid::centered_square(0.3, 12).unwrap();
            let rf = fbp(&sf, &out).unwrap();
            let rg = fbp(&sg, &out).unwrap();
            let rc = fbp(&sc, &out).unwrap();
            let s2 = rf.max_abs() + rg.max_abs();
            for (k, v) in rc.nodes().iter().enumerate() {
                prop_assert!((v - a * rf.nodes()[k] - b * rg.nodes()[k]).abs() <= 1e-10 * s2.max(1.0));
            }
        }
    }
}
