//! Error and shape metrics for comparing reconstructions.

use crate::field::PotentialField;

/// `||a - reference|| / ||reference||`; zero reference gives `||a||`.
pub fn relative_l2(a: &[f64], reference: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(reference).map(|(x, y)| (x - y) * (x - y)).sum();
    let norm: f64 = reference.iter().map(|y| y * y).sum();
    if norm == 0.0 {
        diff.sqrt()
    } else {
        (diff / norm).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    /// Array indices of the node.
    pub i: usize,
    pub j: usize,
    pub x1: f64,
    pub x2: f64,
    pub value: f64,
}

/// Node with the largest absolute value (first one on ties).
pub fn peak(field: &PotentialField) -> Peak {
    let g = field.grid();
    let mut best = Peak { i: 1, j: 1, x1: g.x1(1), x2: g.x2(1), value: field.get(1, 1) };
    for i in 1..=g.n1 {
        for j in 1..=g.n2 {
            let v = field.get(i, j);
            if v.abs() > best.value.abs() {
                best = Peak { i, j, x1: g.x1(i), x2: g.x2(j), value: v };
            }
        }
    }
    best
}

/// Offset in grid cells between the peak and a physical point.
pub fn peak_offset_cells(field: &PotentialField, target: [f64; 2]) -> f64 {
    let p = peak(field);
    let g = field.grid();
    ((p.x1 - target[0]) / g.dx1()).hypot((p.x2 - target[1]) / g.dx2())
}

/// Sobel gradient at every node that has a full 3x3 neighbourhood.
fn sobel(field: &PotentialField) -> Vec<(f64, f64)> {
    let g = field.grid();
    let (h1, h2) = (8.0 * g.dx1(), 8.0 * g.dx2());
    let mut out = Vec::with_capacity(g.n1.saturating_sub(2) * g.n2.saturating_sub(2));
    for i in 2..g.n1 {
        for j in 2..g.n2 {
            let f = |a: usize, b: usize| field.get(a, b);
            let gx = (f(i + 1, j - 1) + 2.0 * f(i + 1, j) + f(i + 1, j + 1)
                - f(i - 1, j - 1)
                - 2.0 * f(i - 1, j)
                - f(i - 1, j + 1))
                / h1;
            let gy = (f(i - 1, j + 1) + 2.0 * f(i, j + 1) + f(i + 1, j + 1)
                - f(i - 1, j - 1)
                - 2.0 * f(i, j - 1)
                - f(i + 1, j - 1))
                / h2;
            out.push((gx, gy));
        }
    }
    out
}

/// `sum (d . grad f)^2` for the unit vector at `angle_deg`.
pub fn directional_gradient_energy(field: &PotentialField, angle_deg: f64) -> f64 {
    let (s, c) = angle_deg.to_radians().sin_cos();
    sobel(field).iter().map(|(gx, gy)| (c * gx + s * gy).powi(2)).sum()
}

/// Energy along `detectable_deg` divided by energy along `detectable_deg + 90`.
pub fn gradient_energy_ratio(field: &PotentialField, detectable_deg: f64) -> f64 {
    directional_gradient_energy(field, detectable_deg)
        / directional_gradient_energy(field, detectable_deg + 90.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpatialGrid;

    #[test]
    fn relative_error_basics() {
        assert_eq!(relative_l2(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert!((relative_l2(&[2.0, 0.0], &[1.0, 0.0]) - 1.0).abs() < 1e-15);
        assert_eq!(relative_l2(&[3.0, 4.0], &[0.0, 0.0]), 5.0);
    }

    #[test]
    fn peak_keeps_sign() {
        let g = SpatialGrid::centered_square(1.0, 21).unwrap();
        let f = PotentialField::from_fn(g, |x, y| -(-(((x - 0.3).powi(2) + (y + 0.2).powi(2)) * 20.0)).exp());
        let p = peak(&f);
        assert!(p.value < 0.0);
        assert!((p.x1 - 0.3).abs() < 1e-12 && (p.x2 + 0.2).abs() < 1e-12);
        assert!(peak_offset_cells(&f, [0.3, -0.2]) < 1e-9);
    }

    #[test]
    fn ramp_gradient_direction() {
        let g = SpatialGrid::centered_square(1.0, 21).unwrap();
        // f = x + y: gradient along 45 deg, nothing along 135 deg
        let f = PotentialField::from_fn(g, |x, y| x + y);
        assert!(directional_gradient_energy(&f, 135.0) < 1e-20);
        let e = directional_gradient_energy(&f, 45.0);
        assert!((e - 2.0 * 19.0 * 19.0).abs() < 1e-9 * e);
        let h = PotentialField::from_fn(g, |x, _| if x > 0.0 { 1.0 } else { 0.0 });
        assert!((gradient_energy_ratio(&h, 45.0) - 1.0).abs() < 1e-12);
    }
}
