//! Checkable forms of the noise-amplification and total-error bounds for
//! the Gaussian-filtered derivative.

use super::{l2_norm, sobolev_norm, spectral_derivative, FilterSpec, SampledSignal};
use crate::error::{Error, Result};

/// Relative slack for floating-point rounding in the bound comparisons.
const ROUNDING_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityBound {
    pub p: u32,
    pub s: f64,
    pub delta: f64,
}

impl StabilityBound {
    pub fn new(p: u32, s: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidConfig(format!("noise level must be positive, got {delta}")));
        }
        if !(s >= p as f64) || !s.is_finite() {
            return Err(Error::InvalidConfig(format!("need s >= p, got s = {s}, p = {p}")));
        }
        Ok(Self { p, s, delta })
    }

    /// Coupled regularization parameter `delta^(2/s)`.
    pub fn alpha(&self) -> f64 {
        self.delta.powf(2.0 / self.s)
    }

    pub fn filter(&self) -> FilterSpec {
        FilterSpec::Gaussian { alpha: self.alpha() }
    }

    /// `(2e/p)^(-p/2)`, with `C_0 = 1`.
    pub fn c_p(&self) -> f64 {
        if self.p == 0 {
            return 1.0;
        }
        let p = self.p as f64;
        (2.0 * std::f64::consts::E / p).powf(-p / 2.0)
    }

    /// `delta^(1 - p/s)`.
    pub fn rate(&self) -> f64 {
        self.delta.powf(1.0 - self.p as f64 / self.s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl BoundReport {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, pass: lhs <= rhs * (1.0 + ROUNDING_SLACK) }
    }

    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

/// `sup_xi |xi|^p exp(-alpha xi^2) = (p / (2 alpha e))^(p/2)`.
pub fn gaussian_multiplier_sup(p: u32, alpha: f64) -> f64 {
    if p == 0 {
        return 1.0;
    }
    let p = p as f64;
    (p / (2.0 * alpha * std::f64::consts::E)).powf(p / 2.0)
}

fn noise_norm(g: &SampledSignal, g_delta: &SampledSignal, delta: f64) -> Result<f64> {
    if g.len() != g_delta.len() || g.spacing != g_delta.spacing {
        return Err(Error::ShapeMismatch(format!(
            "signals differ: {} samples at {} vs {} samples at {}",
            g.len(),
            g.spacing,
            g_delta.len(),
            g_delta.spacing
        )));
    }
    let diff: Vec<f64> = g.values.iter().zip(&g_delta.values).map(|(a, b)| a - b).collect();
    let norm = l2_norm(&diff, g.spacing);
    if norm > delta * (1.0 + ROUNDING_SLACK) {
        return Err(Error::PreconditionViolated(format!(
            "noise norm {norm:e} exceeds delta {delta:e}"
        )));
    }
    Ok(norm)
}

/// Compares `||R(g) - R(g_delta)||` with `C_p delta^(1 - p/s)`.
pub fn check_noise_amplification(
    bound: &StabilityBound,
    g: &SampledSignal,
    g_delta: &SampledSignal,
) -> Result<BoundReport> {
    noise_norm(g, g_delta, bound.delta)?;
    let filter = bound.filter();
    let a = spectral_derivative(g, bound.p, filter);
    let b = spectral_derivative(g_delta, bound.p, filter);
    let diff: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
    Ok(BoundReport::new(l2_norm(&diff, g.spacing), bound.c_p() * bound.rate()))
}

/// Compares `||g^(p) - R(g_delta)||` with `(||g||_{H^s} + C_p) delta^(1 - p/s)`.
/// `exact` holds the samples of `g^(p)`.
pub fn check_total_error(
    bound: &StabilityBound,
    g: &SampledSignal,
    exact: &[f64],
    g_delta: &SampledSignal,
) -> Result<BoundReport> {
    let p = bound.p as f64;
    if bound.s > p + 2.0 {
        return Err(Error::PreconditionViolated(format!(
            "total-error bound needs s <= p + 2, got s = {}, p = {}",
            bound.s, bound.p
        )));
    }
    if exact.len() != g.len() {
        return Err(Error::ShapeMismatch(format!(
            "exact derivative has {} samples, signal has {}",
            exact.len(),
            g.len()
        )));
    }
    noise_norm(g, g_delta, bound.delta)?;
    let approx = spectral_derivative(g_delta, bound.p, bound.filter());
    let diff: Vec<f64> = exact.iter().zip(&approx.values).map(|(x, y)| x - y).collect();
    let rhs = (sobolev_norm(g, bound.s) + bound.c_p()) * bound.rate();
    Ok(BoundReport::new(l2_norm(&diff, g.spacing), rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constants() {
        let b = StabilityBound::new(2, 4.0, 1e-2).unwrap();
        assert!((b.alpha() - 0.1).abs() < 1e-15);
        assert!((b.c_p() - 1.0 / (std::f64::consts::E)).abs() < 1e-15);
        assert!((b.rate() - 0.1).abs() < 1e-15);
        assert!(StabilityBound::new(3, 2.0, 0.1).is_err());
        assert!(StabilityBound::new(1, 1.0, 0.0).is_err());
    }

    #[test]
    fn unperturbed_passes() {
        let g = SampledSignal::from_fn(128, 0.0, 2.0 * PI / 128.0, |x| x.sin() + 0.2 * (3.0 * x).cos());
        for p in 1..=3 {
            let b = StabilityBound::new(p, p as f64 + 1.0, 1e-3).unwrap();
            let r = check_noise_amplification(&b, &g, &g).unwrap();
            assert!(r.pass && r.lhs == 0.0);
        }
    }

    #[test]
    fn worst_mode_is_nearly_tight() {
        let b = StabilityBound::new(1, 1.0, 0.01).unwrap();
        let xi_star = (1.0 / (2.0 * b.alpha())).sqrt();
        let n = 256;
        let length = 2.0 * PI * 10.0 / xi_star;
        let dx = length / n as f64;
        let g = SampledSignal::from_fn(n, 0.0, dx, |x| (-(x - 0.5 * length).powi(2)).exp());
        let e = SampledSignal::from_fn(n, 0.0, dx, |x| (xi_star * x).sin());
        let c = b.delta / e.l2_norm();
        let gd = g.with_values(g.values.iter().zip(&e.values).map(|(a, v)| a + c * v).collect());
        let r = check_noise_amplification(&b, &g, &gd).unwrap();
        assert!(r.pass);
        assert!(r.ratio() > 0.999_999, "{}", r.ratio());
    }

    #[test]
    fn excessive_noise_rejected() {
        let g = SampledSignal::from_fn(64, 0.0, 0.1, f64::sin);
        let gd = g.with_values(g.values.iter().map(|v| v + 1.0).collect());
        let b = StabilityBound::new(1, 2.0, 1e-3).unwrap();
        assert!(matches!(
            check_noise_amplification(&b, &g, &gd),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn noise_free_limit() {
        let n = 256;
        let dx = 2.0 * PI / n as f64;
        let g = SampledSignal::from_fn(n, 0.0, dx, |x| (2.0 * x).sin() + 0.3 * (5.0 * x).cos());
        let exact: Vec<f64> = (0..n)
            .map(|j| {
                let x = j as f64 * dx;
                -4.0 * (2.0 * x).sin() - 7.5 * (5.0 * x).cos()
            })
            .collect();
        let b = StabilityBound::new(2, 3.0, 1e-12).unwrap();
        let r = check_total_error(&b, &g, &exact, &g).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn trig_polynomial_with_noise() {
        let n = 512;
        let dx = 2.0 * PI / n as f64;
        let g = SampledSignal::from_fn(n, 0.0, dx, |x| (2.0 * x).sin() + 0.3 * (5.0 * x).cos());
        let exact: Vec<f64> = (0..n)
            .map(|j| {
                let x = j as f64 * dx;
                -4.0 * (2.0 * x).sin() - 7.5 * (5.0 * x).cos()
            })
            .collect();
        let delta = 1e-3;
        let e = SampledSignal::from_fn(n, 0.0, dx, |x| (37.0 * x).cos() + 0.5 * (120.0 * x).sin());
        let c = 0.99 * delta / e.l2_norm();
        let gd = g.with_values(g.values.iter().zip(&e.values).map(|(a, v)| a + c * v).collect());
        let b = StabilityBound::new(2, 3.0, delta).unwrap();
        assert!(check_total_error(&b, &g, &exact, &gd).unwrap().pass);
        assert!(check_noise_amplification(&b, &g, &gd).unwrap().pass);
    }

    #[test]
    fn gaussian_total_error() {
        // exp(-x^2 / (2 w^2)) on a window wide enough to be periodic to roundoff
        let w = 0.5;
        let n = 1024;
        let dx = 16.0 / n as f64;
        let g = SampledSignal::from_fn(n, -8.0, dx, |x| (-(x * x) / (2.0 * w * w)).exp());
        let exact: Vec<f64> = (0..n)
            .map(|j| {
                let x = g.abscissa(j);
                ((x * x) / (w * w * w * w) - 1.0 / (w * w)) * (-(x * x) / (2.0 * w * w)).exp()
            })
            .collect();
        let b = StabilityBound::new(2, 4.0, 1e-2).unwrap();
        let e = SampledSignal::from_fn(n, -8.0, dx, |x| (9.0 * x).sin());
        let c = b.delta / e.l2_norm();
        let gd = g.with_values(g.values.iter().zip(&e.values).map(|(a, v)| a + c * v).collect());
        let r = check_total_error(&b, &g, &exact, &gd).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn total_error_rejects_rough_exponent() {
        let g = SampledSignal::from_fn(64, 0.0, 0.1, f64::sin);
        let b = StabilityBound::new(1, 3.5, 1e-3).unwrap();
        assert!(check_total_error(&b, &g, &g.values.clone(), &g).is_err());
    }
}
