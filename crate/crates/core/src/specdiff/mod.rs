//! Regularized spectral differentiation of sampled 1-D data.
//!
//! The `p`-th derivative is computed as `F^-1[(i xi)^p psi(xi) F[g]]` with
//! angular frequencies `xi_k = 2 pi k / (N dx)` and either a hard
//! truncation or a Gaussian `exp(-alpha xi^2)` as the filter `psi`. The
//! FFT treats the samples as one period, so non-periodic data has to be
//! tapered first ([`periodize`]) or extended by reflection.

mod stability;
pub mod worked;

pub use stability::{
    check_noise_amplification, check_total_error, gaussian_multiplier_sup, BoundReport,
    StabilityBound,
};

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default fraction of the half-interval on which the taper equals one.
pub const DEFAULT_WINDOW: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct SampledSignal {
    pub values: Vec<f64>,
    pub spacing: f64,
    /// Index of the abscissa `x = 0`.
    pub origin: usize,
}

impl SampledSignal {
    pub fn new(values: Vec<f64>, spacing: f64, origin: usize) -> Result<Self> {
        if values.len() < 4 {
            return Err(Error::InvalidConfig(format!(
                "signal needs at least 4 samples, got {}",
                values.len()
            )));
        }
        if !(spacing > 0.0) {
            return Err(Error::InvalidConfig(format!("spacing must be positive, got {spacing}")));
        }
        if origin >= values.len() {
            return Err(Error::InvalidConfig(format!("origin index {origin} out of range")));
        }
        Ok(Self { values, spacing, origin })
    }

    /// Samples `f` on `x_j = x_start + j dx`, `j = 0..n`, with origin index
    /// `round(-x_start / dx)` clamped to the range.
    pub fn from_fn(n: usize, x_start: f64, spacing: f64, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..n).map(|j| f(x_start + j as f64 * spacing)).collect();
        let origin = ((-x_start / spacing).round().max(0.0) as usize).min(n.saturating_sub(1));
        Self { values, spacing, origin }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn abscissa(&self, j: usize) -> f64 {
        (j as f64 - self.origin as f64) * self.spacing
    }

    pub fn at_origin(&self) -> f64 {
        self.values[self.origin]
    }

    /// Discrete `L^2` norm `sqrt(sum v^2 dx)`.
    pub fn l2_norm(&self) -> f64 {
        l2_norm(&self.values, self.spacing)
    }

    pub fn with_values(&self, values: Vec<f64>) -> Self {
        Self { values, ..self.clone() }
    }
}

pub fn l2_norm(values: &[f64], spacing: f64) -> f64 {
    (values.iter().map(|v| v * v).sum::<f64>() * spacing).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FilterSpec {
    /// Indicator of `|xi| <= xi_max`.
    Truncation { xi_max: f64 },
    /// `exp(-alpha xi^2)`.
    Gaussian { alpha: f64 },
}

impl FilterSpec {
    pub fn validate(&self) -> Result<()> {
        let v = match *self {
            FilterSpec::Truncation { xi_max } => xi_max,
            FilterSpec::Gaussian { alpha } => alpha,
        };
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("filter parameter must be positive: {self:?}")))
        }
    }

    pub fn response(&self, xi: f64) -> f64 {
        match *self {
            FilterSpec::Truncation { xi_max } => {
                if xi.abs() <= xi_max {
                    1.0
                } else {
                    0.0
                }
            }
            FilterSpec::Gaussian { alpha } => (-alpha * xi * xi).exp(),
        }
    }
}

/// Angular frequency of every FFT bin, `k` in `[-n/2, n/2)`.
pub fn frequencies(n: usize, spacing: f64) -> Vec<f64> {
    let scale = 2.0 * std::f64::consts::PI / (n as f64 * spacing);
    (0..n)
        .map(|idx| {
            let k = if idx < (n + 1) / 2 { idx as f64 } else { idx as f64 - n as f64 };
            k * scale
        })
        .collect()
}

fn i_pow(p: u32) -> Complex64 {
    match p % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

pub(crate) fn forward_fft(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Filtered derivative before discarding the imaginary part.
pub(crate) fn derivative_complex(values: &[f64], spacing: f64, p: u32, filter: FilterSpec) -> Vec<Complex64> {
    let n = values.len();
    let mut buf = forward_fft(values);
    let xi = frequencies(n, spacing);
    let unit = i_pow(p);
    let nyquist = if n % 2 == 0 { Some(n / 2) } else { None };
    for (idx, (c, &x)) in buf.iter_mut().zip(&xi).enumerate() {
        if nyquist == Some(idx) && p % 2 == 1 {
            *c = Complex64::new(0.0, 0.0);
            continue;
        }
        *c *= unit * x.powi(p as i32) * filter.response(x);
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let inv_n = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= inv_n);
    buf
}

/// Regularized `p`-th derivative of one period of samples.
pub fn spectral_derivative(signal: &SampledSignal, p: u32, filter: FilterSpec) -> SampledSignal {
    let out = derivative_complex(&signal.values, signal.spacing, p, filter);
    signal.with_values(out.into_iter().map(|c| c.re).collect())
}

/// Continuous-transform coefficients `g_hat(xi_k) ~ dx / sqrt(2 pi) * DFT`.
pub fn fourier_coefficients(signal: &SampledSignal) -> Vec<Complex64> {
    let scale = signal.spacing / (2.0 * std::f64::consts::PI).sqrt();
    forward_fft(&signal.values).into_iter().map(|c| c * scale).collect()
}

/// `sqrt(sum (1 + xi_k^2)^s |g_hat_k|^2 dxi)`; `s = 0` gives the `L^2` norm.
pub fn sobolev_norm(signal: &SampledSignal, s: f64) -> f64 {
    let n = signal.len();
    let dxi = 2.0 * std::f64::consts::PI / (n as f64 * signal.spacing);
    let xi = frequencies(n, signal.spacing);
    fourier_coefficients(signal)
        .iter()
        .zip(&xi)
        .map(|(c, &x)| (1.0 + x * x).powf(s) * c.norm_sqr())
        .sum::<f64>()
        .mul_add(dxi, 0.0)
        .sqrt()
}

/// Odd extension of samples at `eps * j / n`, `j = 1..=n`, onto the
/// symmetric grid `[-eps, eps]` (length `2n + 1`, origin at the center).
pub fn odd_extend(g_half: &[f64], eps: f64) -> Result<SampledSignal> {
    let n = g_half.len();
    if n < 2 {
        return Err(Error::InvalidConfig("odd extension needs at least 2 samples".into()));
    }
    let mut values = vec![0.0; 2 * n + 1];
    for (j, &v) in g_half.iter().enumerate() {
        values[n + 1 + j] = v;
        values[n - 1 - j] = -v;
    }
    SampledSignal::new(values, eps / n as f64, n)
}

fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / s).exp();
    let b = (-1.0 / (1.0 - s)).exp();
    a / (a + b)
}

/// `C^inf` taper: one for `|x| <= w L`, falling to zero at `|x| = L`.
pub fn taper(x: f64, half_width: f64, w: f64) -> f64 {
    let r = x.abs() / half_width;
    if r <= w {
        1.0
    } else if r >= 1.0 {
        0.0
    } else {
        smooth_step((1.0 - r) / (1.0 - w))
    }
}

/// Multiplies by a taper centered at the origin index so that both ends
/// vanish and the periodic continuation is smooth.
pub fn periodize(signal: &SampledSignal, w: f64) -> Result<SampledSignal> {
    if !(w > 0.0 && w <= 1.0) {
        return Err(Error::InvalidConfig(format!("window fraction must be in (0, 1], got {w}")));
    }
    let left = signal.origin as f64 * signal.spacing;
    let right = (signal.len() - 1 - signal.origin) as f64 * signal.spacing;
    let values = signal
        .values
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let x = signal.abscissa(j);
            let half = if x < 0.0 { left } else { right };
            if half == 0.0 {
                v
            } else {
                v * taper(x, half, w)
            }
        })
        .collect();
    Ok(signal.with_values(values))
}

/// Odd-extends samples of `g` on `(0, eps]`, tapers, and returns the
/// regularized `p`-th derivative at zero.
pub fn derivative_at_origin(
    g_half: &[f64],
    eps: f64,
    p: u32,
    filter: FilterSpec,
    w: f64,
) -> Result<f64> {
    let extended = periodize(&odd_extend(g_half, eps)?, w)?;
    Ok(spectral_derivative(&extended, p, filter).at_origin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn sine_period(n: usize) -> SampledSignal {
        SampledSignal::from_fn(n, 0.0, 2.0 * PI / n as f64, f64::sin)
    }

    #[test]
    fn identity_filter() {
        let s = SampledSignal::from_fn(64, -1.0, 2.0 / 64.0, |x| (-(8.0 * x * x)).exp());
        let out = spectral_derivative(&s, 0, FilterSpec::Gaussian { alpha: 1e-12 });
        let scale = s.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in s.values.iter().zip(&out.values) {
            assert!((a - b).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn single_mode_derivative() {
        let alpha = 0.3;
        for n in [32, 33] {
            let s = sine_period(n);
            let out = spectral_derivative(&s, 1, FilterSpec::Gaussian { alpha });
            for j in 0..n {
                let x = j as f64 * s.spacing;
                assert!((out.values[j] - (-alpha).exp() * x.cos()).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn imaginary_residue_is_negligible() {
        let s = SampledSignal::from_fn(50, -1.0, 0.04, |x| x.powi(3) * (-(4.0 * x * x)).exp());
        for p in 0..4 {
            let c = derivative_complex(&s.values, s.spacing, p, FilterSpec::Gaussian { alpha: 1e-3 });
            let re = l2_norm(&c.iter().map(|c| c.re).collect::<Vec<_>>(), 1.0);
            let im = l2_norm(&c.iter().map(|c| c.im).collect::<Vec<_>>(), 1.0);
            assert!(im <= 1e-8 * re.max(1e-300), "p={p}: {im} vs {re}");
        }
    }

    #[test]
    fn odd_extension_examples() {
        let e = odd_extend(&[1.0, 2.0, 3.0], 3.0).unwrap();
        assert_eq!(e.values, vec![-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
        assert_eq!(e.origin, 3);
        assert_eq!(e.spacing, 1.0);
        let z = odd_extend(&[0.0; 5], 1.0).unwrap();
        assert!(z.values.iter().all(|&v| v == 0.0));
        let eps = 0.75;
        let n = 8;
        let cubes: Vec<f64> = (1..=n).map(|j| (eps * j as f64 / n as f64).powi(3)).collect();
        let c = odd_extend(&cubes, eps).unwrap();
        for j in 0..c.len() {
            assert!((c.values[j] - c.abscissa(j).powi(3)).abs() < 1e-15);
        }
    }

    #[test]
    fn taper_examples() {
        // zero outside the central half: unchanged
        let s = SampledSignal::from_fn(41, -1.0, 0.05, |x| if x.abs() <= 0.5 { x + 2.0 } else { 0.0 });
        assert_eq!(periodize(&s, 0.5).unwrap().values, s.values);
        // constant one: the taper itself
        let ones = SampledSignal::from_fn(41, -1.0, 0.05, |_| 1.0);
        let t = periodize(&ones, 0.5).unwrap();
        for j in 0..41 {
            assert_eq!(t.values[j], taper(ones.abscissa(j), 1.0, 0.5));
        }
        assert_eq!(t.values[0], 0.0);
        assert_eq!(t.values[40], 0.0);
        // ramp midpoint |x| = 0.75 L: smooth_step(1/2) = e^-2 / (2 e^-2)
        let a = (-2.0_f64).exp();
        assert!((taper(0.75, 1.0, 0.5) - a / (a + a)).abs() < 1e-15);
        assert!((taper(-0.75, 1.0, 0.5) - 0.5).abs() < 1e-15);
        // w = 1 leaves everything untouched
        let s2 = SampledSignal::from_fn(41, -1.0, 0.05, |x| x + 3.0);
        assert_eq!(periodize(&s2, 1.0).unwrap().values, s2.values);
        assert!(periodize(&s2, 0.0).is_err());
    }

    fn cubic_samples(n: usize, eps: f64) -> Vec<f64> {
        (1..=n).map(|j| (eps * j as f64 / n as f64).powi(3)).collect()
    }

    #[test]
    fn third_derivative_of_cubic_at_origin() {
        // The taper ramp spans only a few samples when N is small, so the
        // filter has to be strong enough (relative to eps^2) to damp its
        // aliased tail. Blurring a cubic only adds a linear term, so the
        // Gaussian itself introduces no bias.
        let cases = [(1.5, 1e-2, 16), (1.5, 1e-2, 24), (1.5, 1e-2, 32), (0.5, 1e-3, 16), (0.5, 1e-3, 32), (1.0, 1e-3, 32), (1.0, 1e-3, 64)];
        for (eps, alpha, n) in cases {
            let d = derivative_at_origin(&cubic_samples(n, eps), eps, 3, FilterSpec::Gaussian { alpha }, DEFAULT_WINDOW)
                .unwrap();
            assert!((d - 6.0).abs() < 0.02 * 6.0, "eps={eps} n={n} alpha={alpha}: {d}");
        }
    }

    #[test]
    fn weak_filter_on_coarse_sweep_is_inaccurate() {
        let d = derivative_at_origin(&cubic_samples(16, 1.5), 1.5, 3, FilterSpec::Gaussian { alpha: 1e-4 }, DEFAULT_WINDOW)
            .unwrap();
        assert!((d - 6.0).abs() > 1.0, "{d}");
    }

    #[test]
    fn third_derivative_of_zero_and_linear() {
        let f = FilterSpec::Gaussian { alpha: 1e-2 };
        assert_eq!(derivative_at_origin(&[0.0; 16], 1.5, 3, f, 0.5).unwrap(), 0.0);
        let lin: Vec<f64> = (1..=16).map(|j| 1.5 * j as f64 / 16.0).collect();
        let d = derivative_at_origin(&lin, 1.5, 3, f, 0.5).unwrap();
        assert!(d.abs() < 0.01, "{d}");
    }

    #[test]
    fn sup_identity_on_discrete_grid() {
        for p in 1..=3u32 {
            for alpha in [1e-2, 1e-3, 5e-5] {
                let bound = gaussian_multiplier_sup(p, alpha);
                let mut best = 0.0f64;
                for n in [64usize, 1024, 16384] {
                    let xi = frequencies(n, 1e-3);
                    let m = xi
                        .iter()
                        .map(|x| x.abs().powi(p as i32) * (-alpha * x * x).exp())
                        .fold(0.0f64, f64::max);
                    assert!(m <= bound * (1.0 + 1e-12));
                    best = best.max(m);
                }
                // the finest grid lands close to the maximizer
                assert!(best >= 0.99 * bound, "p={p} alpha={alpha}: {best} vs {bound}");
            }
        }
    }

    proptest! {
        #[test]
        fn linearity(a in -3.0f64..3.0, b in -3.0f64..3.0, p in 0u32..4, seed in 0u64..1000) {
            let n = 40;
            let f = SampledSignal::from_fn(n, -1.0, 0.05, |x| (x * (1.0 + seed as f64 * 1e-3)).sin() * (-(x * x)).exp());
            let g = SampledSignal::from_fn(n, -1.0, 0.05, |x| (3.0 * x).cos() * x);
            let combo = f.with_values(f.values.iter().zip(&g.values).map(|(u, v)| a * u + b * v).collect());
            let filt = FilterSpec::Gaussian { alpha: 1e-3 };
            let lhs = spectral_derivative(&combo, p, filt);
            let df = spectral_derivative(&f, p, filt);
            let dg = spectral_derivative(&g, p, filt);
            let scale = l2_norm(&lhs.values, 1.0).max(1.0);
            for j in 0..n {
                prop_assert!((lhs.values[j] - (a * df.values[j] + b * dg.values[j])).abs() <= 1e-10 * scale);
            }
        }

        #[test]
        fn gaussian_filter_monotone(vals in prop::collection::vec(-1.0f64..1.0, 16..64), p in 0u32..4, a1 in 1e-5f64..1e-2, factor in 1.0f64..10.0) {
            let s = SampledSignal::new(vals, 0.05, 0).unwrap();
            let n1 = spectral_derivative(&s, p, FilterSpec::Gaussian { alpha: a1 }).l2_norm();
            let n2 = spectral_derivative(&s, p, FilterSpec::Gaussian { alpha: a1 * factor }).l2_norm();
            prop_assert!(n2 <= n1 * (1.0 + 1e-12) + 1e-14);
        }

        #[test]
        fn plancherel(vals in prop::collection::vec(-5.0f64..5.0, 4..80), dx in 1e-3f64..1.0) {
            let s = SampledSignal::new(vals, dx, 0).unwrap();
            let space = s.l2_norm();
            let freq = sobolev_norm(&s, 0.0);
            prop_assert!((space - freq).abs() <= 1e-10 * space.max(1e-300));
        }

        #[test]
        fn odd_data_gives_even_derivative(vals in prop::collection::vec(-1.0f64..1.0, 4..24), alpha in 1e-4f64..1e-1) {
            let eps = 1.0;
            let s = periodize(&odd_extend(&vals, eps).unwrap(), 0.5).unwrap();
            for p in [1u32, 3] {
                let d = spectral_derivative(&s, p, FilterSpec::Gaussian { alpha });
                let o = d.origin;
                let scale = l2_norm(&d.values, 1.0).max(1e-12);
                prop_assert!((d.values[o - 1] - d.values[o + 1]).abs() <= 1e-10 * scale);
                for j in 1..=o {
                    prop_assert!((d.values[o - j] - d.values[o + j]).abs() <= 1e-10 * scale);
                }
            }
        }
    }
}
