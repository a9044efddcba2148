//! Uniform frequency grids, sampled complex mode functions and the
//! quadrature primitives shared by every stage of the gate.
//!
//! Frequencies are angular (rad/s) detunings. The time-domain convention is
//! `f(t) = (2π)^{-1/2} ∫ f(ω) e^{-iωt} dω`, so a spectral phase `e^{iωτ}`
//! delays a pulse by `τ`. Optical wavenumbers are mapped onto this axis with
//! `k = ω / c`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::quad::trapezoid;
use crate::units::TWO_PI;
use crate::{Error, Result};

/// Default grid span in units of the pulse bandwidth `2π / T0`.
pub const DEFAULT_SPAN_FACTOR: f64 = 16.0;
/// Default number of grid points.
pub const DEFAULT_POINTS: usize = 2049;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    center: f64,
    span: f64,
    n_points: usize,
}

impl FrequencyGrid {
    pub fn new(center: f64, span: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::InvalidParameter { name: "grid.n_points", value: n_points as f64 });
        }
        if !(span > 0.0) || !span.is_finite() {
            return Err(Error::InvalidParameter { name: "grid.span", value: span });
        }
        if !center.is_finite() {
            return Err(Error::InvalidParameter { name: "grid.center", value: center });
        }
        Ok(Self { center, span, n_points })
    }

    /// Grid sized for a pulse of the given duration: `span = span_factor · 2π / duration`.
    pub fn for_pulse(duration: f64, span_factor: f64, n_points: usize) -> Result<Self> {
        if !(duration > 0.0) {
            return Err(Error::InvalidParameter { name: "pulse.duration", value: duration });
        }
        Self::new(0.0, span_factor * TWO_PI / duration, n_points)
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.span / (self.n_points - 1) as f64
    }

    pub fn frequency(&self, i: usize) -> f64 {
        self.center - 0.5 * self.span + i as f64 * self.spacing()
    }

    pub fn frequencies(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.frequency(i))
    }

    /// Grid with twice the point density over the same span.
    pub fn refined(&self) -> Self {
        Self { n_points: 2 * self.n_points - 1, ..*self }
    }

    /// Checks that the grid spans at least 8 bandwidths and samples each
    /// bandwidth at least 16 times, with bandwidth `2π / duration`.
    pub fn check_resolves(&self, duration: f64) -> Result<()> {
        let bandwidth = TWO_PI / duration;
        let required_span = 8.0 * bandwidth;
        let required_spacing = bandwidth / 16.0;
        if self.span < required_span * (1.0 - 1e-12) || self.spacing() > required_spacing * (1.0 + 1e-12) {
            return Err(Error::GridTooCoarse {
                required_span,
                span: self.span,
                required_spacing,
                spacing: self.spacing(),
            });
        }
        Ok(())
    }
}

/// Complex function sampled on a [`FrequencyGrid`].
///
/// Used for mode functions and for transfer functions alike; nothing here
/// assumes a particular norm.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledMode {
    grid: FrequencyGrid,
    amplitudes: Vec<Complex64>,
}

impl SampledMode {
    pub fn new(grid: FrequencyGrid, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, amplitudes })
    }

    pub fn from_fn<F: FnMut(f64) -> Complex64>(grid: FrequencyGrid, mut f: F) -> Self {
        let amplitudes = grid.frequencies().map(&mut f).collect();
        Self { grid, amplitudes }
    }

    pub fn constant(grid: FrequencyGrid, value: Complex64) -> Self {
        Self { grid, amplitudes: alloc::vec![value; grid.len()] }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        let dens: Vec<f64> = self.amplitudes.iter().map(|a| a.norm_sqr()).collect();
        trapezoid(&dens, self.grid.spacing())
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sqr())
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self { grid: self.grid, amplitudes: self.amplitudes.iter().map(|a| a * factor).collect() }
    }

    /// Copy rescaled to unit norm. Fails on a zero mode.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::DegenerateChannel);
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    /// Evaluates the inverse Fourier transform at the given times.
    pub fn time_domain(&self, times: &[f64]) -> Vec<Complex64> {
        let dw = self.grid.spacing();
        let pref = 1.0 / libm::sqrt(TWO_PI);
        let n = self.amplitudes.len();
        times
            .iter()
            .map(|&t| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, a) in self.amplitudes.iter().enumerate() {
                    let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                    let phase = -self.grid.frequency(i) * t;
                    acc += a * Complex64::new(libm::cos(phase), libm::sin(phase)) * w;
                }
                acc * (dw * pref)
            })
            .collect()
    }
}

/// Trapezoidal `∫ conj(f) g dω`: conjugate-linear in `f`, linear in `g`.
pub fn inner_product(f: &SampledMode, g: &SampledMode) -> Result<Complex64> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch);
    }
    let prod: Vec<Complex64> = f.amplitudes.iter().zip(&g.amplitudes).map(|(a, b)| a.conj() * b).collect();
    Ok(trapezoid(&prod, f.grid.spacing()))
}

/// Element-wise product `f(ω) h(ω)`, no renormalization.
pub fn apply_pointwise(f: &SampledMode, h: &SampledMode) -> Result<SampledMode> {
    if f.grid != h.grid {
        return Err(Error::GridMismatch);
    }
    Ok(SampledMode {
        grid: f.grid,
        amplitudes: f.amplitudes.iter().zip(&h.amplitudes).map(|(a, b)| a * b).collect(),
    })
}

/// Trapezoidal `∫ w(ω) |f(ω)|² dω` for a sampled weight `w`.
pub fn weighted_intensity(f: &SampledMode, w: &[Complex64]) -> Result<Complex64> {
    if w.len() != f.amplitudes.len() {
        return Err(Error::GridMismatch);
    }
    let prod: Vec<Complex64> = f.amplitudes.iter().zip(w).map(|(a, b)| b * a.norm_sqr()).collect();
    Ok(trapezoid(&prod, f.grid.spacing()))
}

/// Gaussian pulse whose intensity falls to `1/e²` of its peak at `delay ± duration/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPulse {
    pub duration: f64,
    pub delay: f64,
}

impl GaussianPulse {
    pub fn new(duration: f64, delay: f64) -> Result<Self> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(Error::InvalidParameter { name: "pulse.duration", value: duration });
        }
        if !delay.is_finite() {
            return Err(Error::InvalidParameter { name: "pulse.delay", value: delay });
        }
        Ok(Self { duration, delay })
    }

    /// Nominal bandwidth `2π / duration` used for grid sizing.
    pub fn bandwidth(&self) -> f64 {
        TWO_PI / self.duration
    }

    /// Standard deviation of the spectral intensity, `2 / duration`.
    pub fn spectral_sigma(&self) -> f64 {
        2.0 / self.duration
    }

    /// Continuous spectrum, normalized to `∫ |f(ω)|² dω = 1`.
    pub fn spectrum_at(&self, omega: f64, center: f64) -> Complex64 {
        let t = self.duration;
        let u = omega - center;
        let amp = libm::pow(t * t / (8.0 * core::f64::consts::PI), 0.25) * libm::exp(-u * u * t * t / 16.0);
        let phase = u * self.delay;
        Complex64::new(amp * libm::cos(phase), amp * libm::sin(phase))
    }

    /// Time-domain envelope normalized to `∫ |f(t)|² dt = 1`, carrier at `center`.
    pub fn envelope(&self, t: f64, center: f64) -> Complex64 {
        let d = self.duration;
        let s = t - self.delay;
        let amp = libm::pow(8.0 / (core::f64::consts::PI * d * d), 0.25) * libm::exp(-4.0 * s * s / (d * d));
        let phase = -center * t;
        Complex64::new(amp * libm::cos(phase), amp * libm::sin(phase))
    }
}

/// Samples a normalized Gaussian pulse spectrum on `grid`.
///
/// The samples are renormalized so that the trapezoidal norm is exactly one.
pub fn make_gaussian_mode(grid: &FrequencyGrid, duration: f64, delay: f64) -> Result<SampledMode> {
    let pulse = GaussianPulse::new(duration, delay)?;
    grid.check_resolves(duration)?;
    let raw = SampledMode::from_fn(*grid, |w| pulse.spectrum_at(w, grid.center()));
    raw.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn grid() -> FrequencyGrid {
        FrequencyGrid::for_pulse(0.5e-6, DEFAULT_SPAN_FACTOR, DEFAULT_POINTS).unwrap()
    }

    #[test]
    fn gaussian_is_normalized_and_real_at_zero_delay() {
        let f = make_gaussian_mode(&grid(), 0.5e-6, 0.0).unwrap();
        assert!((inner_product(&f, &f).unwrap().re - 1.0).abs() < 1e-12);
        let mid = f.amplitudes()[DEFAULT_POINTS / 2];
        assert!(mid.im.abs() < 1e-15 && mid.re > 0.0);
        let max = f.amplitudes().iter().map(|a| a.norm()).fold(0.0, f64::max);
        assert_eq!(max, mid.norm());
        assert!(f.amplitudes().iter().all(|a| a.im.abs() < 1e-15));
    }

    #[test]
    fn delay_is_pure_spectral_phase() {
        let g = grid();
        let tau = 0.3e-6;
        let f0 = make_gaussian_mode(&g, 0.5e-6, 0.0).unwrap();
        let f1 = make_gaussian_mode(&g, 0.5e-6, tau).unwrap();
        for (i, (a, b)) in f0.amplitudes().iter().zip(f1.amplitudes()).enumerate() {
            assert!((a.norm() - b.norm()).abs() < 1e-15);
            let expected = a * Complex64::from_polar(1.0, g.frequency(i) * tau);
            assert!((expected - b).norm() < 1e-12);
        }
        assert!((f1.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let g = FrequencyGrid::for_pulse(0.5e-6, 4.0, 2049).unwrap();
        assert!(matches!(make_gaussian_mode(&g, 0.5e-6, 0.0), Err(Error::GridTooCoarse { .. })));
        let g = FrequencyGrid::for_pulse(0.5e-6, 16.0, 65).unwrap();
        assert!(matches!(make_gaussian_mode(&g, 0.5e-6, 0.0), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn inner_product_examples() {
        let g = grid();
        let f = make_gaussian_mode(&g, 0.5e-6, 0.0).unwrap();
        let theta = 0.7;
        let rotated = f.scaled(Complex64::from_polar(1.0, theta));
        let ip = inner_product(&f, &rotated).unwrap();
        assert!((ip - Complex64::from_polar(1.0, theta)).norm() < 1e-12);

        let lo = SampledMode::from_fn(g, |w| if w < -1e7 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
        let hi = SampledMode::from_fn(g, |w| if w > 1e7 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
        assert_eq!(inner_product(&lo, &hi).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn mismatched_grids_error() {
        let a = make_gaussian_mode(&grid(), 0.5e-6, 0.0).unwrap();
        let b = make_gaussian_mode(&grid().refined(), 0.5e-6, 0.0).unwrap();
        assert_eq!(inner_product(&a, &b), Err(Error::GridMismatch));
        assert_eq!(apply_pointwise(&a, &b), Err(Error::GridMismatch));
    }

    #[test]
    fn pointwise_identity_and_negation() {
        let g = grid();
        let f = make_gaussian_mode(&g, 0.5e-6, 0.2e-6).unwrap();
        let one = SampledMode::constant(g, Complex64::new(1.0, 0.0));
        assert_eq!(apply_pointwise(&f, &one).unwrap(), f);
        let neg = apply_pointwise(&f, &SampledMode::constant(g, Complex64::new(-1.0, 0.0))).unwrap();
        assert!((neg.norm_sqr() - 1.0).abs() < 1e-12);
        assert_eq!(neg.amplitudes()[10], -f.amplitudes()[10]);
    }

    #[test]
    fn time_domain_matches_analytic_envelope() {
        let g = grid();
        let pulse = GaussianPulse::new(0.5e-6, 0.1e-6).unwrap();
        let f = make_gaussian_mode(&g, pulse.duration, pulse.delay).unwrap();
        let times = vec![-0.4e-6, 0.0, 0.1e-6, 0.35e-6];
        let td = f.time_domain(&times);
        let peak = pulse.envelope(pulse.delay, 0.0).norm();
        for (t, v) in times.iter().zip(td) {
            assert!((v - pulse.envelope(*t, 0.0)).norm() < 1e-9 * peak, "{t}");
        }
    }

    #[test]
    fn refinement_changes_overlap_below_threshold() {
        let g = grid();
        let f = make_gaussian_mode(&g, 0.5e-6, 0.0).unwrap();
        let h = SampledMode::from_fn(g, |w| Complex64::new(0.0, w / 1e7).exp());
        let fine = g.refined();
        let ff = make_gaussian_mode(&fine, 0.5e-6, 0.0).unwrap();
        let hf = SampledMode::from_fn(fine, |w| Complex64::new(0.0, w / 1e7).exp());
        let a = inner_product(&f, &apply_pointwise(&f, &h).unwrap()).unwrap();
        let b = inner_product(&ff, &apply_pointwise(&ff, &hf).unwrap()).unwrap();
        assert!((a - b).norm() < 1e-8);
    }
}
