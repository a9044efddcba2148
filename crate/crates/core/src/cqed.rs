//! Microwave cavity reflection with zero or one Rydberg atom inside.
//!
//! The reflected field is `C1(ω) b_in(ω) + C2(ω) b_noise(ω)`, where
//!
//! ```text
//! C1 = [iω + g²/(iω−γ) − (κ_s−κ)/2] / [iω + g²/(iω−γ) − (κ_s+κ)/2]
//! C2 = (iω−γ_eff)/(iω−γ) · √(κκ_s) / [iω + g²/(iω−γ) − (κ_s+κ)/2]
//! γ_eff = sqrt(γ² + 2g²γ/κ_s)
//! ```
//!
//! Both are evaluated after clearing the `(iω−γ)` denominator, which keeps
//! the `κ_s → 0` and `γ → 0` limits finite.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::ode::{integrate, Tolerances};
use crate::spectral::{FrequencyGrid, SampledMode};
use crate::units::{khz, mhz, EPSILON_0, HBAR};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CqedParams {
    pub g_m: f64,
    pub kappa: f64,
    pub kappa_s: f64,
    pub gamma_s: f64,
    /// Whether a Rydberg excitation sits in the cavity.
    pub occupied: bool,
}

impl CqedParams {
    /// `g_m/2π = 2.723 MHz`, `κ/2π = 2 MHz`, `κ_s = 10⁻³ κ`, `γ_s/2π = 4.78 kHz`.
    pub fn sample(occupied: bool) -> Self {
        Self { g_m: mhz(2.723), kappa: mhz(2.0), kappa_s: 1e-3 * mhz(2.0), gamma_s: khz(4.78), occupied }
    }

    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64, bool); 4] = [
            ("cqed.kappa", self.kappa, self.kappa > 0.0 && self.kappa.is_finite()),
            ("cqed.kappa_s", self.kappa_s, self.kappa_s >= 0.0 && self.kappa_s.is_finite()),
            ("cqed.gamma_s", self.gamma_s, self.gamma_s >= 0.0 && self.gamma_s.is_finite()),
            ("cqed.g_m", self.g_m, self.g_m >= 0.0 && self.g_m.is_finite()),
        ];
        for (name, value, ok) in checks {
            if !ok {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    /// Coupling seen by the field: `g_m` if occupied, zero otherwise.
    pub fn effective_g(&self) -> f64 {
        if self.occupied {
            self.g_m
        } else {
            0.0
        }
    }

    pub fn cooperativity(&self) -> f64 {
        self.g_m * self.g_m / (self.kappa * self.gamma_s)
    }

    pub fn with_occupied(self, occupied: bool) -> Self {
        Self { occupied, ..self }
    }

    /// Noise-mode decay rate; `+∞` in the lossless limit with a coupled, decaying atom.
    pub fn gamma_eff(&self) -> f64 {
        let g = self.effective_g();
        if self.kappa_s > 0.0 {
            libm::sqrt(self.gamma_s * self.gamma_s + 2.0 * g * g * self.gamma_s / self.kappa_s)
        } else if g > 0.0 && self.gamma_s > 0.0 {
            f64::INFINITY
        } else {
            self.gamma_s
        }
    }
}

/// `(C1(ω), C2(ω))` at one frequency.
pub fn transfer_at(omega: f64, p: &CqedParams) -> (Complex64, Complex64) {
    let iw = Complex64::new(0.0, omega);
    let g = p.effective_g();
    let total = 0.5 * (p.kappa_s + p.kappa);
    let net = 0.5 * (p.kappa_s - p.kappa);
    if g == 0.0 {
        let den = iw - total;
        return ((iw - net) / den, Complex64::new(libm::sqrt(p.kappa * p.kappa_s), 0.0) / den);
    }
    let atom = iw - p.gamma_s;
    let den = (iw - total) * atom + g * g;
    let c1 = ((iw - net) * atom + g * g) / den;
    let leak = libm::sqrt(p.gamma_s * p.gamma_s * p.kappa_s + 2.0 * g * g * p.gamma_s);
    let c2 = (iw * libm::sqrt(p.kappa_s) - leak) * libm::sqrt(p.kappa) / den;
    (c1, c2)
}

/// Signal and noise transfer functions sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferPair {
    pub grid: FrequencyGrid,
    pub c1: SampledMode,
    pub c2: SampledMode,
    pub gamma_eff: f64,
}

impl TransferPair {
    /// Frequency-independent channel `C1 ≡ c1`, with a real noise amplitude
    /// completing it to a unitary.
    pub fn flat(grid: FrequencyGrid, c1: Complex64) -> Result<Self> {
        let loss = 1.0 - c1.norm_sqr();
        if loss < -1e-12 {
            return Err(Error::InvalidParameter { name: "transfer.c1", value: c1.norm() });
        }
        Ok(Self {
            grid,
            c1: SampledMode::constant(grid, c1),
            c2: SampledMode::constant(grid, Complex64::new(libm::sqrt(loss.max(0.0)), 0.0)),
            gamma_eff: f64::NAN,
        })
    }
}

pub fn transfer_functions(grid: &FrequencyGrid, p: &CqedParams) -> Result<TransferPair> {
    p.validate()?;
    let (c1, c2): (Vec<_>, Vec<_>) = grid.frequencies().map(|w| transfer_at(w, p)).unzip();
    if c1.iter().chain(&c2).any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::NonFinite { what: "cavity transfer" });
    }
    Ok(TransferPair {
        grid: *grid,
        c1: SampledMode::new(*grid, c1)?,
        c2: SampledMode::new(*grid, c2)?,
        gamma_eff: p.gamma_eff(),
    })
}

/// Principal value of `arg C1(0)` in `(−π, π]`.
pub fn reflection_phase(p: &CqedParams) -> Result<f64> {
    p.validate()?;
    let (c1, _) = transfer_at(0.0, p);
    if c1.norm() < 1e-12 {
        return Err(Error::UndefinedPhase);
    }
    let phase = c1.arg();
    Ok(if phase <= -core::f64::consts::PI { core::f64::consts::PI } else { phase })
}

/// `Λ = ∫ |f_in(ω)|² conj(C1(ω)) dω`.
pub fn mode_overlap_lambda(f_in: &SampledMode, tp: &TransferPair) -> Result<Complex64> {
    if *f_in.grid() != tp.grid {
        return Err(Error::GridMismatch);
    }
    let w: Vec<Complex64> = tp.c1.amplitudes().iter().map(|c| c.conj()).collect();
    crate::spectral::weighted_intensity(f_in, &w)
}

/// How the atomic inversion is treated in the mean-field equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaZ {
    /// `σ_z` evolves with the field (full nonlinear model).
    Dynamic,
    /// `σ_z` pinned at `−1/2` (linear response).
    Frozen,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldOptions {
    /// Relative tolerance of the integrator, in `[1e−12, 1e−6]`.
    pub tol: f64,
    pub sigma_z: SigmaZ,
    /// Largest integrator step (s).
    pub max_step: f64,
}

impl MeanFieldOptions {
    pub fn new(tol: f64, max_step: f64) -> Self {
        Self { tol, sigma_z: SigmaZ::Dynamic, max_step }
    }
}

/// Sampled mean-field solution plus running integrals over the whole span.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldTrajectory {
    pub times: Vec<f64>,
    pub a_c: Vec<Complex64>,
    pub sigma: Vec<Complex64>,
    pub sigma_z: Vec<f64>,
    pub b_out: Vec<Complex64>,
    /// `∫ conj(f) b_out dt`
    pub mode_overlap: Complex64,
    /// `∫ |b_out|² dt`
    pub output_energy: f64,
    /// `∫ |a_c|² dt`
    pub cavity_energy: f64,
    /// `∫ |σ|² dt`
    pub coherence_energy: f64,
    pub final_a_c: Complex64,
    pub final_sigma: Complex64,
    pub final_sigma_z: f64,
}

impl MeanFieldTrajectory {
    pub fn max_sigma_z_drift(&self) -> f64 {
        self.sigma_z.iter().map(|s| libm::fabs(s + 0.5)).fold(libm::fabs(self.final_sigma_z + 0.5), f64::max)
    }
}

/// Integrates the semiclassical Heisenberg equations
///
/// ```text
/// σ̇   = −γ σ + 2i g σ_z a
/// ȧ   = −i g σ − (κ+κ_s)/2 · a − √κ α f(t)
/// σ̇_z = 2 Re(i g σ conj(a))
/// b_out = α f(t) + √κ a
/// ```
///
/// from rest (`σ = a = 0`, `σ_z = −1/2`) over `t_span`, sampling at `times`.
/// `peak_drive` bounds `|f|` and sets the absolute tolerances.
pub fn mean_field_simulate<F>(
    p: &CqedParams,
    alpha_in: Complex64,
    f_in_time: F,
    peak_drive: f64,
    t_span: (f64, f64),
    times: &[f64],
    opts: &MeanFieldOptions,
) -> Result<MeanFieldTrajectory>
where
    F: Fn(f64) -> Complex64,
{
    p.validate()?;
    if !(1e-12..=1e-6).contains(&opts.tol) {
        return Err(Error::InvalidParameter { name: "mean_field.tol", value: opts.tol });
    }
    let g = p.effective_g();
    let sk = libm::sqrt(p.kappa);
    let half = 0.5 * (p.kappa + p.kappa_s);
    let (gs, frozen) = (p.gamma_s, opts.sigma_z == SigmaZ::Frozen);

    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let s = Complex64::new(y[0], y[1]);
        let a = Complex64::new(y[2], y[3]);
        let sz = if frozen { -0.5 } else { y[4] };
        let f = f_in_time(t);
        let drive = alpha_in * f;
        let ds = -gs * s + Complex64::new(0.0, 2.0 * g * sz) * a;
        let da = Complex64::new(0.0, -g) * s - half * a - sk * drive;
        let dsz = if frozen { 0.0 } else { 2.0 * (Complex64::new(0.0, g) * s * a.conj()).re };
        let b = drive + sk * a;
        let ov = f.conj() * b;
        dy[0] = ds.re;
        dy[1] = ds.im;
        dy[2] = da.re;
        dy[3] = da.im;
        dy[4] = dsz;
        dy[5] = ov.re;
        dy[6] = ov.im;
        dy[7] = b.norm_sqr();
        dy[8] = a.norm_sqr();
        dy[9] = s.norm_sqr();
    };

    let amp = alpha_in.norm() * peak_drive;
    let a_scale = (2.0 * sk * amp * gs.max(1.0 / (t_span.1 - t_span.0)) / (2.0 * g * g + p.kappa * gs.max(1e-300)))
        .min(2.0 * sk * amp / p.kappa)
        .max(1e-300);
    let s_scale = if g > 0.0 { (g * sk * amp / (g * g + 0.5 * p.kappa * gs)).max(a_scale) } else { a_scale };
    let flux = (alpha_in.norm_sqr() + alpha_in.norm()).max(1e-300);
    let atol: Vec<f64> = [
        opts.tol * s_scale,
        opts.tol * s_scale,
        opts.tol * a_scale,
        opts.tol * a_scale,
        opts.tol * 1e-3,
        opts.tol * flux,
        opts.tol * flux,
        opts.tol * flux,
        opts.tol * a_scale * a_scale * (t_span.1 - t_span.0),
        opts.tol * s_scale * s_scale * (t_span.1 - t_span.0),
    ]
    .iter()
    .map(|v| v.max(1e-300))
    .collect();
    let tol = Tolerances { rtol: opts.tol, atol, max_step: opts.max_step, initial_step: None, max_steps: 20_000_000 };

    let y0 = [0.0, 0.0, 0.0, 0.0, -0.5, 0.0, 0.0, 0.0, 0.0, 0.0];
    let sol = integrate(rhs, t_span.0, &y0, t_span.1, times, &tol)?;
    if sol.final_state.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "mean-field state" });
    }

    let mut traj = MeanFieldTrajectory {
        times: times.to_vec(),
        a_c: Vec::with_capacity(times.len()),
        sigma: Vec::with_capacity(times.len()),
        sigma_z: Vec::with_capacity(times.len()),
        b_out: Vec::with_capacity(times.len()),
        mode_overlap: Complex64::new(sol.final_state[5], sol.final_state[6]),
        output_energy: sol.final_state[7],
        cavity_energy: sol.final_state[8],
        coherence_energy: sol.final_state[9],
        final_a_c: Complex64::new(sol.final_state[2], sol.final_state[3]),
        final_sigma: Complex64::new(sol.final_state[0], sol.final_state[1]),
        final_sigma_z: if frozen { -0.5 } else { sol.final_state[4] },
    };
    for (t, y) in times.iter().zip(&sol.samples) {
        let a = Complex64::new(y[2], y[3]);
        traj.a_c.push(a);
        traj.sigma.push(Complex64::new(y[0], y[1]));
        traj.sigma_z.push(if frozen { -0.5 } else { y[4] });
        traj.b_out.push(alpha_in * f_in_time(*t) + sk * a);
    }
    Ok(traj)
}

/// Steady-state cavity amplitude and atomic coherence under constant drive `α`.
pub fn steady_state(p: &CqedParams, alpha: Complex64) -> (Complex64, Complex64) {
    let g = p.effective_g();
    let (k, gs) = (p.kappa, p.gamma_s);
    let sk = libm::sqrt(k);
    let a = -2.0 * sk * alpha * gs / (2.0 * g * g + k * gs);
    let big_gamma = (0.5 * k * gs + g * g) / (0.5 * k + gs);
    let s = Complex64::new(0.0, g * sk) * alpha / ((gs + 0.5 * k) * big_gamma);
    (a, s)
}

/// Closed-form size of the inversion drift that the linear model neglects.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizationEstimate {
    /// `2κγα²/g²`, the strong-coupling form.
    pub estimate: f64,
    /// `2κg²γα² / (g² + κγ/2)²`, without the strong-coupling approximation.
    pub exact: f64,
}

pub fn linearization_error_estimate(p: &CqedParams, alpha_in: f64) -> Result<LinearizationEstimate> {
    if !(p.g_m > 0.0) {
        return Err(Error::InvalidParameter { name: "cqed.g_m", value: p.g_m });
    }
    let (g2, k, gs, a2) = (p.g_m * p.g_m, p.kappa, p.gamma_s, alpha_in * alpha_in);
    let d = g2 + 0.5 * k * gs;
    Ok(LinearizationEstimate { estimate: 2.0 * k * gs * a2 / g2, exact: 2.0 * k * g2 * gs * a2 / (d * d) })
}

/// Single-photon coupling from cavity geometry, in both readings of the
/// trailing `u/κ` factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingReadings {
    /// `sqrt(ħω_c / 2ε₀V) · (p/ħ) · u` (rad/s).
    pub rabi: f64,
    /// The same divided by `κ`, as printed; dimensionless.
    pub rabi_over_kappa: f64,
}

pub fn derive_gm(
    cavity_frequency: f64,
    effective_volume: f64,
    dipole_moment: f64,
    mode_amplitude_u: f64,
    kappa: f64,
) -> Result<CouplingReadings> {
    for (name, v) in [
        ("cavity_frequency", cavity_frequency),
        ("effective_volume", effective_volume),
        ("dipole_moment", dipole_moment),
        ("mode_amplitude_u", mode_amplitude_u),
        ("kappa", kappa),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter { name, value: v });
        }
    }
    let field = libm::sqrt(HBAR * cavity_frequency / (2.0 * EPSILON_0 * effective_volume));
    let rabi = field * dipole_moment / HBAR * mode_amplitude_u;
    Ok(CouplingReadings { rabi, rabi_over_kappa: rabi / kappa })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_gaussian_mode, DEFAULT_POINTS, DEFAULT_SPAN_FACTOR};
    use core::f64::consts::PI;

    fn grid() -> FrequencyGrid {
        FrequencyGrid::for_pulse(0.5e-6, DEFAULT_SPAN_FACTOR, DEFAULT_POINTS).unwrap()
    }

    fn reference(w: f64, g: f64, k: f64, ks: f64, gs: f64) -> (Complex64, Complex64) {
        let i = Complex64::new(0.0, 1.0);
        let den = i * w + g * g / (i * w - gs) - (ks + k) / 2.0;
        let c1 = (i * w + g * g / (i * w - gs) - (ks - k) / 2.0) / den;
        let ge = libm::sqrt(gs * gs + 2.0 * g * g * gs / ks);
        let c2 = (i * w - ge) / (i * w - gs) * libm::sqrt(k * ks) / den;
        (c1, c2)
    }

    #[test]
    fn cleared_form_matches_printed_form() {
        let p = CqedParams::sample(true);
        for i in 0..50 {
            let w = (i as f64 - 25.0) * 1e6;
            let (c1, c2) = transfer_at(w, &p);
            let (r1, r2) = reference(w, p.g_m, p.kappa, p.kappa_s, p.gamma_s);
            assert!((c1 - r1).norm() < 1e-12);
            assert!((c2 - r2).norm() < 1e-12);
        }
    }

    #[test]
    fn empty_lossless_reflects_with_pi() {
        let p = CqedParams { kappa_s: 0.0, ..CqedParams::sample(false) };
        assert_eq!(transfer_at(0.0, &p).0, Complex64::new(-1.0, 0.0));
        assert_eq!(reflection_phase(&p).unwrap(), PI);
    }

    #[test]
    fn occupied_reflects_without_phase() {
        let p = CqedParams { kappa_s: 0.0, ..CqedParams::sample(true) };
        let (c1, _) = transfer_at(0.0, &p);
        let expected = (p.g_m * p.g_m / p.gamma_s - p.kappa / 2.0) / (p.g_m * p.g_m / p.gamma_s + p.kappa / 2.0);
        assert!(c1.im.abs() < 1e-15 && c1.re > 0.0);
        assert!((c1.re - expected).abs() < 1e-12);
        assert!(reflection_phase(&p).unwrap().abs() < 0.01);
    }

    #[test]
    fn critical_coupling_has_no_phase() {
        let p = CqedParams { kappa_s: mhz(2.0), ..CqedParams::sample(false) };
        assert_eq!(reflection_phase(&p), Err(Error::UndefinedPhase));
    }

    #[test]
    fn lossless_limit_keeps_unitarity() {
        let p = CqedParams { kappa_s: 0.0, ..CqedParams::sample(true) };
        assert_eq!(p.gamma_eff(), f64::INFINITY);
        for i in 0..100 {
            let (c1, c2) = transfer_at((i as f64 - 50.0) * 3e5, &p);
            assert!((c1.norm_sqr() + c2.norm_sqr() - 1.0).abs() < 1e-12);
        }
        let p = CqedParams { kappa_s: 0.0, ..CqedParams::sample(false) };
        for i in 0..100 {
            let (c1, c2) = transfer_at((i as f64 - 50.0) * 3e5, &p);
            assert_eq!(c2, Complex64::new(0.0, 0.0));
            assert!((c1.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn conjugate_symmetry() {
        let p = CqedParams::sample(true);
        for i in 1..40 {
            let w = i as f64 * 4e5;
            assert!((transfer_at(-w, &p).0 - transfer_at(w, &p).0.conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn lambda_of_constant_channels() {
        let g = grid();
        let f = make_gaussian_mode(&g, 0.5e-6, 0.0).unwrap();
        let theta = 0.4;
        let tp = TransferPair::flat(g, Complex64::from_polar(1.0, theta)).unwrap();
        let l = mode_overlap_lambda(&f, &tp).unwrap();
        assert!((l - Complex64::from_polar(1.0, -theta)).norm() < 1e-12);
        let tp = TransferPair::flat(g, Complex64::new(-1.0, 0.0)).unwrap();
        assert!((mode_overlap_lambda(&f, &tp).unwrap() + 1.0).norm() < 1e-12);
    }

    #[test]
    fn zero_drive_gives_zero_trajectory() {
        let p = CqedParams::sample(true);
        let times: Vec<f64> = (0..20).map(|i| i as f64 * 1e-7).collect();
        let f = |t: f64| Complex64::new(libm::exp(-t * t * 1e13), 0.0);
        let tr = mean_field_simulate(&p, Complex64::new(0.0, 0.0), f, 1.0, (0.0, 2e-6), &times, &MeanFieldOptions::new(1e-9, 2e-8))
            .unwrap();
        assert!(tr.a_c.iter().chain(&tr.sigma).chain(&tr.b_out).all(|c| c.norm() == 0.0));
        assert!(tr.sigma_z.iter().all(|&s| s == -0.5));
    }

    #[test]
    fn estimate_scaling() {
        let p = CqedParams::sample(true);
        assert_eq!(linearization_error_estimate(&p, 0.0).unwrap().estimate, 0.0);
        let a = linearization_error_estimate(&p, 1.3).unwrap();
        let b = linearization_error_estimate(&p, 2.6).unwrap();
        assert!((b.estimate / a.estimate - 4.0).abs() < 1e-12);
        assert!(a.exact <= a.estimate);
        assert!(linearization_error_estimate(&p.with_occupied(true).clone_with_g(0.0), 1.0).is_err());
    }

    impl CqedParams {
        fn clone_with_g(self, g_m: f64) -> Self {
            Self { g_m, ..self }
        }
    }

    #[test]
    fn coupling_scalings() {
        let base = derive_gm(mhz(11e3), 2e-11, 2.4e-26, 0.3, mhz(2.0)).unwrap();
        let half_p = derive_gm(mhz(11e3), 2e-11, 1.2e-26, 0.3, mhz(2.0)).unwrap();
        let quad_v = derive_gm(mhz(11e3), 8e-11, 2.4e-26, 0.3, mhz(2.0)).unwrap();
        assert!((half_p.rabi / base.rabi - 0.5).abs() < 1e-12);
        assert!((quad_v.rabi / base.rabi - 0.5).abs() < 1e-12);
        assert!((base.rabi_over_kappa * mhz(2.0) - base.rabi).abs() < 1e-6 * base.rabi);
    }
}
