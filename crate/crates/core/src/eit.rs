//! EIT write/store/retrieve cycle in the spectral domain.
//!
//! The retrieved field is `f_out(ω) = χ(ω) e^{iΦ(ω)} f_in(ω)` with
//!
//! ```text
//! χ(ω) = exp(∫ A dt − ω² ∫ (1−η)² C dt)
//! Φ(ω) = −ω³ ∫ D (1−η)³ dt
//! ```
//!
//! in the frame co-moving with the polariton (the linear group-delay phase
//! is dropped). Losses are completed to a unitary with a fictitious noise
//! mode of weight `c2o² = 1 − c1o²`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::quad::adaptive_simpson_panels;
use crate::spectral::SampledMode;
use crate::units::{khz, mhz, us, BOLTZMANN, SPEED_OF_LIGHT};
use crate::{Error, Result};

/// Smallest control amplitude, as a fraction of `Ω0`.
pub const OMEGA_FLOOR: f64 = 1e-6;
/// Absolute tolerance of each dimensionless time integral.
pub const TIME_QUADRATURE_TOL: f64 = 1e-10;
/// Threshold above which an adiabaticity ratio is reported as violated.
pub const ADIABATIC_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarization {
    L,
    R,
}

impl Polarization {
    pub fn label(self) -> &'static str {
        match self {
            Polarization::L => "L",
            Polarization::R => "R",
        }
    }
}

/// Control field `Ω(t) = Ω0 (2 + tanh r(t−t_on) − tanh r(t−t_off)) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSchedule {
    pub omega0: f64,
    pub ramp_rate: f64,
    pub t_off: f64,
    pub t_on: f64,
    pub total_time: f64,
}

impl ControlSchedule {
    pub fn new(omega0: f64, ramp_rate: f64, t_off: f64, t_on: f64, total_time: f64) -> Result<Self> {
        let s = Self { omega0, ramp_rate, t_off, t_on, total_time };
        s.validate()?;
        Ok(s)
    }

    /// Write ramp at `write_time`, read ramp `storage_time` later, and the
    /// same margin after the read ramp as before the write ramp.
    pub fn symmetric(omega0: f64, ramp_rate: f64, write_time: f64, storage_time: f64) -> Result<Self> {
        Self::new(omega0, ramp_rate, write_time, write_time + storage_time, 2.0 * write_time + storage_time)
    }

    /// `Ω0 = 2π × 30 MHz`, ramp rate 20/μs, ramps at 2 μs and 18 μs, 20 μs cycle.
    pub fn standard() -> Self {
        Self { omega0: mhz(30.0), ramp_rate: 20.0 / us(1.0), t_off: us(2.0), t_on: us(18.0), total_time: us(20.0) }
    }

    pub fn storage_time(&self) -> f64 {
        self.t_on - self.t_off
    }

    fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64, bool); 5] = [
            ("eit.omega0", self.omega0, self.omega0 > 0.0 && self.omega0.is_finite()),
            ("eit.ramp_rate", self.ramp_rate, self.ramp_rate > 0.0 && self.ramp_rate.is_finite()),
            ("eit.t_off", self.t_off, self.t_off >= 0.0),
            ("eit.t_on", self.t_on, self.t_on > self.t_off),
            ("eit.total_time", self.total_time, self.total_time > self.t_on && self.total_time.is_finite()),
        ];
        for (name, value, ok) in checks {
            if !ok {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    /// Panel boundaries that isolate both ramps for adaptive quadrature.
    fn breakpoints(&self) -> Vec<f64> {
        let w = 10.0 / self.ramp_rate;
        let mut b = alloc::vec![0.0, self.total_time];
        for c in [self.t_off, self.t_on] {
            for x in [c - w, c, c + w] {
                if x > 0.0 && x < self.total_time {
                    b.push(x);
                }
            }
        }
        b.sort_by(|x, y| x.total_cmp(y));
        b.dedup();
        b
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

fn sech2(x: f64) -> f64 {
    4.0 * logistic(2.0 * x) * logistic(-2.0 * x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSample {
    pub omega: f64,
    pub d_omega: f64,
    pub dd_omega: f64,
}

fn control_raw(t: f64, s: &ControlSchedule) -> ControlSample {
    let a = s.ramp_rate * (t - s.t_on);
    let b = s.ramp_rate * (t - s.t_off);
    let omega = s.omega0 * (logistic(2.0 * a) + logistic(-2.0 * b));
    let (sa, sb) = (sech2(a), sech2(b));
    let d_omega = 0.5 * s.omega0 * s.ramp_rate * (sa - sb);
    let dd_omega = s.omega0 * s.ramp_rate * s.ramp_rate * (sb * libm::tanh(b) - sa * libm::tanh(a));
    ControlSample { omega, d_omega, dd_omega }
}

/// Control amplitude and its first time derivative, without the floor.
pub fn control_amplitude(t: f64, s: &ControlSchedule) -> Result<(f64, f64)> {
    if !(0.0..=s.total_time).contains(&t) {
        return Err(Error::OutOfRange { t, start: 0.0, end: s.total_time });
    }
    let c = control_raw(t, s);
    Ok((c.omega, c.d_omega))
}

/// Control amplitude clamped at `OMEGA_FLOOR · Ω0`; derivatives vanish on the floor.
pub fn effective_control(t: f64, s: &ControlSchedule) -> ControlSample {
    let c = control_raw(t, s);
    let floor = OMEGA_FLOOR * s.omega0;
    if c.omega < floor {
        ControlSample { omega: floor, d_omega: 0.0, dd_omega: 0.0 }
    } else {
        c
    }
}

/// Dark-state mixing angle `η = g²N / (g²N + Ω²)`.
pub fn mixing_eta(omega: f64, g: f64, atom_number: f64) -> Result<f64> {
    let g2n = g * g * atom_number;
    let denom = g2n + omega * omega;
    if !(denom > 0.0) || g2n < 0.0 {
        return Err(Error::InvalidParameter { name: "eit.g2n", value: g2n });
    }
    Ok(g2n / denom)
}

/// Polariton group velocity `c(1 − η)`.
pub fn group_velocity(eta: f64) -> f64 {
    SPEED_OF_LIGHT * (1.0 - eta)
}

/// Group index `1 / (1 − η)`.
pub fn group_index(eta: f64) -> f64 {
    1.0 / (1.0 - eta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EitChannelParams {
    pub g: f64,
    pub atom_number: f64,
    pub schedule: ControlSchedule,
    pub gamma_ba: f64,
    pub gamma_bc: f64,
    pub length: f64,
    pub label: Polarization,
}

impl EitChannelParams {
    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        let g2n = self.g * self.g * self.atom_number;
        if !(g2n > 0.0) || !g2n.is_finite() {
            return Err(Error::InvalidParameter { name: "eit.g2n", value: g2n });
        }
        if !(self.gamma_ba >= 0.0) {
            return Err(Error::InvalidParameter { name: "eit.gamma_ba", value: self.gamma_ba });
        }
        if !(self.gamma_bc >= 0.0) {
            return Err(Error::InvalidParameter { name: "eit.gamma_bc", value: self.gamma_bc });
        }
        if !(self.length > 0.0) {
            return Err(Error::InvalidParameter { name: "eit.length", value: self.length });
        }
        Ok(())
    }

    /// Ground-state storage in `(g, e_R, g')`: `g/2π = 12 kHz`, `γ_bc/2π = 16 Hz`.
    pub fn sample_right() -> Self {
        Self {
            g: khz(12.0),
            atom_number: 6e4,
            schedule: ControlSchedule::standard(),
            gamma_ba: mhz(3.0),
            gamma_bc: khz(0.016),
            length: 0.4e-3,
            label: Polarization::R,
        }
    }

    /// Rydberg storage in `(g, e_L, r1)`: `g/2π = 29 kHz`, `γ_bc/2π = 3.5 kHz`.
    pub fn sample_left() -> Self {
        Self { g: khz(29.0), gamma_bc: khz(3.5), label: Polarization::L, ..Self::sample_right() }
    }

    fn g2n(&self) -> f64 {
        self.g * self.g * self.atom_number
    }
}

/// Coefficients of the polariton propagation equation at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbcCoefficients {
    /// Attenuation rate (1/s).
    pub a: f64,
    /// Diffusive spreading (s).
    pub c: f64,
    /// Dispersion (s²).
    pub d: f64,
    pub eta: f64,
}

fn coefficients_at(t: f64, p: &EitChannelParams) -> (AbcCoefficients, f64) {
    let ctl = effective_control(t, &p.schedule);
    let g2n = p.g2n();
    let o2 = ctl.omega * ctl.omega;
    let eta = g2n / (g2n + o2);
    let one_minus_eta = o2 / (g2n + o2);
    let rate = ctl.d_omega / ctl.omega;
    let a = eta * (rate - p.gamma_bc);
    let d = eta / o2;
    let c = d * ((2.0 * p.gamma_bc + p.gamma_ba) - 6.0 * rate);
    (AbcCoefficients { a, c, d, eta }, one_minus_eta)
}

/// `A`, `C`, `D` for a real, positive control field.
pub fn abc_coefficients(t: f64, p: &EitChannelParams) -> Result<AbcCoefficients> {
    if !(0.0..=p.schedule.total_time).contains(&t) {
        return Err(Error::OutOfRange { t, start: 0.0, end: p.schedule.total_time });
    }
    let (c, _) = coefficients_at(t, p);
    if !(c.a.is_finite() && c.c.is_finite() && c.d.is_finite()) {
        return Err(Error::NonFinite { what: "EIT coefficients" });
    }
    Ok(c)
}

/// Largest adiabaticity ratios over the cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticityReport {
    /// `max |Ω̇/Ω| γ_ba / Ω²`
    pub loss_ratio: f64,
    /// `max |Ω̇/Ω| / Ω`
    pub rate_ratio: f64,
    /// `max |Ω̈/Ω| / Ω²`
    pub curvature_ratio: f64,
}

impl AdiabaticityReport {
    pub fn is_adiabatic(&self) -> bool {
        self.loss_ratio <= ADIABATIC_THRESHOLD
            && self.rate_ratio <= ADIABATIC_THRESHOLD
            && self.curvature_ratio <= ADIABATIC_THRESHOLD
    }
}

pub fn adiabaticity(p: &EitChannelParams) -> AdiabaticityReport {
    let s = &p.schedule;
    let n = 20_000;
    let mut report = AdiabaticityReport { loss_ratio: 0.0, rate_ratio: 0.0, curvature_ratio: 0.0 };
    for i in 0..=n {
        let t = s.total_time * i as f64 / n as f64;
        let c = effective_control(t, s);
        let rate = libm::fabs(c.d_omega / c.omega);
        let o2 = c.omega * c.omega;
        report.loss_ratio = report.loss_ratio.max(rate * p.gamma_ba / o2);
        report.rate_ratio = report.rate_ratio.max(rate / c.omega);
        report.curvature_ratio = report.curvature_ratio.max(libm::fabs(c.dd_omega / c.omega) / o2);
    }
    report
}

/// Spectral transfer of one storage channel for a registered input mode.
#[derive(Debug, Clone, PartialEq)]
pub struct StorageTransfer {
    pub grid: crate::spectral::FrequencyGrid,
    /// Amplitude attenuation `χ(ω) ≥ 0`.
    pub chi: Vec<f64>,
    /// Co-moving-frame phase `Φ(ω)`.
    pub phi: Vec<f64>,
    /// Transmitted amplitude for the registered input mode.
    pub c1o: f64,
    /// Amplitude of the completing noise mode.
    pub c2o: f64,
    /// `∫ A dt`
    pub log_gain: f64,
    /// `∫ (1−η)² C dt` (s²)
    pub spread: f64,
    /// `∫ D (1−η)³ dt` (s³)
    pub dispersion: f64,
    pub adiabaticity: AdiabaticityReport,
}

impl StorageTransfer {
    /// Perfect memory: `χ ≡ 1`, `Φ ≡ 0`.
    pub fn transparent(f_in: &SampledMode) -> Self {
        let n = f_in.grid().len();
        Self {
            grid: *f_in.grid(),
            chi: alloc::vec![1.0; n],
            phi: alloc::vec![0.0; n],
            c1o: 1.0,
            c2o: 0.0,
            log_gain: 0.0,
            spread: 0.0,
            dispersion: 0.0,
            adiabaticity: AdiabaticityReport { loss_ratio: 0.0, rate_ratio: 0.0, curvature_ratio: 0.0 },
        }
    }

    pub fn efficiency(&self) -> f64 {
        self.c1o * self.c1o
    }

    /// `χ(ω) e^{iΦ(ω)}` at an arbitrary frequency.
    pub fn at(&self, omega: f64) -> Complex64 {
        Complex64::from_polar(libm::exp(self.log_gain - omega * omega * self.spread), -omega * omega * omega * self.dispersion)
    }

    /// `χ(ω) e^{iΦ(ω)}` as a sampled function.
    pub fn transfer(&self) -> SampledMode {
        let amps = self.chi.iter().zip(&self.phi).map(|(&x, &p)| Complex64::from_polar(x, p)).collect();
        SampledMode::new(self.grid, amps).expect("transfer arrays match grid")
    }
}

/// Integrates the storage cycle and evaluates the transfer on `f_in`'s grid.
pub fn storage_transfer(f_in: &SampledMode, p: &EitChannelParams) -> Result<StorageTransfer> {
    p.validate()?;
    let grid = *f_in.grid();
    let w_ref = grid.frequencies().map(libm::fabs).fold(0.0, f64::max).max(grid.spacing());
    let breaks = p.schedule.breakpoints();

    let log_gain = adaptive_simpson_panels(&|t| coefficients_at(t, p).0.a, &breaks, TIME_QUADRATURE_TOL);
    let spread_scaled = adaptive_simpson_panels(
        &|t| {
            let (c, ome) = coefficients_at(t, p);
            w_ref * w_ref * ome * ome * c.c
        },
        &breaks,
        TIME_QUADRATURE_TOL,
    );
    let disp_scaled = adaptive_simpson_panels(
        &|t| {
            let (c, ome) = coefficients_at(t, p);
            w_ref * w_ref * w_ref * ome * ome * ome * c.d
        },
        &breaks,
        TIME_QUADRATURE_TOL,
    );
    if !(log_gain.is_finite() && spread_scaled.is_finite() && disp_scaled.is_finite()) {
        return Err(Error::NonFinite { what: "EIT time integrals" });
    }

    let mut chi = Vec::with_capacity(grid.len());
    let mut phi = Vec::with_capacity(grid.len());
    for w in grid.frequencies() {
        let x = w / w_ref;
        chi.push(libm::exp(log_gain - x * x * spread_scaled));
        phi.push(-x * x * x * disp_scaled);
    }

    let weights: Vec<Complex64> = chi.iter().map(|x| Complex64::new(x * x, 0.0)).collect();
    let mut eff = crate::spectral::weighted_intensity(f_in, &weights)?.re;
    let norm_in = f_in.norm_sqr();
    if norm_in > 0.0 {
        eff /= norm_in;
    }
    if eff > 1.0 + 1e-8 {
        return Err(Error::InvalidParameter { name: "eit.gain", value: eff });
    }
    let eff = eff.min(1.0);
    let c1o = libm::sqrt(eff);
    let c2o = libm::sqrt(1.0 - eff);

    Ok(StorageTransfer {
        grid,
        chi,
        phi,
        c1o,
        c2o,
        log_gain,
        spread: spread_scaled / (w_ref * w_ref),
        dispersion: disp_scaled / (w_ref * w_ref * w_ref),
        adiabaticity: adiabaticity(p),
    })
}

/// Retrieved mode, unnormalized and normalized (post-selected).
pub fn apply_storage(f_in: &SampledMode, st: &StorageTransfer) -> Result<(SampledMode, SampledMode)> {
    if *f_in.grid() != st.grid {
        return Err(Error::GridMismatch);
    }
    let out = crate::spectral::apply_pointwise(f_in, &st.transfer())?;
    let normalized = out.normalized()?;
    Ok((out, normalized))
}

/// Attenuations that equalize both channels at the weaker one's amplitude.
pub fn balance_losses(c1o_l: f64, c1o_r: f64) -> Result<(f64, f64)> {
    for (name, v) in [("c1o_l", c1o_l), ("c1o_r", c1o_r)] {
        if !(v > 0.0 && v <= 1.0 + 1e-12) {
            return Err(Error::InvalidParameter { name, value: v });
        }
    }
    if c1o_l <= c1o_r {
        Ok((1.0, c1o_l / c1o_r))
    } else {
        Ok((c1o_r / c1o_l, 1.0))
    }
}

/// Two readings of the thermal Doppler dephasing estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerEstimate {
    /// `|Δk| · k_B T / m`, as printed. Not a rate dimensionally.
    pub as_printed: f64,
    /// `|Δk| · sqrt(k_B T / m)`, wavenumber mismatch times thermal velocity (rad/s).
    pub thermal_velocity: f64,
}

pub fn doppler_dephasing(temperature: f64, k_ge: f64, k_er1: f64, mass: f64) -> Result<DopplerEstimate> {
    if !(temperature >= 0.0) {
        return Err(Error::InvalidParameter { name: "temperature", value: temperature });
    }
    if !(mass > 0.0) {
        return Err(Error::InvalidParameter { name: "mass", value: mass });
    }
    let dk = libm::fabs(k_ge - k_er1);
    let v2 = BOLTZMANN * temperature / mass;
    Ok(DopplerEstimate { as_printed: dk * v2, thermal_velocity: dk * libm::sqrt(v2) })
}
