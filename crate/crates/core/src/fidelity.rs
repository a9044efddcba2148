//! Gate-level fidelities.
//!
//! The input `(c1|1_L⟩ + c2|1_R⟩) ⊗ (c3|even⟩ + c4|odd⟩)` is expanded into
//! four coherent branches `|p⟩|±α f⟩`. Branch `p` sees the storage transfer
//! of its polarization and the cavity transfer of its occupation (L occupied,
//! R empty). After the environments are traced out and the optical photon is
//! post-selected, the output is compared with the exact CZ image of the input.
//!
//! Everything downstream of the transfer functions depends on a handful of
//! mode integrals, collected in [`GateIntegrals`].

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use core::fmt;

use num_complex::Complex64;

use crate::cat::{cat_normalization, printed_fidelity_normalization, Parity};
use crate::cqed::{
    linearization_error_estimate, mean_field_simulate, transfer_at, transfer_functions, CqedParams,
    LinearizationEstimate, MeanFieldOptions, SigmaZ, TransferPair,
};
use crate::eit::{balance_losses, storage_transfer, EitChannelParams, Polarization, StorageTransfer};
use crate::oracle::{MicrowaveBin, OpticalBin, OracleProblem, OracleResult};
use crate::spectral::{make_gaussian_mode, weighted_intensity, FrequencyGrid, GaussianPulse, SampledMode};
use crate::{Error, Result};

/// Index of a polarization in per-channel arrays.
pub fn channel_index(p: Polarization) -> usize {
    match p {
        Polarization::L => 0,
        Polarization::R => 1,
    }
}

/// Cavity phase of the ideal gate: the occupied (L) channel reflects
/// without a phase, the empty (R) channel with `π`.
pub const IDEAL_PHASE: [f64; 2] = [1.0, -1.0];

const SIGNS: [f64; 2] = [1.0, -1.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateInput {
    /// Amplitudes on `|1⟩_L`, `|1⟩_R`.
    pub optical: [Complex64; 2],
    /// Amplitudes on `|even⟩`, `|odd⟩`.
    pub microwave: [Complex64; 2],
    pub alpha0: f64,
}

impl GateInput {
    pub fn new(optical: [Complex64; 2], microwave: [Complex64; 2], alpha0: f64) -> Result<Self> {
        let no = optical[0].norm_sqr() + optical[1].norm_sqr();
        let nm = microwave[0].norm_sqr() + microwave[1].norm_sqr();
        if libm::fabs(no - 1.0) > 1e-9 {
            return Err(Error::InvalidParameter { name: "input.optical", value: no });
        }
        if libm::fabs(nm - 1.0) > 1e-9 {
            return Err(Error::InvalidParameter { name: "input.microwave", value: nm });
        }
        if !(alpha0 >= 0.0) || !alpha0.is_finite() {
            return Err(Error::InvalidParameter { name: "cat.alpha", value: alpha0 });
        }
        Ok(Self { optical, microwave, alpha0 })
    }

    pub fn basis(polarization: Polarization, parity: Parity, alpha0: f64) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let mut optical = [zero; 2];
        optical[channel_index(polarization)] = one;
        let microwave = match parity {
            Parity::Even => [one, zero],
            Parity::Odd => [zero, one],
        };
        Self { optical, microwave, alpha0 }
    }
}

/// Coefficients of the four coherent branches `|1_L⟩|±α⟩` (`A±`) and `|1_R⟩|±α⟩` (`B±`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateOutcome {
    pub a_plus: Complex64,
    pub a_minus: Complex64,
    pub b_plus: Complex64,
    pub b_minus: Complex64,
    pub n_even: f64,
    pub n_odd: f64,
}

impl GateOutcome {
    /// Coefficient of channel `p` (0 = L, 1 = R) and branch sign index `s` (0 = +, 1 = −).
    pub fn coefficient(&self, p: usize, s: usize) -> Complex64 {
        match (p, s) {
            (0, 0) => self.a_plus,
            (0, _) => self.a_minus,
            (_, 0) => self.b_plus,
            _ => self.b_minus,
        }
    }
}

pub fn cz_branch_coefficients(input: &GateInput) -> Result<GateOutcome> {
    let alpha = Complex64::new(input.alpha0, 0.0);
    let [c1, c2] = input.optical;
    let [c3, c4] = input.microwave;
    let n_even = cat_normalization(alpha, Parity::Even)?;
    let n_odd = match cat_normalization(alpha, Parity::Odd) {
        Ok(n) => n,
        Err(_) if c4.norm() == 0.0 => 0.0,
        Err(e) => return Err(e),
    };
    let plus = c3 * n_even + c4 * n_odd;
    let minus = c3 * n_even - c4 * n_odd;
    Ok(GateOutcome { a_plus: c1 * plus, a_minus: c1 * minus, b_plus: c2 * plus, b_minus: c2 * minus, n_even, n_odd })
}

/// Mode integrals of one channel, all over the normalized input spectrum `|f|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelIntegrals {
    /// `∫ |f|² |C1|²`
    pub signal_norm: f64,
    /// `∫ |f|² C1`, the complex conjugate of the distortion overlap `Λ`.
    pub lbar: Complex64,
    /// `∫ |f|² |C2|²`
    pub noise_norm: f64,
    /// `⟨f|t f⟩` for the optical transfer `t`, balancing included.
    pub optical_overlap: Complex64,
    /// `⟨t f|t f⟩`, balancing included.
    pub optical_norm: f64,
    /// Storage efficiency before balancing.
    pub efficiency: f64,
}

impl ChannelIntegrals {
    pub fn lambda(&self) -> Complex64 {
        self.lbar.conj()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateIntegrals {
    /// Indexed by [`channel_index`].
    pub channels: [ChannelIntegrals; 2],
    /// `∫ |f|² conj(C2_R) C2_L`
    pub noise_cross: Complex64,
}

impl GateIntegrals {
    /// `∫ |f|² conj(C2_a) C2_b`.
    fn noise_overlap(&self, a: usize, b: usize) -> Complex64 {
        match (a, b) {
            (0, 0) => Complex64::new(self.channels[0].noise_norm, 0.0),
            (1, 1) => Complex64::new(self.channels[1].noise_norm, 0.0),
            (1, 0) => self.noise_cross,
            _ => self.noise_cross.conj(),
        }
    }

    /// The same integrals as sums over the bins of an oracle problem.
    pub fn from_bins(problem: &OracleProblem) -> Self {
        let mut ch = [ChannelIntegrals {
            signal_norm: 0.0,
            lbar: Complex64::new(0.0, 0.0),
            noise_norm: 0.0,
            optical_overlap: Complex64::new(0.0, 0.0),
            optical_norm: 0.0,
            efficiency: 0.0,
        }; 2];
        let mut cross = Complex64::new(0.0, 0.0);
        for bin in &problem.microwave_bins {
            let w = bin.amplitude.norm_sqr();
            for (p, c) in ch.iter_mut().enumerate() {
                let (c1, c2) = bin.transfer[p];
                c.signal_norm += w * c1.norm_sqr();
                c.lbar += c1 * w;
                c.noise_norm += w * c2.norm_sqr();
            }
            cross += bin.transfer[1].1.conj() * bin.transfer[0].1 * w;
        }
        for bin in &problem.optical_bins {
            let w = bin.amplitude.norm_sqr();
            for (p, c) in ch.iter_mut().enumerate() {
                c.optical_overlap += bin.transfer[p] * w;
                c.optical_norm += bin.transfer[p].norm_sqr() * w;
            }
        }
        for c in &mut ch {
            c.efficiency = c.optical_norm;
        }
        Self { channels: ch, noise_cross: cross }
    }
}

/// Mode integrals of one channel on the spectral grid.
pub fn channel_integrals(
    mode: &SampledMode,
    transfer: &TransferPair,
    storage: &StorageTransfer,
    attenuation: f64,
) -> Result<ChannelIntegrals> {
    let c1 = transfer.c1.amplitudes();
    let c2 = transfer.c2.amplitudes();
    let abs1: Vec<Complex64> = c1.iter().map(|c| Complex64::new(c.norm_sqr(), 0.0)).collect();
    let abs2: Vec<Complex64> = c2.iter().map(|c| Complex64::new(c.norm_sqr(), 0.0)).collect();
    let opt: Vec<Complex64> = storage.transfer().amplitudes().iter().map(|t| t * attenuation).collect();
    let opt_abs: Vec<Complex64> = opt.iter().map(|t| Complex64::new(t.norm_sqr(), 0.0)).collect();
    Ok(ChannelIntegrals {
        signal_norm: weighted_intensity(mode, &abs1)?.re,
        lbar: weighted_intensity(mode, c1)?,
        noise_norm: weighted_intensity(mode, &abs2)?.re,
        optical_overlap: weighted_intensity(mode, &opt)?,
        optical_norm: weighted_intensity(mode, &opt_abs)?.re,
        efficiency: storage.efficiency(),
    })
}

/// Post-selected fidelity of one separable input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparableFidelity {
    pub fidelity: f64,
    pub post_selection_probability: f64,
}

/// `⟨ψ_ideal|ρ_out|ψ_ideal⟩` for a separable input, from the branch Gram
/// matrix of system and environment states.
pub fn separable_input_fidelity(input: &GateInput, ints: &GateIntegrals) -> Result<SeparableFidelity> {
    let k = cz_branch_coefficients(input)?;
    let x = input.alpha0 * input.alpha0;

    // X[p][s] = ⟨ψ_ideal|system branch (p, s)⟩ times the branch coefficient.
    let mut xs = [[Complex64::new(0.0, 0.0); 2]; 2];
    for p in 0..2 {
        let ch = &ints.channels[p];
        for s in 0..2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..2 {
                let expo = -0.5 * x - 0.5 * x * ch.signal_norm + ch.lbar * (SIGNS[t] * IDEAL_PHASE[p] * SIGNS[s] * x);
                acc += k.coefficient(p, t).conj() * expo.exp();
            }
            xs[p][s] = ch.optical_overlap * k.coefficient(p, s) * acc;
        }
    }

    let mut num = Complex64::new(0.0, 0.0);
    for p in 0..2 {
        for s in 0..2 {
            for q in 0..2 {
                for s2 in 0..2 {
                    let d = ints.channels[p].noise_norm + ints.channels[q].noise_norm;
                    let env = (ints.noise_overlap(q, p) * (SIGNS[s] * SIGNS[s2] * x) - 0.5 * x * d).exp();
                    num += xs[p][s] * xs[q][s2].conj() * env;
                }
            }
        }
    }

    let mut prob = 0.0;
    for p in 0..2 {
        let ch = &ints.channels[p];
        let total = ch.signal_norm + ch.noise_norm;
        for s in 0..2 {
            for s2 in 0..2 {
                let gram = libm::exp(-x * total * (1.0 - SIGNS[s] * SIGNS[s2]));
                prob += ch.optical_norm * (k.coefficient(p, s) * k.coefficient(p, s2).conj()).re * gram;
            }
        }
    }
    if !(prob > 0.0) {
        return Err(Error::ZeroPostSelection);
    }
    Ok(SeparableFidelity { fidelity: num.re / prob, post_selection_probability: prob })
}

/// Closed-form microwave fidelity of a basis cat through one channel:
/// `e^{−x(1+c)} (1+ξ) (cosh 2xΛ_r + q cos 2xΛ_i) / (1 + q e^{−2x})²` with `ξ = e^{−2xd}`.
pub fn basis_microwave_fidelity(alpha: f64, parity: Parity, lambda: Complex64, signal_norm: f64, noise_norm: f64) -> f64 {
    let x = alpha * alpha;
    let q = parity.sign();
    let xi = libm::exp(-2.0 * x * noise_norm);
    let d = 1.0 + q * libm::exp(-2.0 * x);
    libm::exp(-x * (1.0 + signal_norm)) * (1.0 + xi) * (libm::cosh(2.0 * x * lambda.re) + q * libm::cos(2.0 * x * lambda.im))
        / (d * d)
}

/// The printed form `4𝒩(1+ξ)(cos 2xΛ_i + cosh 2xΛ_r)` with `ξ = e^{−xd}`.
pub fn printed_basis_microwave_fidelity(alpha: f64, parity: Parity, lambda: Complex64, noise_norm: f64) -> f64 {
    let x = alpha * alpha;
    let xi = libm::exp(-x * noise_norm);
    4.0 * printed_fidelity_normalization(alpha, parity)
        * (1.0 + xi)
        * (libm::cos(2.0 * x * lambda.im) + libm::cosh(2.0 * x * lambda.re))
}

/// A resolved ambiguity that affects a reported number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConventionFlag {
    /// Cat states normalized with `1/sqrt(2(1 ± e^{−2|α|²}))`.
    CatNormalizationCorrected,
    /// Environment branches `±α` overlap as `exp(−2|α|²∫|fC2|²)`.
    EnvironmentExponentDoubled,
    /// The printed-convention microwave fidelity exceeds one.
    PrintedFidelityAboveOne,
    /// `κ_s = 0` with a decaying atom; the noise amplitude is the finite limit.
    LosslessNoiseLimit,
    /// Occupied channel integrals come from the nonlinear mean-field model.
    MeanFieldChannel,
    /// Flat transfers replaced the physical channels.
    IdealChannels,
}

impl ConventionFlag {
    pub fn code(self) -> &'static str {
        match self {
            ConventionFlag::CatNormalizationCorrected => "cat-normalization-corrected",
            ConventionFlag::EnvironmentExponentDoubled => "environment-exponent-doubled",
            ConventionFlag::PrintedFidelityAboveOne => "printed-fidelity-above-one",
            ConventionFlag::LosslessNoiseLimit => "lossless-noise-limit",
            ConventionFlag::MeanFieldChannel => "mean-field-occupied-channel",
            ConventionFlag::IdealChannels => "ideal-channels",
        }
    }
}

impl fmt::Display for ConventionFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityReport {
    pub polarization: Polarization,
    pub parity: Parity,
    pub fidelity: f64,
    pub f_opt: f64,
    pub f_mw: f64,
    pub efficiency: f64,
    pub lambda: Complex64,
    pub xi: f64,
    pub post_selection_probability: f64,
    /// Sign of the retrieved cat relative to the input cat.
    pub output_sign: i8,
    pub f_mw_printed: f64,
    pub fidelity_printed: f64,
    pub xi_printed: f64,
    pub convention_flags: Vec<ConventionFlag>,
}

/// Sign of `⟨cat|cat'⟩` where `cat'` is the input cat sent through the channel.
fn output_sign(alpha: f64, parity: Parity, ch: &ChannelIntegrals) -> Result<i8> {
    let x = alpha * alpha;
    let n = cat_normalization(Complex64::new(alpha, 0.0), parity)?;
    let kk = [n, parity.sign() * n];
    let mut amp = Complex64::new(0.0, 0.0);
    for s in 0..2 {
        for t in 0..2 {
            amp += kk[t] * kk[s] * (ch.lbar * (SIGNS[t] * SIGNS[s] * x) - 0.5 * x - 0.5 * x * ch.signal_norm).exp();
        }
    }
    Ok(if amp.re >= 0.0 { 1 } else { -1 })
}

pub fn truth_table_entry(
    polarization: Polarization,
    parity: Parity,
    alpha: f64,
    ints: &GateIntegrals,
    extra_flags: &[ConventionFlag],
) -> Result<FidelityReport> {
    let p = channel_index(polarization);
    let ch = &ints.channels[p];
    let input = GateInput::basis(polarization, parity, alpha);
    let sep = separable_input_fidelity(&input, ints)?;
    let f_opt = ch.optical_overlap.norm_sqr() / ch.optical_norm;
    let lambda = ch.lambda();
    let f_mw = basis_microwave_fidelity(alpha, parity, lambda, ch.signal_norm, ch.noise_norm);
    let f_mw_printed = printed_basis_microwave_fidelity(alpha, parity, lambda, ch.noise_norm);
    let x = alpha * alpha;

    let mut flags = alloc::vec![ConventionFlag::CatNormalizationCorrected, ConventionFlag::EnvironmentExponentDoubled];
    if f_mw_printed > 1.0 {
        flags.push(ConventionFlag::PrintedFidelityAboveOne);
    }
    flags.extend_from_slice(extra_flags);
    flags.sort();
    flags.dedup();

    Ok(FidelityReport {
        polarization,
        parity,
        fidelity: sep.fidelity,
        f_opt,
        f_mw,
        efficiency: ch.efficiency,
        lambda,
        xi: libm::exp(-2.0 * x * ch.noise_norm),
        post_selection_probability: sep.post_selection_probability,
        output_sign: output_sign(alpha, parity, ch)?,
        f_mw_printed,
        fidelity_printed: f_opt * f_mw_printed,
        xi_printed: libm::exp(-x * ch.noise_norm),
        convention_flags: flags,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// `exp(−iθσ/2)` applied to `(u, v)`.
pub fn bloch_rotation(state: [Complex64; 2], axis: Axis, angle: f64) -> [Complex64; 2] {
    let c = libm::cos(0.5 * angle);
    let s = libm::sin(0.5 * angle);
    let [u, v] = state;
    let i = Complex64::new(0.0, 1.0);
    let (su, sv) = match axis {
        Axis::X => (v, u),
        Axis::Y => (-i * v, i * u),
        Axis::Z => (u, -v),
    };
    [u * c - i * s * su, v * c - i * s * sv]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    pub axis: Axis,
    pub angle: f64,
}

impl Rotation {
    pub fn identity() -> Self {
        Self { axis: Axis::Z, angle: 0.0 }
    }

    pub fn apply(&self, state: [Complex64; 2]) -> [Complex64; 2] {
        bloch_rotation(state, self.axis, self.angle)
    }
}

/// Rotations taking the fiducial state to `+Z, −Z, +X, −X, +Y, −Y`.
pub fn cardinal_rotations() -> [Rotation; 6] {
    [
        Rotation::identity(),
        Rotation { axis: Axis::X, angle: core::f64::consts::PI },
        Rotation { axis: Axis::Y, angle: FRAC_PI_2 },
        Rotation { axis: Axis::Y, angle: -FRAC_PI_2 },
        Rotation { axis: Axis::X, angle: -FRAC_PI_2 },
        Rotation { axis: Axis::X, angle: FRAC_PI_2 },
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct AverageFidelity {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// `cells[i][j]`: optical rotation `i`, microwave rotation `j`.
    pub cells: Vec<Vec<SeparableFidelity>>,
}

/// Mean fidelity over the product of rotated fiducial states `|1_L⟩` and `|even⟩`.
pub fn average_fidelity(
    ints: &GateIntegrals,
    alpha: f64,
    optical: &[Rotation],
    microwave: &[Rotation],
) -> Result<AverageFidelity> {
    if optical.is_empty() || microwave.is_empty() {
        return Err(Error::InvalidParameter { name: "bloch.grid", value: 0.0 });
    }
    let fiducial = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let mut cells = Vec::with_capacity(optical.len());
    let (mut sum, mut min, mut max) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
    for ro in optical {
        let mut row = Vec::with_capacity(microwave.len());
        for rm in microwave {
            let input = GateInput { optical: ro.apply(fiducial), microwave: rm.apply(fiducial), alpha0: alpha };
            let f = separable_input_fidelity(&input, ints)?;
            sum += f.fidelity;
            min = min.min(f.fidelity);
            max = max.max(f.fidelity);
            row.push(f);
        }
        cells.push(row);
    }
    let mean = sum / (optical.len() * microwave.len()) as f64;
    Ok(AverageFidelity { mean, min, max, cells })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelModel {
    Physical,
    /// Perfect memory and flat cavity transfers `C1 = +1` (occupied), `−1` (empty).
    Ideal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Linear,
    /// Occupied-channel integrals from the nonlinear mean-field equations.
    MeanField,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateConfig {
    /// Indexed by [`channel_index`].
    pub eit: [EitChannelParams; 2],
    /// Occupation flag is ignored; L is occupied and R is empty.
    pub cqed: CqedParams,
    pub alpha: f64,
    pub pulse: GaussianPulse,
    pub grid: FrequencyGrid,
    pub channel_model: ChannelModel,
    pub engine: Engine,
    pub mean_field_tol: f64,
}

impl GateConfig {
    pub fn sample() -> Self {
        let pulse = GaussianPulse { duration: 0.5e-6, delay: 0.0 };
        Self {
            eit: [EitChannelParams::sample_left(), EitChannelParams::sample_right()],
            cqed: CqedParams::sample(true),
            alpha: libm::sqrt(2.0),
            pulse,
            grid: FrequencyGrid::for_pulse(
                pulse.duration,
                crate::spectral::DEFAULT_SPAN_FACTOR,
                crate::spectral::DEFAULT_POINTS,
            )
            .expect("valid default grid"),
            channel_model: ChannelModel::Physical,
            engine: Engine::Linear,
            mean_field_tol: 1e-9,
        }
    }

    pub fn cqed_for(&self, p: usize) -> CqedParams {
        self.cqed.with_occupied(p == 0)
    }
}

/// Mean-field replacement for the occupied channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldSummary {
    /// `∫ |b_out|² dt / α²`
    pub signal_norm: f64,
    /// `∫ conj(f) b_out dt / α`
    pub lbar: Complex64,
    pub max_drift: f64,
    pub estimate: LinearizationEstimate,
}

/// Slowest decay rate of the linearized atom-cavity system.
fn slowest_decay(p: &CqedParams) -> f64 {
    let g = p.effective_g();
    let k = 0.5 * (p.kappa + p.kappa_s);
    let gs = p.gamma_s;
    let disc = Complex64::new(0.25 * (k - gs) * (k - gs) - g * g, 0.0).sqrt();
    let mean = 0.5 * (k + gs);
    (mean - disc.re).min(mean + disc.re)
}

fn mean_field_span(p: &CqedParams, pulse: &GaussianPulse) -> Result<(f64, f64, f64)> {
    let rate = slowest_decay(p);
    if !(rate > 0.0) {
        return Err(Error::InvalidParameter { name: "cqed.decay", value: rate });
    }
    let t0 = pulse.delay - 4.0 * pulse.duration;
    Ok((t0, pulse.delay + 4.0 * pulse.duration + 40.0 / rate, rate))
}

/// Runs the mean-field model for the occupied channel and reduces it to mode integrals.
pub fn mean_field_channel(cqed: &CqedParams, alpha: f64, pulse: &GaussianPulse, center: f64, tol: f64) -> Result<MeanFieldSummary> {
    let p = cqed.with_occupied(true);
    let (t0, t1, _) = mean_field_span(&p, pulse)?;
    let (drive, sigma_z) = if alpha == 0.0 { (1.0, SigmaZ::Frozen) } else { (alpha, SigmaZ::Dynamic) };
    let opts = MeanFieldOptions { tol, sigma_z, max_step: pulse.duration / 40.0 };
    let n = 2000;
    let times: Vec<f64> = (0..=n).map(|i| t0 + (t1 - t0) * i as f64 / n as f64).collect();
    let peak = pulse.envelope(pulse.delay, center).norm();
    let tr = mean_field_simulate(
        &p,
        Complex64::new(drive, 0.0),
        |t| pulse.envelope(t, center),
        peak,
        (t0, t1),
        &times,
        &opts,
    )?;
    Ok(MeanFieldSummary {
        signal_norm: tr.output_energy / (drive * drive),
        lbar: tr.mode_overlap / drive,
        max_drift: if alpha == 0.0 { 0.0 } else { tr.max_sigma_z_drift() },
        estimate: linearization_error_estimate(&p, alpha)?,
    })
}

/// Nonlinear-versus-linear comparison for one drive amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizationRow {
    pub alpha: f64,
    pub max_drift: f64,
    pub estimate: f64,
    pub estimate_exact: f64,
    /// `max_drift / estimate`, zero when both vanish.
    pub ratio: f64,
    /// Relative L2 distance between mean-field and linear output fields.
    pub relative_l2: f64,
}

pub fn linearization_row(
    cqed: &CqedParams,
    alpha: f64,
    pulse: &GaussianPulse,
    grid: &FrequencyGrid,
    tol: f64,
) -> Result<LinearizationRow> {
    let p = cqed.with_occupied(true);
    let est = linearization_error_estimate(&p, alpha)?;
    if alpha == 0.0 {
        return Ok(LinearizationRow {
            alpha,
            max_drift: 0.0,
            estimate: 0.0,
            estimate_exact: 0.0,
            ratio: 0.0,
            relative_l2: 0.0,
        });
    }
    let (t0, t1, rate) = mean_field_span(&p, pulse)?;
    let period = crate::units::TWO_PI / grid.spacing();
    let w_end = (pulse.delay + 3.0 * pulse.duration + 10.0 / rate).min(t0 + 0.8 * period).min(t1);
    let w_start = pulse.delay - 3.0 * pulse.duration;
    let n = 2000;
    let times: Vec<f64> = (0..=n).map(|i| w_start + (w_end - w_start) * i as f64 / n as f64).collect();
    let center = grid.center();
    let peak = pulse.envelope(pulse.delay, center).norm();
    let opts = MeanFieldOptions { tol, sigma_z: SigmaZ::Dynamic, max_step: pulse.duration / 40.0 };
    let tr = mean_field_simulate(
        &p,
        Complex64::new(alpha, 0.0),
        |t| pulse.envelope(t, center),
        peak,
        (t0, t1),
        &times,
        &opts,
    )?;

    let mode = make_gaussian_mode(grid, pulse.duration, pulse.delay)?;
    let tp = transfer_functions(grid, &p)?;
    let lin = crate::spectral::apply_pointwise(&mode, &tp.c1)?.time_domain(&times);
    let (mut diff, mut base) = (0.0, 0.0);
    for (b, l) in tr.b_out.iter().zip(&lin) {
        let l = l * alpha;
        diff += (b - l).norm_sqr();
        base += l.norm_sqr();
    }
    let drift = tr.max_sigma_z_drift();
    Ok(LinearizationRow {
        alpha,
        max_drift: drift,
        estimate: est.estimate,
        estimate_exact: est.exact,
        ratio: drift / est.estimate,
        relative_l2: libm::sqrt(diff / base),
    })
}

/// Both stages of the gate, evaluated for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub config: GateConfig,
    pub mode: SampledMode,
    /// Indexed by [`channel_index`].
    pub storage: [StorageTransfer; 2],
    pub transfers: [TransferPair; 2],
    pub attenuation: [f64; 2],
    /// Integrals of the linear channels.
    pub linear: GateIntegrals,
    /// Integrals used for reported fidelities, per the configured engine.
    pub integrals: GateIntegrals,
    pub mean_field: Option<MeanFieldSummary>,
    pub flags: Vec<ConventionFlag>,
}

impl Gate {
    pub fn build(config: GateConfig) -> Result<Self> {
        config.cqed.validate()?;
        let mode = make_gaussian_mode(&config.grid, config.pulse.duration, config.pulse.delay)?;
        let mut flags = Vec::new();
        let (storage, transfers) = match config.channel_model {
            ChannelModel::Physical => {
                let sl = storage_transfer(&mode, &config.eit[0])?;
                let sr = storage_transfer(&mode, &config.eit[1])?;
                let tl = transfer_functions(&config.grid, &config.cqed_for(0))?;
                let tr = transfer_functions(&config.grid, &config.cqed_for(1))?;
                if tl.gamma_eff.is_infinite() {
                    flags.push(ConventionFlag::LosslessNoiseLimit);
                }
                ([sl, sr], [tl, tr])
            }
            ChannelModel::Ideal => {
                flags.push(ConventionFlag::IdealChannels);
                let t = StorageTransfer::transparent(&mode);
                (
                    [t.clone(), t],
                    [
                        TransferPair::flat(config.grid, Complex64::new(IDEAL_PHASE[0], 0.0))?,
                        TransferPair::flat(config.grid, Complex64::new(IDEAL_PHASE[1], 0.0))?,
                    ],
                )
            }
        };
        let (al, ar) = balance_losses(storage[0].c1o, storage[1].c1o)?;
        let attenuation = [al, ar];
        let mut channels = [
            channel_integrals(&mode, &transfers[0], &storage[0], al)?,
            channel_integrals(&mode, &transfers[1], &storage[1], ar)?,
        ];
        let w: Vec<Complex64> = transfers[1]
            .c2
            .amplitudes()
            .iter()
            .zip(transfers[0].c2.amplitudes())
            .map(|(r, l)| r.conj() * l)
            .collect();
        let noise_cross = weighted_intensity(&mode, &w)?;
        let linear = GateIntegrals { channels, noise_cross };

        let mut mean_field = None;
        let mut integrals = linear;
        if config.engine == Engine::MeanField && config.channel_model == ChannelModel::Physical {
            let mf = mean_field_channel(&config.cqed, config.alpha, &config.pulse, config.grid.center(), config.mean_field_tol)?;
            let lin_noise = channels[0].noise_norm;
            let noise = (1.0 - mf.signal_norm).max(0.0);
            channels[0].signal_norm = mf.signal_norm;
            channels[0].lbar = mf.lbar;
            channels[0].noise_norm = noise;
            let scale = if lin_noise > 0.0 { libm::sqrt(noise / lin_noise) } else { 0.0 };
            integrals = GateIntegrals { channels, noise_cross: noise_cross * scale };
            mean_field = Some(mf);
            flags.push(ConventionFlag::MeanFieldChannel);
        }

        Ok(Self { config, mode, storage, transfers, attenuation, linear, integrals, mean_field, flags })
    }

    /// Rows in the order R even, R odd, L even, L odd.
    pub fn truth_table(&self) -> Result<Vec<FidelityReport>> {
        let mut rows = Vec::with_capacity(4);
        for pol in [Polarization::R, Polarization::L] {
            for parity in [Parity::Even, Parity::Odd] {
                rows.push(truth_table_entry(pol, parity, self.config.alpha, &self.integrals, &self.flags)?);
            }
        }
        Ok(rows)
    }

    pub fn separable(&self, optical: [Complex64; 2], microwave: [Complex64; 2]) -> Result<SeparableFidelity> {
        let input = GateInput::new(optical, microwave, self.config.alpha)?;
        separable_input_fidelity(&input, &self.integrals)
    }

    pub fn average(&self, optical: &[Rotation], microwave: &[Rotation]) -> Result<AverageFidelity> {
        average_fidelity(&self.integrals, self.config.alpha, optical, microwave)
    }

    /// Cavity transfer of channel `p` at an arbitrary frequency.
    pub fn microwave_transfer_at(&self, p: usize, omega: f64) -> (Complex64, Complex64) {
        match self.config.channel_model {
            ChannelModel::Physical => transfer_at(omega, &self.config.cqed_for(p)),
            ChannelModel::Ideal => (Complex64::new(IDEAL_PHASE[p], 0.0), Complex64::new(0.0, 0.0)),
        }
    }

    /// Discretizes the linear gate into `n_bins` frequency bins spanning
    /// `±8.6` spectral standard deviations of the pulse.
    pub fn oracle_problem(&self, input: &GateInput, n_bins: usize, truncation: usize) -> Result<OracleProblem> {
        if n_bins == 0 {
            return Err(Error::InvalidParameter { name: "oracle.bins", value: 0.0 });
        }
        let sigma = self.config.pulse.spectral_sigma();
        let half = 8.6 * sigma;
        let width = 2.0 * half / n_bins as f64;
        let center = self.config.grid.center();
        let mut amps: Vec<(f64, Complex64)> = (0..n_bins)
            .map(|i| {
                let w = center - half + (i as f64 + 0.5) * width;
                (w, self.config.pulse.spectrum_at(w, center) * libm::sqrt(width))
            })
            .collect();
        let norm = libm::sqrt(amps.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>());
        for (_, a) in &mut amps {
            *a /= norm;
        }
        let microwave_bins = amps
            .iter()
            .map(|&(w, a)| MicrowaveBin {
                amplitude: a,
                transfer: [self.microwave_transfer_at(0, w), self.microwave_transfer_at(1, w)],
            })
            .collect();
        let optical_bins = amps
            .iter()
            .map(|&(w, a)| OpticalBin {
                amplitude: a,
                transfer: [
                    self.storage[0].at(w) * self.attenuation[0],
                    self.storage[1].at(w) * self.attenuation[1],
                ],
            })
            .collect();
        Ok(OracleProblem {
            optical: input.optical,
            microwave: input.microwave,
            alpha: input.alpha0,
            ideal_phase: IDEAL_PHASE,
            microwave_bins,
            optical_bins,
            truncation,
        })
    }

    /// Oracle fidelity and the analytic formula on the same bins.
    pub fn oracle_comparison(&self, input: &GateInput, n_bins: usize, truncation: usize) -> Result<(OracleResult, SeparableFidelity)> {
        let problem = self.oracle_problem(input, n_bins, truncation)?;
        let oracle = crate::oracle::fock_oracle_fidelity(&problem)?;
        let analytic = separable_input_fidelity(input, &GateIntegrals::from_bins(&problem))?;
        Ok((oracle, analytic))
    }
}
