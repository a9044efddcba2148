//! Coherent and cat states of the microwave mode.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::spectral::SampledMode;
use crate::{Error, Result};

/// Default Fock truncation for amplitudes up to 2.
pub const DEFAULT_TRUNCATION: usize = 40;
/// Largest admissible population in the last retained Fock level.
pub const TAIL_MASS_LIMIT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

/// `⟨a|b⟩` for coherent states.
pub fn coherent_overlap(a: Complex64, b: Complex64) -> Complex64 {
    (a.conj() * b - 0.5 * a.norm_sqr() - 0.5 * b.norm_sqr()).exp()
}

/// `1 / sqrt(2(1 + p e^{−2|α|²}))`, the prefactor of `|α⟩ ± |−α⟩`.
pub fn cat_normalization(alpha: Complex64, parity: Parity) -> Result<f64> {
    let x = alpha.norm_sqr();
    let bracket = match parity {
        Parity::Even => 1.0 + libm::exp(-2.0 * x),
        Parity::Odd => -libm::expm1(-2.0 * x),
    };
    if !(bracket > 0.0) {
        return Err(Error::DegenerateCat);
    }
    Ok(1.0 / libm::sqrt(2.0 * bracket))
}

/// The factor as printed for the microwave fidelity, `e^{−2|α|²}/(2 ± e^{−2|α|²})²`.
pub fn printed_fidelity_normalization(alpha: f64, parity: Parity) -> f64 {
    let e = libm::exp(-2.0 * alpha * alpha);
    let d = 2.0 + parity.sign() * e;
    e / (d * d)
}

/// `n (|α f⟩ + p |−α f⟩)` in the temporal mode `mode`.
#[derive(Debug, Clone, PartialEq)]
pub struct CatState {
    pub alpha: Complex64,
    pub parity: Parity,
    pub mode: SampledMode,
}

impl CatState {
    pub fn new(alpha: Complex64, parity: Parity, mode: SampledMode) -> Result<Self> {
        cat_normalization(alpha, parity)?;
        Ok(Self { alpha, parity, mode })
    }

    pub fn normalization(&self) -> f64 {
        cat_normalization(self.alpha, self.parity).expect("checked at construction")
    }

    /// Coefficients of `|+α⟩` and `|−α⟩`.
    pub fn branch_coefficients(&self) -> [f64; 2] {
        let n = self.normalization();
        [n, self.parity.sign() * n]
    }
}

/// `⟨E_i|E_j⟩` between environment branches `sign_i α f C2_i` and `sign_j α f C2_j`.
pub fn environment_overlap(
    alpha: Complex64,
    sign_i: f64,
    sign_j: f64,
    f_in: &SampledMode,
    c2_i: &SampledMode,
    c2_j: &SampledMode,
) -> Result<Complex64> {
    if f_in.grid() != c2_i.grid() || f_in.grid() != c2_j.grid() {
        return Err(Error::GridMismatch);
    }
    let x = alpha.norm_sqr();
    let w: Vec<Complex64> = c2_i
        .amplitudes()
        .iter()
        .zip(c2_j.amplitudes())
        .map(|(u, v)| -0.5 * u.norm_sqr() - 0.5 * v.norm_sqr() + sign_i * sign_j * u.conj() * v)
        .collect();
    Ok((crate::spectral::weighted_intensity(f_in, &w)? * x).exp())
}

/// The printed environment overlap `exp(−|α|² ∫ |f|² conj(C2_j) C2_i)`.
pub fn printed_environment_overlap(
    alpha: Complex64,
    f_in: &SampledMode,
    c2_i: &SampledMode,
    c2_j: &SampledMode,
) -> Result<Complex64> {
    if f_in.grid() != c2_i.grid() || f_in.grid() != c2_j.grid() {
        return Err(Error::GridMismatch);
    }
    let w: Vec<Complex64> = c2_i.amplitudes().iter().zip(c2_j.amplitudes()).map(|(u, v)| v.conj() * u).collect();
    Ok((-crate::spectral::weighted_intensity(f_in, &w)? * alpha.norm_sqr()).exp())
}

/// Single-mode state in the number basis `|0⟩ … |N_f⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    pub amplitudes: Vec<Complex64>,
}

impl FockVector {
    pub fn truncation(&self) -> usize {
        self.amplitudes.len() - 1
    }

    /// `|β⟩` truncated at `truncation`; fails if the last level holds more
    /// than `TAIL_MASS_LIMIT`.
    pub fn coherent(beta: Complex64, truncation: usize) -> Result<Self> {
        let mut amplitudes = Vec::with_capacity(truncation + 1);
        let mut c = Complex64::new(libm::exp(-0.5 * beta.norm_sqr()), 0.0);
        amplitudes.push(c);
        for n in 1..=truncation {
            c = c * beta / libm::sqrt(n as f64);
            amplitudes.push(c);
        }
        let v = Self { amplitudes };
        let tail = v.tail_mass();
        if tail >= TAIL_MASS_LIMIT {
            return Err(Error::TruncationInadequate { tail_mass: tail });
        }
        Ok(v)
    }

    pub fn tail_mass(&self) -> f64 {
        self.amplitudes.last().map_or(0.0, |a| a.norm_sqr())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}
