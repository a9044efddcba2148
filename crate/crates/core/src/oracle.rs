//! Brute-force fidelity of the gate in a truncated Fock space.
//!
//! Every microwave frequency bin is a separate bosonic mode holding a
//! coherent amplitude `±α f_k`. The cavity acts on each bin as a beam
//! splitter `a† → C1 a_sys† + C2 a_env†`, applied to the number-state
//! expansion. The optical photon sees a per-bin single-photon transfer, and
//! the post-selected state keeps only the photon-present part. Nothing here
//! uses a closed-form coherent-state overlap.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::cat::FockVector;
use crate::{Error, Result};

/// One microwave frequency bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicrowaveBin {
    /// Discretized mode amplitude; `Σ |f_k|² = 1` over all bins.
    pub amplitude: Complex64,
    /// `(C1, C2)` for the L (occupied) and R (empty) channels.
    pub transfer: [(Complex64, Complex64); 2],
}

/// One optical frequency bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalBin {
    pub amplitude: Complex64,
    /// Single-photon transfer of the L and R storage channels, including balancing.
    pub transfer: [Complex64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleProblem {
    /// Amplitudes on `|1⟩_L`, `|1⟩_R`.
    pub optical: [Complex64; 2],
    /// Amplitudes on `|even⟩`, `|odd⟩`.
    pub microwave: [Complex64; 2],
    pub alpha: f64,
    /// Ideal cavity phase per channel (`+1` for L, `−1` for R in the CZ gate).
    pub ideal_phase: [f64; 2],
    pub microwave_bins: Vec<MicrowaveBin>,
    pub optical_bins: Vec<OpticalBin>,
    pub truncation: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub fidelity: f64,
    pub post_selection_probability: f64,
    /// Norm of the microwave system plus environment state, summed over both channels.
    pub microwave_norm: f64,
    pub max_tail_mass: f64,
}

fn binomial_roots(n_max: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut row = vec![1.0; n + 1];
        for k in 1..n {
            row[k] = rows[n - 1][k - 1] + rows[n - 1][k];
        }
        rows.push(row);
    }
    rows.into_iter().map(|r| r.into_iter().map(libm::sqrt).collect()).collect()
}

/// Joint (system, environment) state after the beam splitter, row-major in
/// `(m_sys, n_env)`.
fn beam_split(input: &FockVector, c1: Complex64, c2: Complex64, roots: &[Vec<f64>]) -> Vec<Complex64> {
    let d = input.amplitudes.len();
    let mut p1 = vec![Complex64::new(1.0, 0.0); d];
    let mut p2 = vec![Complex64::new(1.0, 0.0); d];
    for j in 1..d {
        p1[j] = p1[j - 1] * c1;
        p2[j] = p2[j - 1] * c2;
    }
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for (n, amp) in input.amplitudes.iter().enumerate() {
        for j in 0..=n {
            out[j * d + (n - j)] += amp * roots[n][j] * p1[j] * p2[n - j];
        }
    }
    out
}

pub fn fock_oracle_fidelity(problem: &OracleProblem) -> Result<OracleResult> {
    let nf = problem.truncation;
    if problem.microwave_bins.is_empty() || problem.microwave_bins.len() > 64 || problem.optical_bins.is_empty() {
        return Err(Error::InvalidParameter { name: "oracle.bins", value: problem.microwave_bins.len() as f64 });
    }
    let d = nf + 1;
    let roots = binomial_roots(nf);
    let alpha = problem.alpha;
    let signs = [1.0, -1.0];

    let mut max_tail: f64 = 0.0;
    let mut coherent = |beta: Complex64| -> Result<FockVector> {
        let v = FockVector::coherent(beta, nf)?;
        max_tail = max_tail.max(v.tail_mass());
        Ok(v)
    };

    let mut cross = Complex64::new(1.0, 0.0);
    let mut inputs: Vec<[FockVector; 2]> = Vec::with_capacity(problem.microwave_bins.len());
    for bin in &problem.microwave_bins {
        let plus = coherent(bin.amplitude * alpha)?;
        let minus = coherent(-bin.amplitude * alpha)?;
        cross *= plus.inner(&minus);
        inputs.push([plus, minus]);
    }
    let even_sq = 2.0 + 2.0 * cross.re;
    let odd_sq = 2.0 - 2.0 * cross.re;
    let [c3, c4] = problem.microwave;
    if (c4.norm() > 0.0 && !(odd_sq > 0.0)) || !(even_sq > 0.0) {
        return Err(Error::DegenerateCat);
    }
    let ne = 1.0 / libm::sqrt(even_sq);
    let no = if odd_sq > 0.0 { 1.0 / libm::sqrt(odd_sq) } else { 0.0 };
    let k = |p: usize, s: usize| problem.optical[p] * (c3 * ne + signs[s] * c4 * no);

    let mut fid_num = Complex64::new(0.0, 0.0);
    let mut prob = 0.0;
    let mut mw_norm = 0.0;

    let mut overlap_opt = [Complex64::new(0.0, 0.0); 2];
    let mut norm_opt = [0.0; 2];
    for bin in &problem.optical_bins {
        for p in 0..2 {
            let w = bin.amplitude.norm_sqr();
            overlap_opt[p] += bin.transfer[p] * w;
            norm_opt[p] += bin.transfer[p].norm_sqr() * w;
        }
    }

    // phi[p][t][s][k] = ⟨ideal_{p,t,k}|_sys ψ_{p,s,k}⟩, a vector over the environment index.
    let mut phi: [[[Vec<Vec<Complex64>>; 2]; 2]; 2] = Default::default();
    // gram[p][s'][s] = Π_k ⟨ψ_{p,s',k}|ψ_{p,s,k}⟩
    let mut gram = [[[Complex64::new(1.0, 0.0); 2]; 2]; 2];
    for (bin, input) in problem.microwave_bins.iter().zip(&inputs) {
        for p in 0..2 {
            let (c1, c2) = bin.transfer[p];
            let outs = [beam_split(&input[0], c1, c2, &roots), beam_split(&input[1], c1, c2, &roots)];
            for s in 0..2 {
                for s2 in 0..2 {
                    let ip: Complex64 = outs[s2].iter().zip(&outs[s]).map(|(a, b)| a.conj() * b).sum();
                    gram[p][s2][s] *= ip;
                }
            }
            for t in 0..2 {
                let ideal = coherent(bin.amplitude * (signs[t] * problem.ideal_phase[p] * alpha))?;
                for s in 0..2 {
                    let mut v = vec![Complex64::new(0.0, 0.0); d];
                    for (m, im) in ideal.amplitudes.iter().enumerate() {
                        let ic = im.conj();
                        for n in 0..d {
                            v[n] += ic * outs[s][m * d + n];
                        }
                    }
                    phi[p][t][s].push(v);
                }
            }
        }
    }

    for p in 0..2 {
        for s in 0..2 {
            for s2 in 0..2 {
                let term = k(p, s) * k(p, s2).conj() * gram[p][s2][s];
                prob += norm_opt[p] * term.re;
                mw_norm += term.re;
            }
        }
    }

    let n_bins = problem.microwave_bins.len();
    for p in 0..2 {
        for t in 0..2 {
            for s in 0..2 {
                let w = k(p, t).conj() * k(p, s) * overlap_opt[p];
                for q in 0..2 {
                    for t2 in 0..2 {
                        for s2 in 0..2 {
                            let w2 = k(q, t2).conj() * k(q, s2) * overlap_opt[q];
                            let mut m = Complex64::new(1.0, 0.0);
                            for b in 0..n_bins {
                                let x = &phi[p][t][s][b];
                                let y = &phi[q][t2][s2][b];
                                m *= x.iter().zip(y).map(|(a, c)| a * c.conj()).sum::<Complex64>();
                            }
                            fid_num += w * w2.conj() * m;
                        }
                    }
                }
            }
        }
    }

    if !(prob > 0.0) {
        return Err(Error::ZeroPostSelection);
    }
    Ok(OracleResult {
        fidelity: fid_num.re / prob,
        post_selection_probability: prob,
        microwave_norm: mw_norm,
        max_tail_mass: max_tail,
    })
}
