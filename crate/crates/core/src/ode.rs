//! Adaptive Dormand–Prince 5(4) integrator with dense output.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    /// One absolute tolerance per state component.
    pub atol: Vec<f64>,
    /// Largest allowed step; keeps the stepper from skipping short features.
    pub max_step: f64,
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl Tolerances {
    pub fn uniform(dim: usize, rtol: f64, atol: f64, max_step: f64) -> Self {
        Self { rtol, atol: vec![atol; dim], max_step, initial_step: None, max_steps: 5_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// States at the requested output times, in order.
    pub samples: Vec<Vec<f64>>,
    pub final_state: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrates `dy/dt = rhs(t, y, dy)` from `t0` to `t_end`, reporting the
/// state at each of `t_eval` (sorted, inside `[t0, t_end]`).
pub fn integrate<F>(mut rhs: F, t0: f64, y0: &[f64], t_end: f64, t_eval: &[f64], tol: &Tolerances) -> Result<Solution>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    if tol.atol.len() != n {
        return Err(Error::InvalidParameter { name: "ode.atol.len", value: tol.atol.len() as f64 });
    }
    if !(t_end > t0) {
        return Err(Error::InvalidParameter { name: "ode.t_end", value: t_end });
    }
    if !(tol.max_step > 0.0) {
        return Err(Error::InvalidParameter { name: "ode.max_step", value: tol.max_step });
    }
    if t_eval.windows(2).any(|w| w[1] < w[0]) || t_eval.iter().any(|&t| t < t0 || t > t_end) {
        return Err(Error::InvalidParameter { name: "ode.t_eval", value: f64::NAN });
    }

    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k: [Vec<f64>; 7] = core::array::from_fn(|_| vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut rc = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];

    let mut samples = Vec::with_capacity(t_eval.len());
    let mut next_out = 0;
    while next_out < t_eval.len() && t_eval[next_out] <= t0 {
        samples.push(y.clone());
        next_out += 1;
    }

    rhs(t, &y, &mut k[0]);
    let span = t_end - t0;
    let mut h = tol.initial_step.unwrap_or(1e-3 * span).min(tol.max_step).min(span);
    let mut accepted = 0;
    let mut rejected = 0;
    let mut last_rejected = false;

    while t < t_end {
        if accepted + rejected >= tol.max_steps {
            return Err(Error::IntegratorFailure { t, reason: "step budget exhausted" });
        }
        let mut last = false;
        if t + h >= t_end || t + 1.01 * h >= t_end {
            h = t_end - t;
            last = true;
        }
        if h <= 1e-14 * libm::fabs(t).max(span) {
            return Err(Error::IntegratorFailure { t, reason: "step size underflow" });
        }

        let stage = |ks: &[Vec<f64>; 7], coeffs: &[(usize, f64)], out: &mut [f64], y: &[f64]| {
            for i in 0..n {
                let mut s = 0.0;
                for &(j, a) in coeffs {
                    s += a * ks[j][i];
                }
                out[i] = y[i] + h * s;
            }
        };

        stage(&k, &[(0, A21)], &mut tmp, &y);
        rhs(t + C2 * h, &tmp, &mut k[1]);
        stage(&k, &[(0, A31), (1, A32)], &mut tmp, &y);
        rhs(t + C3 * h, &tmp, &mut k[2]);
        stage(&k, &[(0, A41), (1, A42), (2, A43)], &mut tmp, &y);
        rhs(t + C4 * h, &tmp, &mut k[3]);
        stage(&k, &[(0, A51), (1, A52), (2, A53), (3, A54)], &mut tmp, &y);
        rhs(t + C5 * h, &tmp, &mut k[4]);
        stage(&k, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)], &mut tmp, &y);
        rhs(t + h, &tmp, &mut k[5]);
        stage(&k, &[(0, A71), (2, A73), (3, A74), (4, A75), (5, A76)], &mut y_new, &y);
        rhs(t + h, &y_new, &mut k[6]);

        let mut acc = 0.0;
        for i in 0..n {
            err[i] = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            let scale = tol.atol[i] + tol.rtol * libm::fabs(y[i]).max(libm::fabs(y_new[i]));
            let r = err[i] / scale;
            acc += r * r;
        }
        let err_norm = libm::sqrt(acc / n.max(1) as f64);
        if !err_norm.is_finite() {
            return Err(Error::IntegratorFailure { t, reason: "non-finite error estimate" });
        }

        if err_norm <= 1.0 {
            accepted += 1;
            let t_new = if last { t_end } else { t + h };
            if next_out < t_eval.len() && t_eval[next_out] <= t_new {
                for i in 0..n {
                    let ydiff = y_new[i] - y[i];
                    let bspl = h * k[0][i] - ydiff;
                    rc[0][i] = y[i];
                    rc[1][i] = ydiff;
                    rc[2][i] = bspl;
                    rc[3][i] = ydiff - h * k[6][i] - bspl;
                    rc[4][i] = h
                        * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i]);
                }
                while next_out < t_eval.len() && t_eval[next_out] <= t_new {
                    let th = (t_eval[next_out] - t) / h;
                    let th1 = 1.0 - th;
                    let s: Vec<f64> = (0..n)
                        .map(|i| rc[0][i] + th * (rc[1][i] + th1 * (rc[2][i] + th * (rc[3][i] + th1 * rc[4][i]))))
                        .collect();
                    samples.push(s);
                    next_out += 1;
                }
            }
            t = t_new;
            core::mem::swap(&mut y, &mut y_new);
            let (first, rest) = k.split_at_mut(1);
            first[0].copy_from_slice(&rest[5]);
            let fac_max = if last_rejected { 1.0 } else { 10.0 };
            let fac = (0.9 * libm::pow(err_norm.max(1e-10), -0.2)).clamp(0.2, fac_max);
            h = (h * fac).min(tol.max_step);
            last_rejected = false;
        } else {
            rejected += 1;
            let fac = (0.9 * libm::pow(err_norm, -0.2)).clamp(0.2, 1.0);
            h *= fac;
            last_rejected = true;
        }
    }
    while samples.len() < t_eval.len() {
        samples.push(y.clone());
    }
    Ok(Solution { samples, final_state: y, accepted, rejected })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_with_dense_output() {
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.25).collect();
        let tol = Tolerances::uniform(1, 1e-10, 1e-12, 1.0);
        let sol = integrate(|_, y, dy| dy[0] = -y[0], 0.0, &[1.0], 5.0, &times, &tol).unwrap();
        for (t, s) in times.iter().zip(&sol.samples) {
            assert!((s[0] - libm::exp(-t)).abs() < 1e-9, "{t}");
        }
        assert!((sol.final_state[0] - libm::exp(-5.0)).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_conserves_energy() {
        let tol = Tolerances::uniform(2, 1e-11, 1e-12, 0.1);
        let sol = integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            &[1.0, 0.0],
            20.0,
            &[],
            &tol,
        )
        .unwrap();
        let y = &sol.final_state;
        assert!((y[0] - libm::cos(20.0)).abs() < 1e-8);
        assert!((y[0] * y[0] + y[1] * y[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn max_step_catches_narrow_pulse() {
        let pulse = |t: f64| libm::exp(-((t - 7.3) / 0.01) * ((t - 7.3) / 0.01));
        let tol = Tolerances::uniform(1, 1e-10, 1e-12, 0.002);
        let sol = integrate(|t, _, dy| dy[0] = pulse(t), 0.0, &[0.0], 10.0, &[], &tol).unwrap();
        let exact = 0.01 * libm::sqrt(core::f64::consts::PI);
        assert!((sol.final_state[0] - exact).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        let tol = Tolerances::uniform(1, 1e-8, 1e-8, 1.0);
        assert!(integrate(|_, _, _| {}, 1.0, &[0.0], 0.0, &[], &tol).is_err());
        assert!(integrate(|_, _, _| {}, 0.0, &[0.0, 1.0], 1.0, &[], &tol).is_err());
        assert!(integrate(|_, _, _| {}, 0.0, &[0.0], 1.0, &[2.0], &tol).is_err());
    }
}
