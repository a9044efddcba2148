use std::sync::OnceLock;

use proptest::prelude::*;

use hybridgate_core::cat::{cat_normalization, coherent_overlap, environment_overlap, FockVector, Parity};
use hybridgate_core::cqed::{transfer_at, CqedParams};
use hybridgate_core::eit::{balance_losses, storage_transfer, ControlSchedule, EitChannelParams};
use hybridgate_core::fidelity::{bloch_rotation, separable_input_fidelity, Axis, Gate, GateConfig, GateInput};
use hybridgate_core::spectral::{inner_product, make_gaussian_mode, FrequencyGrid, SampledMode};
use hybridgate_core::units::{khz, mhz, us};
use hybridgate_core::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn small_grid() -> FrequencyGrid {
    FrequencyGrid::new(0.0, 10.0, 17).unwrap()
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| c(a, b))
}

fn mode() -> impl Strategy<Value = SampledMode> {
    prop::collection::vec(complex(), 17).prop_map(|v| SampledMode::new(small_grid(), v).unwrap())
}

fn qubit() -> impl Strategy<Value = [Complex64; 2]> {
    (complex(), complex())
        .prop_filter("non-zero", |(a, b)| a.norm_sqr() + b.norm_sqr() > 1e-3)
        .prop_map(|(a, b)| {
            let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
            [a / n, b / n]
        })
}

fn sample_gate() -> &'static Gate {
    static GATE: OnceLock<Gate> = OnceLock::new();
    GATE.get_or_init(|| Gate::build(GateConfig::sample()).unwrap())
}

proptest! {
    #[test]
    fn cavity_transfer_is_unitary(
        g in 0.0..mhz(10.0),
        kappa in mhz(0.01)..mhz(10.0),
        ks_ratio in 0.0..2.0f64,
        gamma in 0.0..mhz(1.0),
        omega in -mhz(50.0)..mhz(50.0),
        occupied in any::<bool>(),
    ) {
        let p = CqedParams { g_m: g, kappa, kappa_s: ks_ratio * kappa, gamma_s: gamma, occupied };
        let (c1, c2) = transfer_at(omega, &p);
        prop_assert!((c1.norm_sqr() + c2.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn inner_product_is_sesquilinear(f in mode(), g in mode(), h in mode(), a in complex()) {
        let lhs = inner_product(&f, &SampledMode::new(small_grid(),
            g.amplitudes().iter().zip(h.amplitudes()).map(|(x, y)| a * x + y).collect()).unwrap()).unwrap();
        let rhs = a * inner_product(&f, &g).unwrap() + inner_product(&f, &h).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
        let fg = inner_product(&f, &g).unwrap();
        let gf = inner_product(&g, &f).unwrap();
        prop_assert!((fg - gf.conj()).norm() < 1e-12 * (1.0 + fg.norm()));
        prop_assert!(inner_product(&f, &f).unwrap().re >= 0.0);
    }

    #[test]
    fn coherent_overlap_is_bounded(a in complex(), b in complex()) {
        let o = coherent_overlap(a, b);
        prop_assert!(o.norm() <= 1.0 + 1e-15);
        prop_assert!((o.norm() - (-(a - b).norm_sqr() / 2.0).exp()).abs() < 1e-12);
        prop_assert!((coherent_overlap(a, a) - 1.0).norm() < 1e-12);
    }

    #[test]
    fn cat_states_are_normalized(re in -2.0..2.0f64, im in -2.0..2.0f64, odd in any::<bool>()) {
        let alpha = c(re, im);
        prop_assume!(alpha.norm() > 0.05);
        let parity = if odd { Parity::Odd } else { Parity::Even };
        let n = cat_normalization(alpha, parity).unwrap();
        let plus = FockVector::coherent(alpha, 40).unwrap();
        let minus = FockVector::coherent(-alpha, 40).unwrap();
        let cat = FockVector {
            amplitudes: plus.amplitudes.iter().zip(&minus.amplitudes).map(|(p, m)| (p + m * parity.sign()) * n).collect(),
        };
        prop_assert!((cat.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn environment_overlap_is_hermitian_and_bounded(
        f in mode(), c2a in mode(), c2b in mode(), alpha in 0.0..2.0f64, si in any::<bool>(), sj in any::<bool>(),
    ) {
        let f = f.normalized().unwrap();
        let scale = |m: SampledMode| SampledMode::new(small_grid(),
            m.amplitudes().iter().map(|x| x / 3.0).collect()).unwrap();
        let (c2a, c2b) = (scale(c2a), scale(c2b));
        let (si, sj) = (if si { 1.0 } else { -1.0 }, if sj { 1.0 } else { -1.0 });
        let a = c(alpha, 0.0);
        let ij = environment_overlap(a, si, sj, &f, &c2a, &c2b).unwrap();
        let ji = environment_overlap(a, sj, si, &f, &c2b, &c2a).unwrap();
        prop_assert!((ij - ji.conj()).norm() < 1e-12);
        prop_assert!(ij.norm() <= 1.0 + 1e-12);
        let ii = environment_overlap(a, si, si, &f, &c2a, &c2a).unwrap();
        prop_assert!((ii - 1.0).norm() < 1e-12);
    }

    #[test]
    fn balancing_equalizes_channels(l in 0.01..1.0f64, r in 0.01..1.0f64) {
        let (al, ar) = balance_losses(l, r).unwrap();
        prop_assert!((al * l - ar * r).abs() < 1e-14);
        prop_assert!((al.max(ar) - 1.0).abs() < 1e-15);
        prop_assert!(al <= 1.0 && ar <= 1.0);
    }

    #[test]
    fn rotations_preserve_norm(s in qubit(), angle in -7.0..7.0f64, axis in 0usize..3) {
        let axis = [Axis::X, Axis::Y, Axis::Z][axis];
        let r = bloch_rotation(s, axis, angle);
        prop_assert!((r[0].norm_sqr() + r[1].norm_sqr() - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn separable_fidelity_is_a_probability(o in qubit(), m in qubit(), alpha in 0.3..2.0f64) {
        let gate = sample_gate();
        let input = GateInput::new(o, m, alpha).unwrap();
        let f = separable_input_fidelity(&input, &gate.integrals).unwrap();
        prop_assert!(f.fidelity >= -1e-12 && f.fidelity <= 1.0 + 1e-12);
        prop_assert!(f.post_selection_probability > 0.0 && f.post_selection_probability <= 1.0 + 1e-12);
    }
}

fn eit_params(gamma_bc: f64, storage: f64) -> EitChannelParams {
    EitChannelParams {
        gamma_bc,
        schedule: ControlSchedule::symmetric(mhz(30.0), 20.0 / us(1.0), us(2.0), storage).unwrap(),
        ..EitChannelParams::sample_left()
    }
}

fn pulse_mode() -> SampledMode {
    let grid = FrequencyGrid::for_pulse(0.5e-6, 16.0, 513).unwrap();
    make_gaussian_mode(&grid, 0.5e-6, 0.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn storage_gain_falls_with_dephasing_and_time(
        g1 in 0.0..khz(10.0), dg in khz(0.1)..khz(10.0), t1 in us(1.0)..us(20.0), dt in us(0.5)..us(10.0),
    ) {
        let f = pulse_mode();
        let base = storage_transfer(&f, &eit_params(g1, t1)).unwrap();
        let more_dephasing = storage_transfer(&f, &eit_params(g1 + dg, t1)).unwrap();
        let longer = storage_transfer(&f, &eit_params(g1, t1 + dt)).unwrap();
        prop_assert!((base.c1o.powi(2) + base.c2o.powi(2) - 1.0).abs() < 1e-12);
        prop_assert!(more_dephasing.c1o < base.c1o);
        prop_assert!(longer.c1o <= base.c1o);
        for i in 0..base.chi.len() {
            prop_assert!(more_dephasing.chi[i] <= base.chi[i] * (1.0 + 1e-12));
        }
    }
}
