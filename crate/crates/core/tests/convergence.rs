use hybridgate_core::cqed::{mode_overlap_lambda, transfer_functions, CqedParams};
use hybridgate_core::fidelity::{Gate, GateConfig};
use hybridgate_core::spectral::{make_gaussian_mode, FrequencyGrid};

fn fidelities(grid: FrequencyGrid) -> Vec<f64> {
    let gate = Gate::build(GateConfig { grid, ..GateConfig::sample() }).unwrap();
    gate.truth_table().unwrap().iter().map(|r| r.fidelity).collect()
}

#[test]
fn truth_table_is_converged_in_the_grid() {
    let base = GateConfig::sample().grid;
    let reference = fidelities(base);
    let finer = fidelities(base.refined());
    let wider = fidelities(FrequencyGrid::new(base.center(), 1.5 * base.span(), 3073).unwrap());
    for i in 0..4 {
        assert!((reference[i] - finer[i]).abs() < 1e-9, "row {i}: {} vs {}", reference[i], finer[i]);
        assert!((reference[i] - wider[i]).abs() < 1e-9, "row {i}: {} vs {}", reference[i], wider[i]);
    }
}

#[test]
fn distortion_overlap_converges_under_refinement() {
    let pulse = 0.5e-6;
    let mut previous: Option<hybridgate_core::Complex64> = None;
    for n in [257, 513, 1025, 2049] {
        let grid = FrequencyGrid::for_pulse(pulse, 16.0, n).unwrap();
        let mode = make_gaussian_mode(&grid, pulse, 0.0).unwrap();
        let lambda = mode_overlap_lambda(&mode, &transfer_functions(&grid, &CqedParams::sample(false)).unwrap()).unwrap();
        if let Some(p) = previous {
            let d: f64 = (lambda - p).norm();
            assert!(d < 1e-10, "n = {n}: change {d}");
        }
        previous = Some(lambda);
    }
}
