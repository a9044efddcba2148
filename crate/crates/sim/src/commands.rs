//! The four subcommands, each producing one CSV table.

use num_complex::Complex64;
use rayon::prelude::*;

use hybridgate_core::cat::Parity;
use hybridgate_core::eit::Polarization;
use hybridgate_core::fidelity::{
    average_fidelity, cardinal_rotations, linearization_row, ChannelModel, Engine, FidelityReport, Gate,
    GateInput,
};
use hybridgate_core::spectral::apply_pointwise;
use hybridgate_core::units::{to_mhz, TWO_PI};

use crate::config::RunConfig;
use crate::csv::{Cell, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    TruthTable { oracle_check: bool },
    Sweep,
    Modes,
    ValidateLinearization,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::TruthTable { .. } => "truth-table",
            Command::Sweep => "sweep",
            Command::Modes => "modes",
            Command::ValidateLinearization => "validate-linearization",
        }
    }
}

/// Reference truth table: input, efficiency, fidelity.
pub const REFERENCE_TABLE: [(&str, f64, f64); 4] =
    [("R-even", 0.74, 0.923), ("R-odd", 0.74, 0.923), ("L-even", 0.45, 0.969), ("L-odd", 0.45, 0.967)];
pub const EFFICIENCY_TOLERANCE: f64 = 0.05;
pub const FIDELITY_TOLERANCE: f64 = 0.03;

pub fn execute(command: Command, config: &RunConfig) -> Result<Table, CliError> {
    let mut table = match command {
        Command::TruthTable { oracle_check } => truth_table(config, oracle_check || config.oracle_check)?,
        Command::Sweep => sweep(config)?,
        Command::Modes => modes(config)?,
        Command::ValidateLinearization => validate_linearization(config)?,
    };
    let mut header = vec![format!("sim {}", command.name())];
    header.extend(config.resolved().into_iter().map(|(k, v)| format!("config {k} = {v}")));
    header.append(&mut table.comments);
    table.comments = header;
    Ok(table)
}

fn row_label(r: &FidelityReport) -> String {
    let parity = match r.parity {
        Parity::Even => "even",
        Parity::Odd => "odd",
    };
    format!("{}-{parity}", r.polarization.label())
}

fn join_flags<'a>(codes: impl IntoIterator<Item = &'a str>) -> String {
    let mut v: Vec<&str> = codes.into_iter().collect();
    v.sort_unstable();
    v.dedup();
    v.join(";")
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

pub fn truth_table(config: &RunConfig, oracle_check: bool) -> Result<Table, CliError> {
    let gate = Gate::build(config.gate)?;
    let reports = gate.truth_table()?;

    let mut columns = vec![
        "input",
        "output_sign",
        "efficiency",
        "fidelity",
        "f_opt",
        "f_mw",
        "lambda_re",
        "lambda_im",
        "xi",
        "post_selection_probability",
        "fidelity_printed",
        "f_mw_printed",
        "xi_printed",
        "reference_efficiency",
        "reference_fidelity",
        "within_reference",
        "printed_within_reference",
        "convention_flags",
    ];
    if oracle_check {
        columns.extend(["oracle_fidelity", "oracle_binned_analytic", "oracle_discrepancy", "oracle_tail_mass"]);
    }

    let oracle: Vec<Option<(f64, f64, f64)>> = if oracle_check {
        reports
            .par_iter()
            .map(|r| {
                let input = GateInput::basis(r.polarization, r.parity, config.gate.alpha);
                let (o, a) = gate.oracle_comparison(&input, config.oracle_bins, config.oracle_truncation)?;
                Ok(Some((o.fidelity, a.fidelity, o.max_tail_mass)))
            })
            .collect::<Result<_, hybridgate_core::Error>>()?
    } else {
        vec![None; reports.len()]
    };

    let mut table = Table::new(&columns);
    let mut any_outside = false;
    let mut any_printed_inside = false;
    for ((r, reference), o) in reports.iter().zip(REFERENCE_TABLE).zip(&oracle) {
        let (_, ref_eff, ref_fid) = reference;
        let inside = within(r.efficiency, ref_eff, EFFICIENCY_TOLERANCE) && within(r.fidelity, ref_fid, FIDELITY_TOLERANCE);
        let printed_inside =
            within(r.efficiency, ref_eff, EFFICIENCY_TOLERANCE) && within(r.fidelity_printed, ref_fid, FIDELITY_TOLERANCE);
        any_outside |= !inside;
        any_printed_inside |= printed_inside;
        let mut codes: Vec<&str> = r.convention_flags.iter().map(|f| f.code()).collect();
        if !inside {
            codes.push("outside-reference-tolerance");
        }
        let mut row: Vec<Cell> = vec![
            row_label(r).into(),
            Cell::Integer(r.output_sign.into()),
            r.efficiency.into(),
            r.fidelity.into(),
            r.f_opt.into(),
            r.f_mw.into(),
            r.lambda.re.into(),
            r.lambda.im.into(),
            r.xi.into(),
            r.post_selection_probability.into(),
            r.fidelity_printed.into(),
            r.f_mw_printed.into(),
            r.xi_printed.into(),
            ref_eff.into(),
            ref_fid.into(),
            if inside { "yes" } else { "no" }.into(),
            if printed_inside { "yes" } else { "no" }.into(),
            join_flags(codes).into(),
        ];
        if let Some((of, af, tail)) = o {
            row.extend([(*of).into(), (*af).into(), (of - af).abs().into(), (*tail).into()]);
        }
        table.push(row);
    }

    let all_codes = reports.iter().flat_map(|r| r.convention_flags.iter().map(|f| f.code()));
    table.comment(format!("convention_flags {}", join_flags(all_codes)));
    table.comment("note fidelity uses the normalized cat states and the traced noise-mode overlap e^{-2|alpha|^2 d}");
    table.comment("note fidelity_printed, f_mw_printed and xi_printed follow the printed closed form and may exceed 1");
    if any_outside {
        table.comment(
            "note one or more rows lie outside the reference tolerance (efficiency +-0.05, fidelity +-0.03); \
             compare fidelity_printed and see within_reference / printed_within_reference",
        );
        if !any_printed_inside {
            table.comment("note the printed-convention values are also outside the reference tolerance");
        }
    }
    if oracle_check {
        table.comment(format!(
            "note oracle columns use {} frequency bins and Fock truncation {}; oracle_discrepancy compares against the \
             analytic formula on the same bins",
            config.oracle_bins, config.oracle_truncation
        ));
    }
    Ok(table)
}

struct SweepPoint {
    values: Vec<f64>,
    mean: f64,
    min: f64,
    max: f64,
    efficiency: [f64; 2],
    linear_mean: Option<f64>,
    max_drift: Option<f64>,
    flags: Vec<&'static str>,
}

fn evaluate_point(config: &RunConfig, values: Vec<f64>) -> Result<SweepPoint, CliError> {
    let mut cfg = config.clone();
    for (axis, v) in config.sweep.iter().zip(&values) {
        cfg = cfg.with_value(&axis.key, *v)?;
    }
    let gate = Gate::build(cfg.gate)?;
    let rot = cardinal_rotations();
    let avg = gate.average(&rot, &rot)?;
    let mean_field = gate.config.engine == Engine::MeanField && gate.config.channel_model == ChannelModel::Physical;
    let linear_mean = if mean_field {
        Some(average_fidelity(&gate.linear, gate.config.alpha, &rot, &rot)?.mean)
    } else {
        None
    };
    Ok(SweepPoint {
        values,
        mean: avg.mean,
        min: avg.min,
        max: avg.max,
        efficiency: [gate.integrals.channels[0].efficiency, gate.integrals.channels[1].efficiency],
        linear_mean,
        max_drift: gate.mean_field.map(|m| m.max_drift),
        flags: gate.flags.iter().map(|f| f.code()).collect(),
    })
}

/// Sweep grid points in row-major order, the first axis slowest.
fn grid_points(config: &RunConfig) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::new()];
    for axis in &config.sweep {
        let vals = axis.values();
        points = points
            .into_iter()
            .flat_map(|p| {
                vals.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    points
}

pub fn sweep(config: &RunConfig) -> Result<Table, CliError> {
    let points = grid_points(config);
    let results: Vec<SweepPoint> =
        points.into_par_iter().map(|p| evaluate_point(config, p)).collect::<Result<_, CliError>>()?;

    let mean_field = config.gate.engine == Engine::MeanField && config.gate.channel_model == ChannelModel::Physical;
    let mut columns: Vec<&str> = config.sweep.iter().map(|a| a.key.as_str()).collect();
    columns.extend(["mean_fidelity", "min_fidelity", "max_fidelity", "efficiency_l", "efficiency_r"]);
    if mean_field {
        columns.extend(["linear_mean_fidelity", "engine_gap", "max_sigma_z_drift"]);
    }
    let mut table = Table::new(&columns);
    for r in &results {
        let mut row: Vec<Cell> = r.values.iter().map(|v| Cell::Number(*v)).collect();
        row.extend([r.mean.into(), r.min.into(), r.max.into(), r.efficiency[0].into(), r.efficiency[1].into()]);
        if let (Some(lin), Some(drift)) = (r.linear_mean, r.max_drift) {
            row.extend([lin.into(), (lin - r.mean).into(), drift.into()]);
        }
        table.push(row);
    }
    table.comment(format!("convention_flags {}", join_flags(results.iter().flat_map(|r| r.flags.iter().copied()))));
    table.comment("note mean_fidelity averages 36 product inputs built from the six cardinal Bloch states of each qubit");
    if mean_field {
        table.comment("note engine_gap = linear_mean_fidelity - mean_fidelity");
    }
    Ok(table)
}

fn push_mode_row(table: &mut Table, domain: &str, x: f64, values: [Complex64; 3]) {
    let mut row: Vec<Cell> = vec![domain.into(), x.into()];
    for v in values {
        row.extend([v.re.into(), v.im.into()]);
    }
    table.push(row);
}

pub fn modes(config: &RunConfig) -> Result<Table, CliError> {
    let gate = Gate::build(config.gate)?;
    let grid = gate.config.grid;
    let mut table = Table::new(&["domain", "x", "in_re", "in_im", "out_l_re", "out_l_im", "out_r_re", "out_r_im"]);

    let spectral_scale = (TWO_PI * 1e6).sqrt();
    let input = gate.mode.amplitudes();
    let chi: Vec<&[f64]> = gate.storage.iter().map(|s| s.chi.as_slice()).collect();
    let phi: Vec<&[f64]> = gate.storage.iter().map(|s| s.phi.as_slice()).collect();
    for (i, f) in input.iter().enumerate() {
        let out = |p: usize| *f * Complex64::from_polar(chi[p][i], phi[p][i]) * spectral_scale;
        push_mode_row(&mut table, "optical", to_mhz(grid.frequency(i)), [*f * spectral_scale, out(0), out(1)]);
    }

    let pulse = gate.config.pulse;
    let n = 400;
    let start = pulse.delay - 2.0 * pulse.duration;
    let end = pulse.delay + 6.0 * pulse.duration;
    let times: Vec<f64> = (0..=n).map(|i| start + (end - start) * i as f64 / n as f64).collect();
    let time_scale = 1e-3;
    let f_t = gate.mode.time_domain(&times);
    let out_l = apply_pointwise(&gate.mode, &gate.transfers[0].c1)?.time_domain(&times);
    let out_r = apply_pointwise(&gate.mode, &gate.transfers[1].c1)?.time_domain(&times);
    for (k, t) in times.iter().enumerate() {
        push_mode_row(&mut table, "microwave", t * 1e6, [f_t[k] * time_scale, out_l[k] * time_scale, out_r[k] * time_scale]);
    }

    table.comment(format!("convention_flags {}", join_flags(gate.flags.iter().map(|f| f.code()))));
    table.comment("note optical rows: x is the detuning in MHz, amplitudes in MHz^-1/2, outputs are the un-normalized retrieved modes");
    table.comment("note microwave rows: x is time in us, amplitudes in us^-1/2, outputs are the inverse transform of C1 f_in");
    table.comment(format!("note channel order: l = {}, r = {}", Polarization::L.label(), Polarization::R.label()));
    Ok(table)
}

pub fn validate_linearization(config: &RunConfig) -> Result<Table, CliError> {
    let g = &config.gate;
    let rows = config
        .linearization_alphas
        .par_iter()
        .map(|&a| linearization_row(&g.cqed, a, &g.pulse, &g.grid, g.mean_field_tol))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&[
        "alpha",
        "max_sigma_z_drift",
        "estimate",
        "estimate_exact",
        "drift_over_estimate",
        "relative_l2_b_out",
    ]);
    for r in &rows {
        table.push(vec![
            r.alpha.into(),
            r.max_drift.into(),
            r.estimate.into(),
            r.estimate_exact.into(),
            r.ratio.into(),
            r.relative_l2.into(),
        ]);
    }
    table.comment("convention_flags mean-field-occupied-channel");
    table.comment("note estimate = 2 kappa gamma_s alpha^2 / g_m^2; estimate_exact keeps the full steady-state denominator");
    table.comment("note relative_l2_b_out compares the mean-field and linear output fields of the occupied channel");
    Ok(table)
}
