use std::path::Path;
use std::process::{Command, Output};

use hybridgate_sim::commands::{self, Command as SimCommand};
use hybridgate_sim::csv::Cell;
use hybridgate_sim::RunConfig;

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sim")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn number(c: &Cell) -> f64 {
    match c {
        Cell::Number(x) => *x,
        other => panic!("not a number: {other:?}"),
    }
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write_config(dir.path(), "empty.cfg", "");
    let typo = write_config(dir.path(), "typo.cfg", "cqed.gamma_s_over_2pi_khs = 4.78\n");
    let degenerate = write_config(dir.path(), "zero.cfg", "cat.alpha = 0\n");

    let ok = sim(&["truth-table", "--config", &empty]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8(ok.stdout).unwrap().starts_with("# sim truth-table\n"));

    let bad = sim(&["truth-table", "--config", &typo]);
    assert_eq!(bad.status.code(), Some(2));
    let err = String::from_utf8(bad.stderr).unwrap();
    assert!(err.contains("line 1") && err.contains("cqed.gamma_s_over_2pi_khz"), "{err}");

    let missing = dir.path().join("missing.cfg");
    assert_eq!(sim(&["modes", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(sim(&["sweep", "--config", &empty, "--jobs", "0"]).status.code(), Some(2));
    assert_eq!(sim(&["truth-table", "--config", &degenerate]).status.code(), Some(3));
}

#[test]
fn out_flag_writes_the_same_csv_as_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", "linearization.alphas = 0, 1\n");
    let out = dir.path().join("lin.csv");
    let written = sim(&["validate-linearization", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(written.status.code(), Some(0));
    assert!(written.stdout.is_empty());
    let printed = sim(&["validate-linearization", "--config", &cfg]);
    assert_eq!(std::fs::read(&out).unwrap(), printed.stdout);
}

#[test]
fn sweep_output_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.cfg",
        "sweep.axis1 = cqed.kappa_s_over_kappa log 1e-4 1e-2 3\nsweep.axis2 = cat.alpha lin 1 2 3\n",
    );
    let one = sim(&["sweep", "--config", &cfg, "--jobs", "1"]);
    let eight = sim(&["sweep", "--config", &cfg, "--jobs", "8"]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, eight.stdout);
}

#[test]
fn header_embeds_resolved_config_and_flags() {
    let cfg = RunConfig::parse("cqed.kappa_s_over_kappa = 0.01").unwrap();
    let csv = hybridgate_sim::run(SimCommand::Modes, &cfg, Some(2)).unwrap();
    assert!(csv.contains("# config cqed.kappa_s_over_kappa = 0.01\n"));
    assert!(csv.contains("# config cqed.g_m_over_2pi_mhz = 2.723\n"));
    assert!(csv.lines().any(|l| l.starts_with("# convention_flags")));
    let first_data = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(first_data, "domain,x,in_re,in_im,out_l_re,out_l_im,out_r_re,out_r_im");
}

#[test]
fn truth_table_reports_flags_and_oracle_columns() {
    let cfg = RunConfig::default();
    let t = commands::truth_table(&cfg, true).unwrap();
    assert_eq!(t.rows.len(), 4);
    let flags = t.column("convention_flags").unwrap();
    let disc = t.column("oracle_discrepancy").unwrap();
    for row in &t.rows {
        let Cell::Text(f) = &row[flags] else { panic!() };
        assert!(f.contains("cat-normalization-corrected"));
        assert!(number(&row[disc]) < 1e-6);
    }
    let fid = t.column("fidelity").unwrap();
    let oracle = t.column("oracle_fidelity").unwrap();
    for row in &t.rows {
        assert!((number(&row[fid]) - number(&row[oracle])).abs() < 1e-5);
    }
}

#[test]
fn single_point_sweep_equals_direct_evaluation() {
    let swept = RunConfig::parse("sweep.axis1 = cqed.kappa_s_over_kappa log 1e-4 1e-2 3").unwrap();
    let t = commands::sweep(&swept).unwrap();
    let point = RunConfig::parse("cqed.kappa_s_over_kappa = 0.01").unwrap();
    let p = commands::sweep(&point).unwrap();
    assert_eq!(p.rows.len(), 1);
    let mean = t.column("mean_fidelity").unwrap();
    assert_eq!(number(&t.rows[2][0]), 0.01);
    assert_eq!(p.columns[0], "mean_fidelity");
    assert!((number(&t.rows[2][mean]) - number(&p.rows[0][0])).abs() < 1e-14);
}

#[test]
fn kappa_s_sweep_is_monotone() {
    let cfg = RunConfig::parse("sweep.axis1 = cqed.kappa_s_over_kappa log 1e-4 1e-2 3").unwrap();
    let t = commands::sweep(&cfg).unwrap();
    let mean = t.column("mean_fidelity").unwrap();
    let v: Vec<f64> = t.rows.iter().map(|r| number(&r[mean])).collect();
    assert!(v[0] > v[1] && v[1] > v[2], "{v:?}");
}

#[test]
fn modes_of_ideal_channels_copy_the_input() {
    let cfg = RunConfig::parse("run.channel_model = ideal").unwrap();
    let t = commands::modes(&cfg).unwrap();
    let (i, o, r) = (t.column("in_re").unwrap(), t.column("out_l_re").unwrap(), t.column("out_r_re").unwrap());
    for row in &t.rows {
        assert_eq!(number(&row[i]), number(&row[o]));
        let sign = if row[0] == Cell::Text("microwave".into()) { -1.0 } else { 1.0 };
        assert_eq!(number(&row[i]), sign * number(&row[r]));
    }
}

#[test]
fn left_channel_is_more_attenuated_in_modes() {
    let t = commands::modes(&RunConfig::default()).unwrap();
    let col = |n: &str| t.column(n).unwrap();
    let energy = |re: usize, im: usize| -> f64 {
        t.rows
            .iter()
            .filter(|r| r[0] == Cell::Text("optical".into()))
            .map(|r| number(&r[re]).powi(2) + number(&r[im]).powi(2))
            .sum()
    };
    assert!(energy(col("out_l_re"), col("out_l_im")) < 0.6 * energy(col("out_r_re"), col("out_r_im")));
}

#[test]
fn linearization_estimate_quadruples_with_doubled_alpha() {
    let cfg = RunConfig::parse("linearization.alphas = 1, 2").unwrap();
    let t = commands::validate_linearization(&cfg).unwrap();
    let est = t.column("estimate").unwrap();
    let ratio = number(&t.rows[1][est]) / number(&t.rows[0][est]);
    assert!((ratio - 4.0).abs() < 1e-12);
}

#[test]
fn drift_tracks_estimate_within_factor_three_across_alphas() {
    let t = commands::validate_linearization(&RunConfig::default()).unwrap();
    let r = t.column("drift_over_estimate").unwrap();
    let ratios: Vec<f64> = t.rows.iter().map(|row| number(&row[r])).collect();
    let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
    assert!(max / min < 3.0, "{ratios:?}");
}
