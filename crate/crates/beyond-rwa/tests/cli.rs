//! Binary-level contract tests: exit codes, output format, reproducibility.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_beyond-rwa"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("brwa-cli-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

const SCALED: [&str; 12] = [
    "--omega-c", "10", "--omega-a", "10", "--g-c", "1", "--kappa", "1", "--gamma", "1",
    "--n-atoms", "1",
];

#[test]
fn steady_reports_both_rates_and_exits_zero() {
    let out = run(&["steady"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# beyond-rwa"));
    assert!(text.contains("i_kappa_exact"));
    assert!(text.contains("i_kappa_formula"));
}

#[test]
fn steady_with_rwa_emits_exactly_zero() {
    let mut args = vec!["steady", "--rwa"];
    args.extend_from_slice(&SCALED);
    let out = run(&args);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.starts_with("i_kappa_exact")).unwrap();
    let value: f64 =
        line.split('=').nth(1).unwrap().trim().split(' ').next().unwrap().parse().unwrap();
    assert_eq!(value, 0.0);
}

#[test]
fn malformed_flag_value_is_usage_error() {
    let out = run(&["steady", "--kappa", "abc"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_parameter_is_usage_error_naming_field() {
    let out = run(&["steady", "--kappa=-1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("kappa"), "stderr: {err}");
}

#[test]
fn solver_failure_exits_one() {
    // kappa = gamma = g_c = 0 leaves the generator singular: a computation
    // failure, not a usage error
    let out = run(&[
        "steady", "--omega-c", "10", "--omega-a", "10", "--g-c", "0", "--kappa", "0",
        "--gamma", "0", "--n-atoms", "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("computation failed"), "stderr: {err}");
}

#[test]
fn evolve_csv_has_exact_columns_and_zero_rows_for_zero_coupling() {
    let mut args = vec!["evolve", "--t-end", "2", "--samples", "8", "--g-c", "0"];
    args.extend_from_slice(&["--omega-c", "10", "--omega-a", "10", "--kappa", "1"]);
    args.extend_from_slice(&["--gamma", "1", "--n-atoms", "1"]);
    let out = run(&args);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines().skip_while(|l| l.starts_with('#'));
    assert_eq!(
        lines.next().unwrap(),
        "t,mu1,mu2,eta1,eta2,eta3,eta4,xi1,xi2,xi3,xi4"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9);
    for row in rows {
        let fields: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(fields.len(), 11);
        assert!(fields[1..].iter().all(|&v| v == 0.0), "row {row}");
    }
}

#[test]
fn evolve_zero_samples_is_usage_error() {
    let mut args = vec!["evolve", "--t-end", "1", "--samples", "0"];
    args.extend_from_slice(&SCALED);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn evolve_without_t_end_is_usage_error() {
    let mut args = vec!["evolve"];
    args.extend_from_slice(&SCALED);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("t_end"));
}

#[test]
fn identical_configs_produce_byte_identical_output() {
    let dir = tmpdir("determinism");
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    for path in [&a, &b] {
        let mut args = vec!["evolve", "--t-end", "5", "--samples", "50"];
        args.extend_from_slice(&SCALED);
        let path_str = path.to_str().unwrap();
        args.extend_from_slice(&["--out", path_str]);
        let out = run(&args);
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn output_header_echoes_run_configuration() {
    let dir = tmpdir("header");
    let path = dir.join("traj.csv");
    let mut args = vec!["evolve", "--t-end", "1", "--samples", "4"];
    args.extend_from_slice(&SCALED);
    args.extend_from_slice(&["--out", path.to_str().unwrap()]);
    assert!(run(&args).status.success());
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# beyond-rwa"));
    for key in ["omega_c", "g_c", "kappa", "n_atoms", "t_end", "samples", "params_fingerprint"] {
        assert!(text.lines().any(|l| l.starts_with(&format!("# {key} = "))), "missing {key}");
    }
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn sweep_over_atom_number_increases_emission() {
    let out = run(&["sweep", "--param", "n-atoms", "--from", "1", "--to", "1e4", "--steps",
        "7", "--log"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip_while(|l| l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 7);
    for pair in rows.windows(2) {
        assert!(pair[1][0] > pair[0][0], "values out of order");
        assert!(pair[1][1] > pair[0][1], "exact rate not increasing in N");
        assert!(pair[1][2] > pair[0][2], "closed-form rate not increasing in N");
    }
}

#[test]
fn sweep_unknown_parameter_and_empty_grid_are_usage_errors() {
    let out = run(&["sweep", "--param", "zeta", "--from", "1", "--to", "2", "--steps", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("zeta"));

    let out =
        run(&["sweep", "--param", "g-c", "--from", "1", "--to", "2", "--steps", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_evolve_matches_evolve_at_benchmark_point() {
    let dir = tmpdir("oracle");
    let m = dir.join("moments.csv");
    let o = dir.join("oracle.csv");
    let mut args = vec!["evolve", "--t-end", "4", "--samples", "16"];
    args.extend_from_slice(&SCALED);
    args.extend_from_slice(&["--out", m.to_str().unwrap()]);
    assert!(run(&args).status.success());
    let mut args = vec!["oracle-evolve", "--t-end", "4", "--samples", "16"];
    args.extend_from_slice(&SCALED);
    args.extend_from_slice(&["--out", o.to_str().unwrap()]);
    assert!(run(&args).status.success());

    let parse = |p: &PathBuf| -> Vec<Vec<f64>> {
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .skip_while(|l| l.starts_with('#'))
            .skip(1)
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect()
    };
    let mrows = parse(&m);
    let orows = parse(&o);
    assert_eq!(mrows.len(), orows.len());
    for (mr, or) in mrows.iter().zip(&orows) {
        for (a, b) in mr.iter().zip(or) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn mcwf_requires_seed() {
    let mut args = vec!["mcwf", "--t-end", "5", "--n-traj", "4"];
    args.extend_from_slice(&SCALED);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("seed"));
}

#[test]
fn mcwf_runs_reproducibly_with_seed() {
    let dir = tmpdir("mcwf");
    let run_once = |tag: &str| -> (Vec<u8>, Vec<u8>) {
        let moments = dir.join(format!("m-{tag}.csv"));
        let clicks = dir.join(format!("c-{tag}.csv"));
        let mut args = vec![
            "mcwf", "--t-end", "10", "--sample-dt", "0.5", "--n-traj", "32", "--seed", "9",
            "--dim-c", "5", "--dim-a", "5", "--window-start", "2",
        ];
        args.extend_from_slice(&SCALED);
        let m = moments.to_str().unwrap().to_string();
        let c = clicks.to_str().unwrap().to_string();
        args.extend_from_slice(&["--out", &m, "--clicks-out", &c]);
        let out = bin().args(&args).output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (fs::read(&moments).unwrap(), fs::read(&clicks).unwrap())
    };
    let (m1, c1) = run_once("one");
    let (m2, c2) = run_once("two");
    assert_eq!(m1, m2);
    assert_eq!(c1, c2);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn oracle_ground_reports_entanglement() {
    let mut args = vec!["oracle-ground"];
    args.extend_from_slice(&SCALED);
    let out = run(&args);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("entanglement_entropy"));
    let entropy: f64 = text
        .lines()
        .find(|l| l.starts_with("entanglement_entropy"))
        .unwrap()
        .split('=')
        .nth(1)
        .unwrap()
        .trim()
        .split(' ')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(entropy > 0.0);
}

#[test]
fn validate_subset_runs_and_respects_exit_codes() {
    let out = run(&["validate", "--criteria", "a2,a4,a6"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    for line in text.lines() {
        assert!(line.contains("PASS"), "{line}");
    }

    // stochastic criteria without a seed: usage error
    let out = run(&["validate", "--criteria", "a1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["validate"]);
    assert_eq!(out.status.code(), Some(2));

    // unknown criterion
    let out = run(&["validate", "--criteria", "a9", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_drives_a_run_and_flags_override_it() {
    let dir = tmpdir("config");
    let conf = dir.join("run.conf");
    fs::write(
        &conf,
        "# benchmark point\nomega_c = 10\nomega_a = 10\ng_c = 1\nkappa = 1\ngamma = 1\nn_atoms = 1\nt_end = 2\nsamples = 4\n",
    )
    .unwrap();
    let out = run(&["evolve", "--config", conf.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "# t_end = 2.0000000000000000e0"));

    // flag overrides the file
    let out = run(&["evolve", "--config", conf.to_str().unwrap(), "--t-end", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "# t_end = 3.0000000000000000e0"));

    // unknown keys are rejected
    fs::write(&conf, "omega_c = 10\nbogus = 1\n").unwrap();
    let out = run(&["steady", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bogus"));
    fs::remove_dir_all(&dir).ok();
}
