use std::fs;
use std::path::Path;
use std::process::Command;

use unihalt_cli::{
    compute, run_experiment, validate_suite, Cell, CliError, ConfigError, ExperimentConfig, Fault, Level,
    OUTPUT_DIR_ENV,
};

fn config(items: &[(&str, &str)], out: &Path) -> ExperimentConfig {
    let pairs: Vec<_> = items.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    let mut c = ExperimentConfig::from_pairs(&pairs).unwrap();
    c.output = out.to_path_buf();
    c
}

fn floats(cells: Vec<&Cell>) -> Vec<f64> {
    cells
        .into_iter()
        .map(|c| match c {
            Cell::Float(x) => *x,
            other => panic!("not a float: {other:?}"),
        })
        .collect()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_unihalt"))
}

#[test]
fn protocol_ideal_lock_halts_every_input() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_experiment(&config(&[("experiment", "protocol"), ("p", "7")], dir.path())).unwrap();
    let t = &summary.tables[0];
    assert_eq!(t.rows.len(), 3);
    assert!(floats(t.column("probability").unwrap()).iter().all(|p| (p - 1.0).abs() < 1e-12));
    for level in t.column("final_level").unwrap() {
        assert_eq!(level, &Cell::from("C2"));
    }
    let text = fs::read_to_string(dir.path().join("protocol.csv")).unwrap();
    assert!(text.starts_with("x0,trigger_cycle,final_level,final_branch,final_functional,probability\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn fidelity_sweep_rises_as_ratio_falls() {
    let dir = tempfile::tempdir().unwrap();
    let (tables, _) =
        compute(&config(&[("experiment", "fidelity"), ("ratios", "0.1,0.05,0.01")], dir.path())).unwrap();
    let p = floats(tables[0].column("probability_analytic").unwrap());
    assert_eq!(p.len(), 3);
    assert!(p[0] < p[1] && p[1] < p[2] && p[2] <= 1.0, "{p:?}");
    assert_eq!(floats(tables[0].column("ratio").unwrap()), vec![0.1, 0.05, 0.01]);
}

#[test]
fn empty_sweep_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&config(&[("experiment", "fidelity"), ("ratios", "")], dir.path())).unwrap();
    let text = fs::read_to_string(dir.path().join("fidelity.csv")).unwrap();
    assert_eq!(text, "j,ratio,regime,probability_analytic,probability_series\n");
}

#[test]
fn same_seed_gives_identical_bytes_across_thread_counts() {
    let read = |threads: &str| {
        let dir = tempfile::tempdir().unwrap();
        let items = [("experiment", "squeeze"), ("samples", "12"), ("seed", "42"), ("threads", threads)];
        run_experiment(&config(&items, dir.path())).unwrap();
        fs::read(dir.path().join("squeeze.csv")).unwrap()
    };
    let one = read("1");
    assert_eq!(one, read("1"));
    assert_eq!(one, read("4"));
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&config(&[("experiment", "squeeze"), ("samples", "12"), ("seed", "43")], dir.path())).unwrap();
    assert_ne!(one, fs::read(dir.path().join("squeeze.csv")).unwrap());
}

#[test]
fn squeeze_rows_agree_with_numeric_check() {
    let dir = tempfile::tempdir().unwrap();
    let (tables, _) =
        compute(&config(&[("experiment", "squeeze"), ("samples", "5"), ("seed", "7")], dir.path())).unwrap();
    let errs = floats(tables[0].column("amp_numeric_abs_err").unwrap());
    assert_eq!(errs.len(), 5);
    assert!(errs.iter().all(|e| *e < 1e-10), "{errs:?}");
}

#[test]
fn config_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(&[("experiment", "protocol"), ("p", "8")], dir.path());
    match compute(&c).unwrap_err() {
        CliError::Config(ConfigError::Invalid { key, .. }) => assert_eq!(key, "p"),
        other => panic!("{other}"),
    }
    let c = config(&[("experiment", "fidelity"), ("ratios", "0.1,abc")], dir.path());
    match compute(&c).unwrap_err() {
        CliError::Config(ConfigError::Invalid { key, .. }) => assert_eq!(key, "ratios"),
        other => panic!("{other}"),
    }
    let c = config(&[("experiment", "fidelity"), ("ratios", "0.1"), ("m_r", "0")], dir.path());
    let e = compute(&c).unwrap_err();
    assert_eq!(e.exit_code(), 2);
    assert!(e.to_string().contains("m_r"), "{e}");
}

#[test]
fn fast_validation_passes() {
    let report = validate_suite(Level::Fast, &[]);
    let failed: Vec<_> = report.failed().map(ToString::to_string).collect();
    assert!(failed.is_empty(), "{failed:#?}");
    assert!(report.checks.len() >= 17);
}

#[test]
fn corrupted_gate_is_reported() {
    let report = validate_suite(Level::Fast, &[Fault::CorruptGate]);
    let failed: Vec<_> = report.failed().collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0].module, "protocol_engine");
    assert!(failed[0].invariant.contains("unitary"));
}

#[test]
fn binary_honours_output_env_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# ideal lock\nexperiment = protocol\np = 7\noutput = ignored\n").unwrap();
    let out = dir.path().join("env_out");
    let status = bin()
        .arg("run")
        .arg(&cfg)
        .args(["--set", "p=11"])
        .env(OUTPUT_DIR_ENV, &out)
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let text = fs::read_to_string(out.join("protocol.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 5);
    assert!(!dir.path().join("ignored").exists());
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str], body: Option<&str>| {
        let cfg = dir.path().join("c.cfg");
        if let Some(b) = body {
            fs::write(&cfg, b).unwrap();
        }
        let mut cmd = bin();
        cmd.current_dir(dir.path()).env_remove(OUTPUT_DIR_ENV);
        for a in args {
            cmd.arg(if *a == "CFG" { cfg.to_str().unwrap() } else { a });
        }
        let out = cmd.output().unwrap();
        (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
    };
    assert_eq!(code(&["run", "/nonexistent/x.cfg"], None).0, 1);
    let (c, err) = code(&["run", "CFG"], Some("experiment = scatter\nE = 1\n"));
    assert_eq!(c, 2);
    assert!(err.contains("V0"), "{err}");
    assert_eq!(code(&["run", "CFG"], Some("experiment = scatter\nE = 5\nV0 = 10\na = 1\nn = 8\n")).0, 3);
    assert_eq!(code(&["validate", "--inject-fault", "corrupt-gate"], None).0, 4);
    assert_eq!(code(&["run", "CFG"], Some("experiment = kinematics\n")).0, 0);
    assert!(dir.path().join("out/kinematics.csv").exists());
}

#[test]
fn schema_lists_headers() {
    let out = bin().args(["schema", "full_cycle"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("full_cycle.csv: cycle,trigger_time"));
    assert!(text.contains("trajectory.csv: cycle,t,mean_x,mean_p,p_left,p_right"));
    assert_eq!(bin().args(["schema", "nope"]).output().unwrap().status.code(), Some(2));
}
