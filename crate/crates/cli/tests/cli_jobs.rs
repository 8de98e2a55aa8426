use std::path::{Path, PathBuf};
use std::process::Command;

use framelab_cli::{parse_config, run, CliError, Format, Job, Overrides, Report};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

fn with_edit(name: &str, edit: impl FnOnce(&mut Value)) -> String {
    let mut v: Value = serde_json::from_str(&fixture_text(name)).unwrap();
    edit(&mut v);
    v.to_string()
}

fn framelab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_framelab")).args(args).output().unwrap()
}

fn run_fixture(job: Job, name: &str, format: Option<Format>) -> framelab_cli::Outcome {
    let overrides = Overrides { format, ..Overrides::default() };
    run(job, fixture(name).to_str().unwrap(), &overrides).unwrap()
}

#[test]
fn bounds_fixture_is_valid() {
    let cfg = parse_config(&fixture_text("two_piece_bounds.json")).unwrap();
    assert_eq!(cfg.job, Some(Job::GaborBounds));
    assert_eq!(cfg.system.n_generators(), 1);
    assert_eq!(cfg.grid.len(), 8192);
}

#[test]
fn dense_lattice_is_rejected_with_a_pointer() {
    let text = with_edit("two_piece_bounds.json", |v| v["system"]["generators"][0]["p0"] = 7.0.into());
    match parse_config(&text) {
        Err(CliError::Validation { pointer, message }) => {
            assert_eq!(pointer, "/system/generators/0");
            assert!(message.contains("< 2π"), "{message}");
        }
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn empty_generator_list_is_rejected() {
    let text = with_edit("two_piece_bounds.json", |v| v["system"]["generators"] = Value::Array(vec![]));
    assert!(matches!(
        parse_config(&text),
        Err(CliError::Validation { pointer, .. }) if pointer == "/system/generators"
    ));
}

#[test]
fn type_errors_point_at_the_field() {
    let text = with_edit("two_piece_bounds.json", |v| v["options"]["seed"] = "seven".into());
    assert!(matches!(
        parse_config(&text),
        Err(CliError::Validation { pointer, .. }) if pointer == "/options/seed"
    ));
    let text = with_edit("two_piece_bounds.json", |v| v["system"]["generators"][0]["window"] = "nope".into());
    assert!(matches!(
        parse_config(&text),
        Err(CliError::Validation { pointer, .. }) if pointer == "/system/generators/0/window"
    ));
    assert!(matches!(parse_config("{"), Err(CliError::Parse(_))));
}

#[test]
fn unknown_fields_are_rejected() {
    let text = with_edit("two_piece_bounds.json", |v| v["options"]["bogus"] = 1.into());
    assert!(matches!(parse_config(&text), Err(CliError::Validation { .. })));
}

#[test]
fn gabor_bounds_reports_the_exact_pair() {
    let out = run_fixture(Job::GaborBounds, "two_piece_bounds.json", None);
    let v: Value = serde_json::from_str(&out.rendered).unwrap();
    let exact = &v["exact"];
    assert!((exact["lower"].as_f64().unwrap() - 4.0).abs() < 1e-9);
    assert!((exact["upper"].as_f64().unwrap() - 16.0).abs() < 1e-9);
    assert_eq!(out.exit_code(), 0);
}

#[test]
fn verify_reports_the_probe_witness() {
    let out = run_fixture(Job::GaborVerify, "two_window_verify.json", None);
    let Report::GaborVerify(r) = &out.report else { panic!("wrong report kind") };
    let v = serde_json::to_value(r).unwrap();
    assert_eq!(v["verdict"], "violated");
    assert!((v["x"].as_f64().unwrap() - 3.5f64.sqrt()).abs() < 1e-12);
    assert!((v["value"].as_f64().unwrap() - 7.0).abs() < 1e-9);
    assert_eq!(out.exit_code(), 2);
}

#[test]
fn sweep_csv_has_one_row_per_epsilon() {
    let out = run_fixture(Job::ContractSweep, "contract_sweep.json", Some(Format::Csv));
    let mut lines = out.rendered.lines();
    assert_eq!(lines.next().unwrap(), "epsilon,lower_bound,upper_bound,oracle_min,oracle_max");
    let uppers: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(uppers.len(), 4);
    assert!(uppers.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn signal_export_is_sampled_csv() {
    let out = run_fixture(Job::Signals, "hardy_signal.json", None);
    let mut lines = out.rendered.lines();
    assert_eq!(lines.next().unwrap(), "x,re,im");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 3);
    assert!(first[0].parse::<f64>().unwrap() < 0.0);
    assert!(first[1].contains('e'));
}

#[test]
fn exit_codes_follow_the_verdict() {
    let cases = [
        ("gabor-bounds", "two_piece_bounds.json", 0),
        ("gabor-verify", "two_window_verify.json", 2),
        ("perturb", "perturb_scale.json", 0),
        ("signals", "hardy_signal.json", 0),
    ];
    for (job, name, code) in cases {
        let out = framelab(&[job, "--config", fixture(name).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(code), "{job}");
        assert!(!out.stdout.is_empty());
    }
}

#[test]
fn runtime_errors_exit_with_one() {
    let out = framelab(&["gabor-bounds", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, with_edit("two_piece_bounds.json", |v| v["system"]["generators"][0]["p0"] = 7.0.into()))
        .unwrap();
    let out = framelab(&["gabor-bounds", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/system/generators/0"));

    let out = framelab(&["no-such-job", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn mismatched_job_is_an_error() {
    let out = framelab(&["perturb", "--config", fixture("two_piece_bounds.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn out_flag_writes_the_report_and_seed_changes_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("two_piece_bounds.json");
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let out = framelab(&["gabor-bounds", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let args = ["gabor-bounds", "--config", cfg.to_str().unwrap(), "--seed", "99", "--out", b.to_str().unwrap()];
    framelab(&args);
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert!(!a.is_empty() && a != b);
}
