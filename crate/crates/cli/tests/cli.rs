use std::io::Write;
use std::process::{Command, Output};

use selberg_core::identity_suite::{run_identity, Budget};
use selberg_core::{IdentityId, ParamSet, VerificationRecord};

fn selberg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selberg"))
        .args(args)
        .env_remove("SELBERG_SEED")
        .output()
        .expect("binary runs")
}

fn records(out: &Output) -> Vec<VerificationRecord> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn temp_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn all_pass_exits_zero() {
    let out = selberg(&[
        "verify",
        "--identity",
        "selb",
        "--k",
        "2",
        "--alpha",
        "1.0",
        "--beta",
        "1.0",
        "--gamma",
        "1.0",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = records(&out);
    assert_eq!(recs.len(), 1);
    assert!((recs[0].lhs - 1.0 / 12.0).abs() < 1e-12);
    assert!((recs[0].rhs - 1.0 / 12.0).abs() < 1e-14);
}

#[test]
fn headline_series_run_exits_zero() {
    let out = selberg(&[
        "verify",
        "--identity",
        "dexp3",
        "--k1",
        "2",
        "--k2",
        "1",
        "--alpha",
        "1.3",
        "--gamma",
        "-0.15",
        "--z1",
        "0.3",
        "--z2",
        "0.3",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(records(&out)[0].rel_dev <= 1e-8);
}

#[test]
fn one_failure_exits_one() {
    let out = selberg(&[
        "verify",
        "--identity",
        "selb",
        "--identity",
        "dexp",
        "--k",
        "2",
        "--tol",
        "1e-30",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let recs = records(&out);
    assert_eq!(recs.len(), 2);
    assert!(recs.iter().any(|r| !r.passed));
}

#[test]
fn bad_config_exits_two() {
    assert_eq!(
        selberg(&["verify", "--identity", "selb", "--gamma", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(selberg(&["verify", "--identity", "nope"]).status.code(), Some(2));
    assert_eq!(selberg(&["verify"]).status.code(), Some(2));
    assert_eq!(
        selberg(&["verify", "--identity", "selb", "--budget", "speed=9"])
            .status
            .code(),
        Some(2)
    );
    let cfg = temp_file("colour = blue\n");
    let path = cfg.path().to_str().unwrap();
    assert_eq!(
        selberg(&["verify", "--identity", "selb", "--config", path])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn json_report_round_trips() {
    let out = selberg(&[
        "verify",
        "--identity",
        "selb",
        "--identity",
        "j0k",
        "--k1",
        "2",
        "--k2",
        "1",
        "--seed",
        "11",
        "--format",
        "json",
    ]);
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    for (line, rec) in text.lines().zip(records(&out)) {
        assert_eq!(serde_json::to_string(&rec).unwrap(), line);
        let p = rec.params;
        let direct = run_identity(rec.identity_id, &p, &Budget::default(), 11).unwrap();
        assert_eq!(
            VerificationRecord {
                runtime_ms: 0,
                ..direct
            },
            VerificationRecord { runtime_ms: 0, ..rec }
        );
    }
}

#[test]
fn config_file_with_flag_override() {
    let cfg = temp_file("identity = selb\nk = 2\nalpha = 1.0\nbeta = 1.0\ngamma = 0.5\nformat = json\n");
    let path = cfg.path().to_str().unwrap();
    let out = selberg(&["verify", "--config", path, "--gamma", "1.0"]);
    assert_eq!(out.status.code(), Some(0));
    let rec = &records(&out)[0];
    assert_eq!(rec.params.gamma, 1.0);
    assert_eq!(rec.params.alpha, 1.0);
    assert!((rec.rhs - 1.0 / 12.0).abs() < 1e-14);
}

#[test]
fn seed_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_selberg"))
        .args(["verify", "--identity", "stirling_ratio", "--format", "json"])
        .env("SELBERG_SEED", "77")
        .output()
        .unwrap();
    assert_eq!(records(&out)[0].seed, 77);
}

#[test]
fn cartesian_grid() {
    let grid = temp_file("alpha = 1.0, 1.5, 2.0\ngamma = -0.1, -0.2, 0.3\n");
    let path = grid.path().to_str().unwrap();
    let out = selberg(&[
        "verify",
        "--identity",
        "selb",
        "--k",
        "2",
        "--grid",
        path,
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    assert_eq!(recs.len(), 9);
    assert!(recs.iter().all(|r| r.passed));
}

#[test]
fn random_grid_and_csv() {
    let grid = temp_file("draws = 20\nalpha = 0.8 .. 2.0\nbeta1 = 0.6 .. 1.5\ngamma = -0.3 .. -0.02\n");
    let path = grid.path().to_str().unwrap();
    let out = selberg(&[
        "verify",
        "--identity",
        "jjj_relations",
        "--k1",
        "2",
        "--k2",
        "1",
        "--grid",
        path,
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(&headers[0], "identity_id");
    assert_eq!(rdr.records().count(), 20);
}

#[test]
fn out_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.ndjson");
    let out = selberg(&[
        "verify",
        "--identity",
        "stirling_ratio",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let rec: VerificationRecord = serde_json::from_str(text.trim()).unwrap();
    assert_eq!(rec.identity_id, IdentityId::StirlingRatio);
    assert_eq!(rec.params, ParamSet::default());
}

#[test]
fn list_names_every_identity() {
    let out = selberg(&["list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for id in IdentityId::ALL {
        assert!(text.lines().any(|l| l.starts_with(id.as_str())), "{id} missing");
    }
}
