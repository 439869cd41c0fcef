use proptest::prelude::*;
use serde_json::Value;
use sievecert::exponents;
use sievecert_cli::config::{Config, ConfigError};
use sievecert_cli::report::{ClaimRecord, Report, PASSING};
use sievecert_cli::suites;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sievecert(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sievecert"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn report_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn without_timestamp(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"timestamp\""))
        .map(str::to_string)
        .collect()
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 8] = [
        &["bogus"],
        &["verify-omega", "--no-such-flag"],
        &["verify-omega", "--seeds", "1,x"],
        &["verify-omega", "--eps1", "1e-3"],
        &["verify-omega", "--quad-tol", "0.5"],
        &["verify-exponents", "--claim", "no-such-claim"],
        &["verify-decomposition", "--case", "0.1-0.2"],
        &["verify-combinatorics", "--case", "Z.z"],
    ];
    for args in cases {
        let out = sievecert(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
    assert!(!dir.path().join("report.json").exists());
    assert_eq!(sievecert(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(sievecert(&[], dir.path()).status.code(), Some(2));
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), "quad_tol = 1e-4\nbogus = 1\n").unwrap();
    let out = sievecert(&["verify-omega", "--config", "run.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    fs::write(dir.path().join("bad.cfg"), "quad_tol 1e-4\n").unwrap();
    let out = sievecert(&["verify-omega", "--config", "bad.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_parsing_and_precedence() {
    let mut cfg = Config::default();
    cfg.apply_text("# comment\n\nquad_tol = 1e-3\nseeds = 5, 6\nfalsify_count=10 # trailing\n", "text")
        .unwrap();
    assert_eq!(cfg.quad_tol, 1e-3);
    assert_eq!(cfg.seeds, vec![5, 6]);
    assert_eq!(cfg.falsify_count, 10);
    assert!(cfg.validate().is_ok());
    assert!(matches!(cfg.set("omega_step", "abc"), Err(ConfigError::BadValue { .. })));
    cfg.epsilon1 = 2e-5;
    assert!(matches!(cfg.validate(), Err(ConfigError::OutOfRange { key: "epsilon1", .. })));

    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), "quad_tol = 1e-3\neps1 = 1e-7\n").unwrap();
    let out = sievecert(
        &["verify-omega", "--config", "run.cfg", "--quad-tol", "2e-4", "--report", "r.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let r = report_json(&dir.path().join("r.json"));
    assert_eq!(r["config"]["quad_tol"], 2e-4);
    assert_eq!(r["config"]["epsilon1"], 1e-7);
}

#[test]
fn omega_suite_passes_and_report_has_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = sievecert(&["verify-omega"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report_json(&dir.path().join("report.json"));
    let keys: Vec<&str> = r.as_object().unwrap().keys().map(String::as_str).collect();
    for k in ["version", "config", "claims", "summary", "timestamp"] {
        assert!(keys.contains(&k), "{k}");
    }
    let claims = r["claims"].as_array().unwrap();
    assert_eq!(claims.len(), 5);
    for c in claims {
        let mut fields: Vec<&str> = c.as_object().unwrap().keys().map(String::as_str).collect();
        fields.sort_unstable();
        let mut expected = ["id", "paper_anchor", "kind", "value", "err", "bound", "relation", "status", "margin"];
        expected.sort_unstable();
        assert_eq!(fields, expected);
        assert_eq!(c["status"], "PASS");
    }
    assert_eq!(r["summary"]["PASS"], 5);
    assert_eq!(r["summary"]["total"], 5);
}

#[test]
fn exponent_claim_is_certified() {
    let dir = tempfile::tempdir().unwrap();
    let out = sievecert(&["verify-exponents", "--claim", "smoothfull-0.335"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = report_json(&dir.path().join("report.json"));
    let c = &r["claims"][0];
    assert_eq!(c["id"], "smoothfull-0.335");
    assert_eq!(c["status"], "CERTIFIED");
    assert!(c["margin"].as_f64().unwrap() >= 1e-4);
}

#[test]
fn passing_decomposition_case_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = sievecert(
        &["verify-decomposition", "--case", "0.545-0.57", "--emit-csv", "csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let r = report_json(&dir.path().join("report.json"));
    let claims = r["claims"].as_array().unwrap();
    // Seven terms, total, budget and checksum.
    assert_eq!(claims.len(), 10);
    assert!(claims.iter().all(|c| c["status"] == "PASS"));
    let thetas = fs::read_to_string(dir.path().join("csv/thetas.csv")).unwrap();
    assert_eq!(thetas.lines().count(), 8);
    assert!(thetas.starts_with("case,theta,value,err,claimed_bound,pass"));
    let omega = fs::read_to_string(dir.path().join("csv/omega.csv")).unwrap();
    assert!(omega.starts_with("u,omega\n1.0,1.0\n"));
}

#[test]
fn known_red_case_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = sievecert(&["verify-decomposition", "--case", "0.53-0.545"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let r = report_json(&dir.path().join("report.json"));
    let failing: Vec<&str> = r["claims"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["status"] != "PASS")
        .map(|c| c["id"].as_str().unwrap())
        .collect();
    assert_eq!(failing, ["0.53-0.545 Theta10", "0.53-0.545 total"]);
    let theta12 = &r["claims"][11];
    assert_eq!(theta12["id"], "0.53-0.545 Theta12");
    assert!((theta12["value"].as_f64().unwrap() - 0.0387).abs() <= 1e-4);
}

#[test]
fn combinatorics_case_is_labelled_as_falsification() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), "falsify_count = 2000\n").unwrap();
    let out = sievecert(
        &["verify-combinatorics", "--case", "I.i", "--config", "run.cfg", "--seeds", "1,2"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let r = report_json(&dir.path().join("report.json"));
    let claims = r["claims"].as_array().unwrap();
    assert_eq!(claims.len(), 2);
    for c in claims {
        assert_eq!(c["status"], "FALSIFICATION-PASSED");
        assert_eq!(c["value"], 0.0);
    }
}

#[test]
fn repeated_runs_are_byte_identical_except_the_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), "falsify_count = 500\n").unwrap();
    for args in [
        &["verify-decomposition", "--case", "a<=0.53"][..],
        &["verify-exponents", "--claim", "cases2-lambda-0.53"][..],
        &["verify-combinatorics", "--case", "D.c", "--config", "run.cfg"][..],
    ] {
        let mut first = args.to_vec();
        first.extend(["--report", "one.json"]);
        let mut second = args.to_vec();
        second.extend(["--report", "two.json"]);
        assert_eq!(sievecert(&first, dir.path()).status.code(), Some(0));
        assert_eq!(sievecert(&second, dir.path()).status.code(), Some(0));
        assert_eq!(
            without_timestamp(&dir.path().join("one.json")),
            without_timestamp(&dir.path().join("two.json")),
            "{args:?}"
        );
    }
}

#[test]
fn dump_catalog_lists_everything_and_writes_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = sievecert(&["dump-catalog", "--omega", "omega.txt"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let cat: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(cat["decomposition"].as_array().unwrap().len(), 6);
    assert_eq!(cat["exponents"].as_array().unwrap().len(), 28);
    assert_eq!(cat["combinatorics"].as_array().unwrap().len(), 92);
    let table = fs::read_to_string(dir.path().join("omega.txt")).unwrap();
    assert!(table.starts_with("omega-table v1 64 0.0001\n"));
    assert_eq!(table.lines().count(), 1 + 630_001);
}

#[test]
fn injected_mutants_fail_the_run() {
    let cfg = Config::default();
    let records = suites::exponent_records(&cfg, &[exponents::mutant_claim()]);
    assert_eq!(records[0].status, "FALSIFIED");
    assert_eq!(Report::new("verify-exponents", &cfg, records).exit_code(), 1);

    let mut narrow = cfg.clone();
    narrow.falsify_count = 20_000;
    let record = suites::mutation_record(&narrow).unwrap();
    assert_eq!(record.status, "PASS");
    assert!(record.value.unwrap() >= 1.0);

    let mut tight = cfg.clone();
    tight.certify_min_width = 0.5;
    let records = suites::exponent_records(&tight, &[exponents::find_claim("largetau").unwrap()]);
    assert_eq!(records[0].status, "INCONCLUSIVE");
    assert_eq!(Report::new("verify-exponents", &tight, records).exit_code(), 1);
}

fn record(status: &str) -> ClaimRecord {
    ClaimRecord {
        id: "x".to_string(),
        anchor: String::new(),
        kind: "test".to_string(),
        value: None,
        err: None,
        bound: None,
        relation: String::new(),
        status: status.to_string(),
        margin: None,
    }
}

proptest! {
    #[test]
    fn exit_code_is_zero_iff_every_status_passes(
        statuses in prop::collection::vec(
            prop::sample::select(vec!["PASS", "FAIL", "CERTIFIED", "FALSIFIED", "INCONCLUSIVE", "FALSIFICATION-PASSED"]),
            0..12,
        )
    ) {
        let report = Report::new("t", &Config::default(), statuses.iter().map(|s| record(s)).collect());
        let expected = if statuses.iter().all(|s| PASSING.contains(s)) { 0 } else { 1 };
        prop_assert_eq!(report.exit_code(), expected);
        prop_assert_eq!(report.summary["total"], statuses.len());
    }
}
