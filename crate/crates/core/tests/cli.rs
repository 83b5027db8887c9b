use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hida_core::harness::VerificationReport;

fn hida(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hida")).args(args).output().expect("binary runs")
}

fn read_report(path: &Path) -> VerificationReport {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn oracle_csv() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/oracle_sample.csv").display().to_string()
}

#[test]
fn empty_instance_list_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"instances": []}"#).unwrap();
    let out = hida(&["verify", "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: VerificationReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report.passed && report.instances.is_empty());
}

#[test]
fn small_level_is_rejected() {
    let out = hida(&["verify", "--N", "1", "--p", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("N p > 4"));
    let out = hida(&["verify", "--N", "6", "--p", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = hida(&["verify", "--N", "5", "--p", "3", "--check", "no-such-check"]);
    assert!(!out.status.success());
}

#[test]
fn warm_cache_reproduces_report_and_survives_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let (first, second, third) = (dir.path().join("a.json"), dir.path().join("b.json"), dir.path().join("c.json"));
    let args = |out: &Path| {
        vec![
            "verify".to_string(),
            "--N".into(),
            "1".into(),
            "--p".into(),
            "11".into(),
            "--cache-dir".into(),
            cache.display().to_string(),
            "--oracle".into(),
            oracle_csv(),
            "--output".into(),
            out.display().to_string(),
        ]
    };
    let run = |out: &Path| {
        let a = args(out);
        let o = hida(&a.iter().map(String::as_str).collect::<Vec<_>>());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        read_report(out)
    };
    let cold = run(&first);
    assert!(cold.passed);
    assert!(cold.entries().any(|(_, c)| c.check.as_str() == "oracle" && c.passed));
    for kind in ["spaces", "operators", "lambda-modules"] {
        assert!(fs::read_dir(cache.join(kind)).unwrap().count() > 0, "{kind} cached");
    }
    let warm = run(&second);
    assert_eq!(cold.without_timings(), warm.without_timings());
    assert_eq!(cold.without_timings().to_json(), warm.without_timings().to_json());

    // flip a digit inside every cached space: checksums catch it and the space is rebuilt
    for entry in fs::read_dir(cache.join("spaces")).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let idx = text.find("\"relations\"").unwrap();
        let pos = idx + text[idx..].find(|c: char| c.is_ascii_digit()).unwrap();
        let mut bytes = text.into_bytes();
        bytes[pos] = if bytes[pos] == b'7' { b'8' } else { b'7' };
        fs::write(&path, bytes).unwrap();
    }
    let repaired = run(&third);
    assert_eq!(cold.without_timings(), repaired.without_timings());

    let rendered = hida(&["report", first.to_str().unwrap()]);
    assert!(rendered.status.success());
    assert!(String::from_utf8_lossy(&rendered.stdout).contains("PASS rank-duality"));
}

#[test]
fn build_exports_packets() {
    let dir = tempfile::tempdir().unwrap();
    let packets = dir.path().join("packets.json");
    let out = hida(&["build", "--N", "5", "--p", "3", "--packets", packets.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("level    15: 96 classes"));
    let export: serde_json::Value = serde_json::from_str(&fs::read_to_string(&packets).unwrap()).unwrap();
    let level = &export["levels"][0];
    assert_eq!(level["level"], 15);
    let a_n = &level["packets"][0]["a_n"];
    assert_eq!(a_n[0], "1");
    assert_eq!(a_n[2], "-1");
    assert_eq!(level["packets"][0]["provenance"], "p-level");
}

#[test]
fn failing_report_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let report = serde_json::json!({
        "schema_version": 1, "precision": 20, "n_max": null, "passed": false,
        "instances": [{"instance": {"tame": 5, "prime": 3, "r_max": 1}, "passed": false, "checks": [
            {"check": "control", "level": 15, "passed": false, "precision": 20, "details": {},
             "witness": {"kernel_vector_mod_p": ["1"]}, "elapsed_ms": 3}]}]
    });
    fs::write(&path, report.to_string()).unwrap();
    let out = hida(&["report", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL control"));
}
