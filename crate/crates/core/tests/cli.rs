//! End-to-end checks of the dmst binary: exit codes, headline outputs, and
//! byte-identical determinism.

use std::process::{Command, Output};

fn dmst(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dmst"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn identity_certifies_with_zero_certificate() {
    let out = dmst(&["identity", "--q", "2", "--n", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("certificate 0"), "{text}");
}

#[test]
fn identity_handles_non_prime_q() {
    for q in ["4", "8", "9"] {
        let out = dmst(&["identity", "--q", q, "--n", "2"]);
        assert!(out.status.success(), "q = {q}");
    }
}

#[test]
fn hilbert_both_methods_agree() {
    let out = dmst(&[
        "hilbert", "--q", "3", "--n", "1", "--twist", "1", "--method", "both", "--tmax", "5",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("(s + t) / ((1-t^2))"), "{text}");
    assert!(text.contains("agree"), "{text}");
}

#[test]
fn verify_named_checks_pass() {
    let out = dmst(&["verify", "--check", "lemma45", "--q", "3", "--n", "2"]);
    assert!(out.status.success());

    let out = dmst(&[
        "verify", "--check", "basis", "--q", "2", "--n", "2", "--comp", "1,1", "--tmax", "8",
    ]);
    assert!(out.status.success());
}

#[test]
fn steinberg_both_methods_agree() {
    let out = dmst(&["steinberg", "--q", "2", "--n", "2", "--tmax", "8", "--method", "both"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("agree"));
}

#[test]
fn field_prints_description() {
    let out = dmst(&["field", "--q", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("2^2/1,1,1"));
    assert!(text.contains("multiplicative generator: u"));
}

#[test]
fn invariants_json_has_rank_2_to_n() {
    let out = dmst(&["invariants", "--q", "2", "--n", "2", "--comp", "1,1"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["generators"].as_array().unwrap().len(), 4);
}

#[test]
fn invalid_configuration_exits_2() {
    // 6 is not a prime power
    let out = dmst(&["hilbert", "--q", "6", "--n", "2"]);
    assert_eq!(out.status.code(), Some(2));
    // composition does not sum to n
    let out = dmst(&["hilbert", "--q", "2", "--n", "3", "--comp", "2,2"]);
    assert_eq!(out.status.code(), Some(2));
    // twist out of range
    let out = dmst(&["hilbert", "--q", "3", "--n", "2", "--twist", "7"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = [
        "hilbert", "--q", "3", "--n", "2", "--comp", "1,1", "--twist", "1", "--method", "both",
        "--tmax", "8", "--format", "csv",
    ];
    let a = dmst(&args);
    let b = dmst(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let args = ["invariants", "--q", "4", "--n", "2"];
    let a = dmst(&args);
    let b = dmst(&args);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn csv_and_json_formats() {
    let out = dmst(&[
        "hilbert", "--q", "2", "--n", "2", "--method", "oracle", "--tmax", "6", "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("tDeg,sDeg,dim"), "{text}");

    let out = dmst(&[
        "hilbert", "--q", "2", "--n", "2", "--method", "closed", "--tmax", "6", "--format", "json",
    ]);
    assert!(out.status.success());
    let tail = stdout(&out);
    let json_start = tail.find('{').unwrap();
    let v: serde_json::Value = serde_json::from_str(&tail[json_start..]).unwrap();
    assert!(v["series"]["denominator"].is_array());
}
