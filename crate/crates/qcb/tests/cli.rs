use std::process::Command;

use qcb::cli::{parse, parse_element, ParseError};
use qcb::sample;
use qcb::sphere::{sphere_presentation_with, Sphere};
use qcb::suites::sample_rng;
use serde_json::Value;

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/mutated_sphere_r1.json");

fn qcb(args: &[&str], env: &[(&str, &str)]) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qcb"));
    cmd.args(args);
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("QCB_")) {
        cmd.env_remove(k);
    }
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).expect("valid JSON")
}

#[test]
fn print_parse_print_round_trip_on_200_expressions() {
    let mut checked = 0;
    for r in [1, 2] {
        let s = Sphere::new(r);
        for i in 0..100 {
            let x = sample::element(&mut sample_rng(31, i), s.algebra(), 4, 1 + i % 4);
            let printed = s.display(&x);
            let y = parse_element(&printed, s.algebra()).unwrap_or_else(|e| panic!("{printed}: {e}"));
            assert_eq!(s.display(&y), printed);
            assert_eq!(y, x);
            checked += 1;
        }
    }
    assert_eq!(checked, 200);
}

#[test]
fn parser_errors_are_classified() {
    let s = Sphere::new(1);
    assert!(matches!(parse_element("z9", s.algebra()), Err(ParseError::IndexOutOfRange(_))));
    assert!(matches!(parse_element("w1", s.algebra()), Err(ParseError::UnknownToken(_))));
    assert!(matches!(parse("z1 + * z2"), Err(ParseError::Syntax { line: 1, .. })));
    // star distributes at evaluation, not at parse time
    let e = parse_element("(z1 + z2)'", s.algebra()).unwrap();
    assert_eq!(e, parse_element("z1' + z2'", s.algebra()).unwrap());
}

#[test]
fn exit_codes_follow_the_contract() {
    assert_eq!(qcb(&["verify", "--r", "1", "--suite", "sphere-identities", "--seed", "7", "--samples", "4"], &[]).0, 0);
    assert_eq!(qcb(&["verify", "--r", "2", "--suite", "frame-vanishing", "--max-degree", "3"], &[]).0, 0);
    // usage errors
    assert_eq!(qcb(&["verify", "--suite", "hopf"], &[]).0, 2, "randomized suite without a seed");
    assert_eq!(qcb(&["rep", "--q", "1.5"], &[]).0, 2);
    assert_eq!(qcb(&["frames", "--format", "csv"], &[]).0, 2);
    assert_eq!(qcb(&["seminorm", "z9"], &[]).0, 2);
    assert_eq!(qcb(&["nonsense"], &[]).0, 2);
    // mathematical failure
    let (code, out, _) = qcb(&["verify", "--relations", FIXTURE], &[]);
    assert_eq!(code, 1);
    let rep = json(&out);
    assert_eq!(rep["passed"], false);
    assert!(rep["checks"][0]["counterexample"].as_str().unwrap().contains("overlap"));
    assert_eq!(qcb(&["confluence", "--presentation", FIXTURE], &[]).0, 1);
    assert_eq!(qcb(&["confluence", "--r", "2"], &[]).0, 0);
}

#[test]
fn fixture_is_the_mutated_sphere() {
    assert_eq!(std::fs::read_to_string(FIXTURE).unwrap(), sphere_presentation_with(1, true).to_json());
}

#[test]
fn reports_are_deterministic() {
    let args = ["verify", "--suite", "twisted-derivation", "--seed", "3", "--samples", "3"];
    let (a, b) = (qcb(&args, &[]), qcb(&args, &[]));
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
    let args = ["metric", "--cutoff", "8", "--iterations", "30", "--restarts", "2", "--seed", "5"];
    let (a, b) = (qcb(&args, &[]), qcb(&args, &[]));
    assert_eq!(a.0, 0, "{}", a.2);
    assert_eq!(a.1, b.1);
}

#[test]
fn environment_overrides_apply() {
    let (code, out, _) = qcb(&["frames"], &[("QCB_R", "2"), ("QCB_MAX_DEGREE", "1")]);
    assert_eq!(code, 0);
    let rep = json(&out);
    assert_eq!(rep["config"]["r"], 2);
    assert_eq!(rep["frames"].as_array().unwrap().len(), 3);
    assert_eq!(rep["frames"][2]["size"], 3);
    // flags win over the environment
    let (_, out, _) = qcb(&["frames", "--r", "1"], &[("QCB_R", "2")]);
    assert_eq!(json(&out)["config"]["r"], 1);
    assert_eq!(qcb(&["frames"], &[("QCB_Q", "2")]).0, 2);
}

#[test]
fn seminorm_rows() {
    let (code, out, _) = qcb(&["seminorm", "--r", "1", "--q", "0.5", "--cutoff", "16", "z1", "z1 + z1'"], &[]);
    assert_eq!(code, 0);
    let rep = json(&out);
    let rows = rep["rows"].as_array().unwrap();
    assert!((rows[0]["l_ver"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(rows[0]["l_hor"]["surrogate"], true);
    assert_eq!(rows[1]["degrees"], serde_json::json!([-1, 1]));
    let (code, out, _) = qcb(&["seminorm", "--r", "2", "--format", "csv", "z1 z2'", "z1"], &[]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "expr,normal_form,l_ver,l_ver_converged,l_hor,l_hor_converged,l_tot,l_tot_converged");
    assert!(lines[1].starts_with("z1 z2',z1 z2',0.000000000000e0,true,UNSUPPORTED,,UNSUPPORTED,"));
    assert_eq!(lines.len(), 3);
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("qcb-cli-{}.json", std::process::id()));
    let p = path.to_str().unwrap();
    let (code, out, _) = qcb(&["rep", "--cutoff", "8", "--out", p], &[]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let rep = json(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(rep["passed"], true);
    assert!(rep["validation"]["max_residual"].as_f64().unwrap() < 1e-12);
    std::fs::remove_file(path).unwrap();
}
