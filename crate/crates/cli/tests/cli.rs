use std::path::PathBuf;

use nabla_cli::{run, Outcome, EXIT_INCONCLUSIVE, EXIT_INVALID, EXIT_NEGATIVE, EXIT_NOT_INTEGRABLE, EXIT_OK};
use nabla_core::ModuleDescriptor;
use serde_json::Value;

fn corpus(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("corpus");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn exec(args: &[&str]) -> Outcome {
    run(std::iter::once("nabla-radius").chain(args.iter().copied()))
}

fn json(o: &Outcome) -> Value {
    serde_json::from_str(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", o.stderr))
}

#[test]
fn validate_reports_curvature_witness() {
    let o = exec(&["validate", &corpus("non-integrable.json")]);
    assert_eq!(o.code, EXIT_NOT_INTEGRABLE);
    let v = json(&o);
    assert_eq!(v["result"]["i"], 1);
    assert_eq!(v["result"]["j"], 2);
    assert_eq!(v["result"]["witness"][0][0][0]["coeff"], "-1");
}

#[test]
fn validate_rejects_negative_disc_exponent() {
    let o = exec(&["validate", &corpus("bad-disc-exponent.json")]);
    assert_eq!(o.code, EXIT_INVALID);
    assert!(o.stdout.is_empty());
    assert!(o.stderr.contains("negative exponent"));
}

#[test]
fn missing_file_and_bad_flags_are_invalid() {
    assert_eq!(exec(&["validate", "/nonexistent/x.json"]).code, EXIT_INVALID);
    assert_eq!(
        exec(&["ir", &corpus("dwork-3.json"), "--depth", "abc"]).code,
        EXIT_INVALID
    );
    assert_eq!(
        exec(&["ir", &corpus("dwork-3.json"), "--depth", "4"]).code,
        EXIT_INVALID
    );
    assert_eq!(
        exec(&["ir", &corpus("dwork-3.json"), "--radius", "-1"]).code,
        EXIT_INVALID
    );
    assert_eq!(
        exec(&[
            "specialize",
            &corpus("dwork-2var-3.json"),
            "--direction",
            "1",
            "--point",
            "3"
        ])
        .code,
        EXIT_INVALID
    );
    assert_eq!(
        exec(&[
            "cutcheck",
            &corpus("dwork-2var-3.json"),
            "--direction",
            "1",
            "--point",
            "2",
            "--trials",
            "3"
        ])
        .code,
        EXIT_INVALID
    );
}

#[test]
fn oc_exit_codes() {
    let o = exec(&["oc", &corpus("dwork-3.json"), "--depth", "60"]);
    assert_eq!(o.code, EXIT_NEGATIVE);
    assert_eq!(json(&o)["result"]["verdict"], "NOT_OVERCONVERGENT_EVIDENCE");

    let o = exec(&["oc", &corpus("kummer-3.json"), "--depth", "16"]);
    assert_eq!(o.code, EXIT_OK);
    assert_eq!(json(&o)["result"]["report"]["exact"], true);

    let o = exec(&["oc", &corpus("kummer-half.json"), "--depth", "8"]);
    assert_eq!(o.code, EXIT_INCONCLUSIVE);

    let o = exec(&["oc", &corpus("non-integrable.json")]);
    assert_eq!(o.code, EXIT_NOT_INTEGRABLE);
}

#[test]
fn ir_on_dwork_disc() {
    let o = exec(&["ir", &corpus("dwork-3.json"), "--depth", "32"]);
    assert_eq!(o.code, EXIT_OK);
    let v = json(&o);
    assert_eq!(v["result"]["ir_estimate"], "1/2");
    assert_eq!(v["schema"], "nabla-radius/1");
}

#[test]
fn techlemma_p_plus_t() {
    let o = exec(&[
        "techlemma",
        &corpus("techlemma-p-plus-t.json"),
        "--alpha",
        "2",
        "--beta",
        "1/2",
    ]);
    assert_eq!(o.code, EXIT_OK);
    let v = json(&o);
    let c = &v["result"]["certificate"];
    assert_eq!(c["n0"], 1);
    assert_eq!(c["interval"]["alpha"], "3/4");
    assert_eq!(c["interval"]["beta"], "1/2");
    assert_eq!(v["result"]["check"]["result"], "ok");
}

#[test]
fn taylor_dwork_fails_above_threshold() {
    let o = exec(&["taylor", &corpus("dwork-3.json"), "--eta", "1/4", "--lambda", "0"]);
    assert_eq!(o.code, EXIT_NEGATIVE);
    let o = exec(&["taylor", &corpus("dwork-3.json"), "--eta", "1", "--lambda", "0"]);
    assert_eq!(o.code, EXIT_OK);
}

#[test]
fn cutcheck_finds_dwork_witness() {
    let o = exec(&[
        "cutcheck",
        &corpus("dwork-2var-3.json"),
        "--depth",
        "40",
        "--trials",
        "10",
        "--seed",
        "1",
    ]);
    assert_eq!(o.code, EXIT_OK);
    let w = &json(&o)["result"]["witness"];
    assert_eq!(w["ir_full"], "1/2");
    assert_eq!(w["ir_curve"], "1/2");
}

#[test]
fn output_is_reproducible() {
    let args = [
        "cutcheck",
        &corpus("dwork-2var-3.json"),
        "--depth",
        "30",
        "--trials",
        "5",
        "--seed",
        "42",
    ];
    let a = exec(&args);
    let b = exec(&args);
    assert_eq!(a, b);
    let args = ["ir", &corpus("kummer-half.json"), "--depth", "64"];
    assert_eq!(exec(&args).stdout, exec(&args).stdout);
}

#[test]
fn corpus_and_specialize_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in nabla_core::corpus::NAMES {
        let o = exec(&["corpus", name, "--prime", "5"]);
        assert_eq!(o.code, EXIT_OK);
        let d: ModuleDescriptor = serde_json::from_str(&o.stdout).unwrap();
        let path = dir.path().join(format!("{name}.json"));
        std::fs::write(&path, &o.stdout).unwrap();
        let v = exec(&["validate", path.to_str().unwrap()]);
        assert_eq!(v.code, EXIT_OK, "{name}");
        let again = ModuleDescriptor::from_module(&d.to_module().unwrap());
        assert_eq!(serde_json::to_value(&again).unwrap(), serde_json::to_value(&d).unwrap());
    }

    let o = exec(&[
        "specialize",
        &corpus("dwork-2var-3.json"),
        "--direction",
        "1",
        "--point",
        "5",
    ]);
    assert_eq!(o.code, EXIT_OK);
    let curve = json(&o)["result"]["module"].to_string();
    let path = dir.path().join("curve.json");
    std::fs::write(&path, curve).unwrap();
    let o = exec(&["ir", path.to_str().unwrap(), "--depth", "16"]);
    assert_eq!(o.code, EXIT_OK);
    assert_eq!(json(&o)["result"]["ir_estimate"], "1/2");
}

#[test]
fn hash_ignores_formatting() {
    let dir = tempfile::tempdir().unwrap();
    let raw = std::fs::read_to_string(corpus("kummer-3.json")).unwrap();
    let v: Value = serde_json::from_str(&raw).unwrap();
    let path = dir.path().join("compact.json");
    std::fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    let a = json(&exec(&["validate", &corpus("kummer-3.json")]));
    let b = json(&exec(&["validate", path.to_str().unwrap()]));
    assert_eq!(a["descriptor_sha256"], b["descriptor_sha256"]);
}
