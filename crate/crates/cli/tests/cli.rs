use assert_cmd::Command;
use serde_json::Value;

fn turnlab() -> Command {
    Command::cargo_bin("turnlab").unwrap()
}

fn json_of(out: &[u8]) -> Value {
    serde_json::from_slice(out).unwrap()
}

#[test]
fn promise_run_is_sound_and_reproducible() {
    let run = || {
        turnlab()
            .args(["promise-run", "--n", "2", "--variant", "pm:2", "--schedule", "churn:2", "--trials", "50"])
            .args(["--seed", "7"])
            .assert()
            .success()
            .get_output()
            .stdout
            .clone()
    };
    let a = run();
    assert_eq!(a, run());
    let v = json_of(&a);
    assert_eq!(v["summary"]["trials"], 50);
    for r in v["records"].as_array().unwrap() {
        let ans = r["answer"].as_str().unwrap();
        assert!(ans == "bottom" || ans == r["truth"].as_str().unwrap());
    }
}

#[test]
fn amplified_promise_run_meets_a_rate() {
    turnlab()
        .args(["promise-run", "--n", "2", "--copies", "360", "--trials", "40", "--min-success", "0.5"])
        .assert()
        .success();
}

#[test]
fn unreachable_rate_fails_with_exit_one() {
    turnlab()
        .args(["promise-run", "--n", "2", "--trials", "20", "--min-success", "0.99"])
        .assert()
        .code(1);
}

#[test]
fn triangle_count_csv() {
    let out = turnlab()
        .args(["triangle-count", "--mode", "maxdeg", "--n", "300", "--T", "60", "--trials", "5", "--format", "csv"])
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "trial,answer,truth,correct,estimate,rel_err,peak_bits,stream_len");
    assert_eq!(lines.count(), 5);
}

#[test]
fn triangle_count_exact_at_full_sampling() {
    let out = turnlab()
        .args(["triangle-count", "--mode", "boundedl", "--n", "200", "--T", "30", "--p", "1", "--uncapped"])
        .args(["--trials", "3"])
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    let v = json_of(&out);
    for r in v["records"].as_array().unwrap() {
        assert_eq!(r["answer"], "30");
        assert_eq!(r["rel_err"], 0.0);
    }
}

#[test]
fn triangle_count_rejects_bad_input() {
    turnlab()
        .args(["triangle-count", "--mode", "maxdeg", "--n", "10", "--T", "100", "--trials", "1"])
        .assert()
        .code(2);
    turnlab()
        .args(["triangle-count", "--mode", "maxdeg", "--p", "3/2"])
        .assert()
        .code(2);
}

#[test]
fn compile_sketch_checks_a_grid() {
    let out = turnlab()
        .args(["compile-sketch", "--alg", "grid-parity:7:4", "--mode", "general", "--check-grid", "0:6"])
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    let v = json_of(&out);
    assert_eq!(v["state_bits"], 8);
    assert_eq!(v["grid"]["promise_points"], 49);
    assert_eq!(v["params"]["n"], 2);
}

#[test]
fn compile_sketch_over_budget_is_an_assertion_failure() {
    turnlab()
        .args(["compile-sketch", "--alg", "mod-memory:3", "--s", "1"])
        .assert()
        .code(1);
}

#[test]
fn module_check_round_trips_a_params_file() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("p.json");
    turnlab()
        .args(["compile-sketch", "--alg", "sum-mod:5", "--n", "3", "--out"])
        .arg(&params)
        .assert()
        .success();
    let doc: Value = serde_json::from_slice(&std::fs::read(&params).unwrap()).unwrap();
    let file = dir.path().join("params.json");
    std::fs::write(&file, doc["params"].to_string()).unwrap();
    let out = turnlab()
        .args(["module-check", "--vectors", "200", "--params"])
        .arg(&file)
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    let v = json_of(&out);
    assert_eq!(v["sets"][0]["failures"], 0);
    assert_eq!(v["sets"][0]["checks"], 1200);
}

#[test]
fn stream_gen_writes_valid_streams() {
    for kind in [
        vec!["--kind", "promise", "--variant", "pm:3", "--schedule", "adversarial:1"],
        vec!["--kind", "graph-degree", "--n", "60", "--T", "8"],
        vec!["--kind", "graph-length", "--n", "60", "--T", "8"],
    ] {
        let out = turnlab()
            .arg("stream-gen")
            .args(&kind)
            .assert()
            .success()
            .get_output()
            .stdout
            .clone();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        let header: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
        assert!(header["n"].as_u64().unwrap() > 0);
        assert!(lines.count() > 0);
    }
    let out = turnlab()
        .args(["stream-gen", "--kind", "promise", "--schedule", "insert-only", "--format", "csv"])
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    assert!(String::from_utf8(out).unwrap().starts_with("index,delta\n"));
}
