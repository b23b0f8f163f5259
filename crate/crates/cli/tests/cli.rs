use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsc-lab")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn poincare_curvature_at_origin() {
    let out = run(&["curvature", "--catalog", "poincare", "--point", "0,0", "--dir", "1,0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["seed"], 0);
    assert!((v["result"]["hsc"].as_f64().unwrap() + 4.0).abs() < 1e-12);
    assert_eq!(v["config"]["curvature"]["metric"]["catalog"], "poincare");
}

#[test]
fn point_formats_agree() {
    let a = json(&run(&["curvature", "--catalog", "paper_G(2)", "--point", "0.1,0.2,0,0.3", "--dir", "1,0,0.1,0"]));
    let b = json(&run(&["curvature", "--catalog", "paper_G(2)", "--point", "0.1:0.2,0+0.3i", "--dir", "1:0,0.1:0"]));
    assert_eq!(a["result"]["hsc"], b["result"]["hsc"]);
}

#[test]
fn lemma1_prints_kcal() {
    let out = run(&["lemma1", "--k0", "8", "--k1", "1", "--n", "2", "--s", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["kcal"].as_f64(), Some(312.0));
}

#[test]
fn lemma1_harness_runs_clean() {
    let out = run(&["lemma1", "--k0", "2", "--k1", "1", "--n", "3", "--s", "1", "--tensors", "3", "--trials", "2000"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["checks"]["bound_violations"], 0);
}

#[test]
fn example1_finds_four_witnesses_reproducibly() {
    let args = ["example1", "--lambdas", "0.5,1,5,50", "--seed", "0", "--grid", "5", "--dirs", "16", "--starts", "3"];
    let first = run(&args);
    assert_eq!(first.status.code(), Some(0));
    let v = json(&first);
    let ws = v["result"]["witnesses"].as_array().unwrap();
    assert_eq!(ws.len(), 4);
    assert!(ws.iter().all(|w| w["witness"]["value"].as_f64().unwrap() < -1e-8));
    assert_eq!(run(&args).stdout, first.stdout);
}

#[test]
fn lemma2_modes() {
    let out = run(&["lemma2", "--g", "poincare", "--h", "fs_affine", "--mode", "threshold"]);
    assert_eq!(out.status.code(), Some(0));
    let t = json(&out)["result"]["lambda_t"].as_f64().unwrap();
    assert!((t - 1.0).abs() < 1e-9);

    let out = run(&["lemma2", "--g", "fs_affine", "--h", "poincare", "--mode", "threshold"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["lemma2", "--g", "flat(1)", "--h", "fs_affine", "--mode", "decay", "--lambdas", "100,1000,10000"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn warp_modes() {
    let out = run(&["warp", "--mode", "mu0", "--samples", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["warp", "--mode", "asymptotics", "--point", "0.2,0.1,-0.3,0.2"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["warp", "--mode", "search", "--grid", "5", "--random", "16", "--dirs", "16", "--starts", "3", "--iters", "80", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("lambda,min_hsc\n"));
}

#[test]
fn fibration_and_metric_files() {
    let dir = tempfile::tempdir().unwrap();
    let fib = dir.path().join("fib.json");
    std::fs::write(
        &fib,
        r#"{"s":1,"m":1,"fiber_entries":[["1"]],"base_entries":[["1"]],"mu0":0,"box":[{"radius":0.5},{"radius":0.5}]}"#,
    )
    .unwrap();
    let psi = dir.path().join("psi.json");
    let out = run(&["warp", "--fibration", fib.to_str().unwrap(), "--mode", "assemble", "--lambda", "3", "--output", psi.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&psi).unwrap()).unwrap();
    let metric = dir.path().join("metric.json");
    std::fs::write(&metric, report["result"].to_string()).unwrap();
    let out = run(&["curvature", "--metric", metric.to_str().unwrap(), "--point", "0,0,0.1,0"]);
    assert_eq!(out.status.code(), Some(0));
    let g = &json(&out)["result"]["metric_matrix"];
    assert_eq!(g[1][1][0].as_f64(), Some(3.0));
}

#[test]
fn scan_csv_and_box_override() {
    let out = run(&["scan", "--catalog", "fs_affine", "--radius", "0.5", "--grid", "3", "--random", "4", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("index,z1_re,z1_im,min_hsc\n"));
    let out = run(&["scan", "--catalog", "poincare", "--box", r#"[{"re":[-0.5,0.5],"im":[0,0.5]}]"#, "--grid", "3", "--random", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((json(&out)["result"]["min_hsc"].as_f64().unwrap() + 4.0).abs() < 1e-9);
}

#[test]
fn witness_absent_for_positive_metric() {
    let out = run(&["witness", "--catalog", "fs_affine", "--budget", "50"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["result"]["witness"].is_null());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["curvature", "--catalog", "nope", "--point", "0,0"]).status.code(), Some(2));
    assert_eq!(run(&["curvature", "--catalog", "poincare", "--point", "0,0,1"]).status.code(), Some(2));
    assert_eq!(run(&["curvature", "--point", "0,0"]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    assert_eq!(run(&["curvature", "--catalog", "poincare", "--point", "2,0"]).status.code(), Some(2));
}

#[test]
fn selftest_exits_zero() {
    let out = run(&["selftest", "--seed", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["passed"], true);
    assert_eq!(v["result"]["errata"], 1);
}
