use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tropcap_core::capacity::{ExpertSpec, MoESpec};

fn tropcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tropcap")).args(args).output().expect("binary runs")
}

fn json_file(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

fn stderr_error(o: &Output) -> Value {
    let line = String::from_utf8_lossy(&o.stderr);
    serde_json::from_str::<Value>(line.trim()).expect("error stream is JSON")["error"].clone()
}

#[test]
fn count_regions_on_five_lines() {
    let o = tropcap(&["count-regions", "--spec", "fixture:five_lines"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["command"], "count-regions");
    assert_eq!(v["result"]["exact_count"], "16");
    assert_eq!(v["result"]["bound_upper"], "16");
}

#[test]
fn generate_round_trips_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = tropcap(&["generate", "dense", "--h", "6", "--d", "2", "--seed", "7", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let e: ExpertSpec<f64> = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!((e.width(), e.d_in()), (6, 2));

    let t = dir.path().join("topk.json");
    let o = tropcap(&["generate", "topk", "--n", "4", "--k", "2", "--h", "3", "--d", "2", "--out", t.to_str().unwrap()]);
    assert!(o.status.success());
    let m: MoESpec<f64> = serde_json::from_slice(&std::fs::read(&t).unwrap()).unwrap();
    let again: MoESpec<f64> = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
    assert_eq!(m, again);

    // a generated spec feeds straight back into the counter
    let o = tropcap(&["count-regions", "--spec", t.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn lower_bound_construction_needs_enough_dimensions() {
    let o = tropcap(&["generate", "lower-bound-construction", "--n", "3", "--k", "2", "--d", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr_error(&o);
    assert_eq!(err["kind"], "refused");
    assert!(err["message"].as_str().unwrap().contains("d_in >= N"));

    let o = tropcap(&["generate", "lower-bound-construction", "--n", "3", "--k", "2"]);
    assert!(o.status.success());
    let m: MoESpec<f64> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(m.d_in(), 3);
}

#[test]
fn budget_refusal_exits_two() {
    let o = tropcap(&["count-regions", "--spec", "fixture:moe_n4_k2_h2", "--budget-nmax", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_error(&o)["kind"], "budget_exceeded");
    let o = tropcap(&["enumerate-cells", "--spec", "fixture:router_n4_k2", "--budget-coalitions", "5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_input_exits_one() {
    let o = tropcap(&["count-regions", "--spec", "/nonexistent/spec.json"]);
    assert_eq!(o.status.code(), Some(1));
    let o = tropcap(&["count-regions", "--spec", "fixture:no_such_fixture"]);
    assert_eq!(o.status.code(), Some(1));
    let o = tropcap(&["run"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn origin_crossing_manifold_is_rejected_by_measure_but_census_runs() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    std::fs::write(&m, r#"{"kind":"segment","center":[0.0,0.0],"extent":1.0,"frame":[[1.0,0.0]]}"#).unwrap();
    let o = tropcap(&[
        "effective-capacity", "--spec", "fixture:moe_n4_k2_h2", "--manifold", m.to_str().unwrap(), "--samples", "2000",
    ]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["result"]["warnings"].to_string().contains("origin"));
    assert!(v["result"].get("spherical_measure").is_none());
}

#[test]
fn config_run_writes_report_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let spec = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/moe_n4_k2_h2.json");
    std::fs::copy(&spec, dir.path().join("moe.json")).unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"command":"count-regions","seed":5,"spec":{"file":"moe.json"},"params":{"census":50000},
            "output":{"path":"out/report.json"}}"#,
    )
    .unwrap();
    let out = dir.path().join("out/report.json");
    let o = tropcap(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json_file(&out);
    let manifest = json_file(&dir.path().join("out/report.manifest.json"));
    assert_eq!(report["seed"], 5);
    assert_eq!(report["config_hash"], manifest["config_sha256"]);
    assert_eq!(manifest["report"], "report.json");
    let bytes = std::fs::read(&out).unwrap();
    assert_eq!(manifest["report_sha256"], tropcap_cli::output::sha256_hex(&bytes));
    assert!(!manifest["stages"].as_array().unwrap().is_empty());
    let entries = std::fs::read_dir(dir.path().join("out")).unwrap().count();
    assert_eq!(entries, 2);
}

#[test]
fn csv_projection_of_bounds() {
    let o = tropcap(&["bounds", "-p", "n=8", "-p", "k=2", "-p", "h=8", "-p", "d=2", "--format", "csv"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("active_params,asymptotic,capacity_bound,model,total_params"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn reports_are_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for (i, threads) in ["1", "2", "8"].iter().enumerate() {
        let out = dir.path().join(format!("r{i}.json"));
        let o = Command::new(env!("CARGO_BIN_EXE_tropcap"))
            .args(["count-regions", "--spec", "fixture:moe_n4_k2_h2", "-p", "census=100000", "--seed", "9", "--out"])
            .arg(&out)
            .env("TROPCAP_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success());
        reports.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(reports[0], reports[2]);
}
