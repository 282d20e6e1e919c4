use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn wavechain(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavechain"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn circle_stability_constant_is_one_plus_eps() {
    let tmp = TempDir::new().unwrap();
    let o = wavechain(
        &["analyze", "--model", "circle", "--param", "n=5", "--param", "eps=1", "--bijection", "shift:-1", "--analyses", "stability"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(tmp.path());
    assert!((r["results"]["stability"]["c"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(r["violations"], Value::Array(vec![]));
    let profile = std::fs::read_to_string(tmp.path().join("profile.csv")).unwrap();
    assert!(profile.starts_with("state,mass\n0,0.2857142857142857"));
}

#[test]
fn four_point_never_merges_in_relative_sup() {
    let tmp = TempDir::new().unwrap();
    let o = wavechain(&["merge-time", "--model", "four-point", "--max-steps", "200"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let m = &report(tmp.path())["results"]["merging"];
    assert_eq!(m["merging_time"], "unbounded");
    assert_eq!(m["reason"], "K\u{303} reducible");
    let trace = std::fs::read_to_string(tmp.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("n,distance\n0,inf\n"));
    assert_eq!(trace.lines().count(), 202);
}

#[test]
fn circle_merges_and_traces_until_the_threshold() {
    let tmp = TempDir::new().unwrap();
    let o = wavechain(&["merge-time", "--model", "circle", "--param", "n=7", "--epsilon", "0.1"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let m = &report(tmp.path())["results"]["merging"];
    let t = m["merging_time"].as_u64().unwrap();
    let trace = std::fs::read_to_string(tmp.path().join("trace.csv")).unwrap();
    let last: Vec<&str> = trace.lines().last().unwrap().split(',').collect();
    assert_eq!(last[0].parse::<u64>().unwrap(), t);
    assert!(last[1].parse::<f64>().unwrap() < 0.1);
}

#[test]
fn malformed_kernel_exits_one_naming_the_row() {
    let tmp = TempDir::new().unwrap();
    let file = tmp.path().join("bad.json");
    std::fs::write(&file, r#"{"size": 3, "triplets": [[0, 1, 1.0], [1, 2, 0.6], [2, 0, 1.0]]}"#).unwrap();
    let o = wavechain(&["analyze", "--model", file.to_str().unwrap()], &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 1"));
}

#[test]
fn kernel_documents_run_like_zoo_models() {
    let tmp = TempDir::new().unwrap();
    let file = tmp.path().join("walk.json");
    std::fs::write(
        &file,
        r#"{"size": 3, "triplets": [[0,0,0.5],[0,1,0.5],[1,1,0.5],[1,2,0.5],[2,2,0.5],[2,0,0.5]]}"#,
    )
    .unwrap();
    let out = tmp.path().join("out");
    let o = wavechain(&["analyze", "--model", file.to_str().unwrap(), "--bijection", "[1,2,0]"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["results"]["model"]["bijection"], "shift:+1");
    assert!(r["results"]["merging"]["merging_time"].is_u64());
}

#[test]
fn input_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    for args in [
        vec!["analyze", "--model", "torus"],
        vec!["analyze", "--param", "n=4"],
        vec!["analyze", "--param", "m=5"],
        vec!["analyze", "--epsilon", "-1"],
        vec!["analyze", "--analyses", "spectrum"],
        vec!["scan", "--model", "four-point"],
        vec!["merge-time", "--metric", "l7"],
        vec!["merge-time", "--no-such-flag"],
    ] {
        let o = wavechain(&args, tmp.path());
        assert_eq!(o.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn help_exits_zero() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(wavechain(&["analyze", "--help"], tmp.path()).status.code(), Some(0));
}

#[test]
fn reports_are_byte_stable() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = ["analyze", "--model", "lazy-circle", "--param", "n=7", "--bijection", "random:3", "--seed", "5", "--analyses", "spectral,stability,merging,bounds,simulate", "--param", "eps=0.5"];
    assert_eq!(wavechain(&args, a.path()).status.code(), Some(0));
    assert_eq!(wavechain(&args, b.path()).status.code(), Some(0));
    for f in ["report.json", "trace.csv", "profile.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_documents_with_flag_overrides() {
    let tmp = TempDir::new().unwrap();
    let doc = tmp.path().join("exp.toml");
    std::fs::write(
        &doc,
        "model = \"circle\"\nanalyses = [\"stability\"]\nbijection = \"shift:2\"\n[params]\nn = 9\neps = 0.5\n",
    )
    .unwrap();
    let out = tmp.path().join("out");
    let o = wavechain(&["analyze", "--config", doc.to_str().unwrap(), "--param", "eps=2"], &out);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["config"]["params"]["eps"], 2.0);
    assert_eq!(r["config"]["params"]["n"], 9.0);
    assert_eq!(r["results"]["model"]["bijection"], "shift:+2");
    assert!(r["results"]["stability"]["c"].as_f64().unwrap() <= 3.0 + 1e-12);
}

#[test]
fn lazy_scan_stays_within_the_bound() {
    let tmp = TempDir::new().unwrap();
    let o = wavechain(&["scan", "--model", "lazy-circle", "--param", "n=9", "--param", "eps=1", "--count", "50"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let scan = &report(tmp.path())["results"]["scan"];
    let rows = scan["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| r["asserted"] == true && r["ratio"].as_f64().unwrap() <= 2.0 + 1e-9));
}

#[test]
fn nonlazy_scan_asserts_only_small_shifts() {
    let tmp = TempDir::new().unwrap();
    let o = wavechain(&["scan", "--model", "circle", "--param", "n=11", "--count", "20"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let scan = &report(tmp.path())["results"]["scan"];
    assert!(scan["label"].as_str().unwrap().starts_with("empirical"));
    for r in scan["rows"].as_array().unwrap() {
        let g = r["g"].as_str().unwrap();
        let small = ["shift:+1", "shift:-1", "shift:+2", "shift:-2"].contains(&g);
        assert_eq!(r["asserted"] == true, small, "{g}");
        if small {
            assert!(r["ratio"].as_f64().unwrap() <= 2.0 + 1e-10);
        }
    }
}

#[test]
fn scaling_reports_a_quadratic_exponent() {
    let tmp = TempDir::new().unwrap();
    let o = wavechain(&["scaling", "--model", "circle", "--sizes", "5,9,13,17,21,25"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let s = &report(tmp.path())["results"]["scaling"];
    let slope = s["fit"]["slope"].as_f64().unwrap();
    assert!((1.7..=2.3).contains(&slope), "{slope}");
    assert_eq!(s["points"].as_array().unwrap().len(), 6);
}

#[test]
fn simulated_profiles_track_the_exact_ones() {
    let tmp = TempDir::new().unwrap();
    let o = wavechain(&["wave-profile", "--model", "circle", "--param", "n=9", "--samples", "200000", "--seed", "1"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let w = &report(tmp.path())["results"]["wave_profile"];
    assert!(w["empirical"]["tv_to_exact"].as_f64().unwrap() < 0.02);
    let csv = std::fs::read_to_string(tmp.path().join("profile.csv")).unwrap();
    assert!(csv.starts_with("state,mass,empirical\n"));

    let sim = TempDir::new().unwrap();
    let o = wavechain(&["simulate", "--model", "circle", "--steps", "30", "--trials", "200000"], sim.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(report(sim.path())["results"]["simulate"]["tv_to_exact"].as_f64().unwrap() < 0.01);
}

#[test]
fn sticky_and_group_models_run_every_analysis() {
    for model in ["sticky", "cyclic-to-random", "binary-cycling", "periodic-classes", "random-regular", "deck-reversal"] {
        let tmp = TempDir::new().unwrap();
        let o = wavechain(&["analyze", "--model", model, "--max-steps", "300"], tmp.path());
        assert_eq!(o.status.code(), Some(0), "{model}: {}", String::from_utf8_lossy(&o.stderr));
    }
}
