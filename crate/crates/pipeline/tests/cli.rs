use std::path::Path;
use std::process::Command;

fn holoembed(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_holoembed")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn config(name: &str) -> String {
    format!("{}/configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, out) = holoembed(&["wp", "verify", "--out", path(&tmp.path().join("wp"))]);
    assert_eq!(code, 0, "{out}");
    let (code, _) = holoembed(&["jordan", "--surface", &config("jordan_fiber_dirty.json"), "--out", path(&tmp.path().join("j"))]);
    assert_eq!(code, 1);
    let (code, _) = holoembed(&["torus2", "--config", "/nonexistent.json"]);
    assert_eq!(code, 2);
}

#[test]
fn wp_eval_prints_json() {
    let (code, out) = holoembed(&["wp", "eval", "0.1,0.2", "-0.3,0.1"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    // even function
    let (_, neg) = holoembed(&["wp", "eval", "-0.1,-0.2"]);
    let w: serde_json::Value = serde_json::from_str(&neg).unwrap();
    let (a, b) = (v[0]["wp"][0].as_f64().unwrap(), w[0]["wp"][0].as_f64().unwrap());
    assert!((a - b).abs() <= 1e-10 * a.abs());
}

#[test]
fn basin_demo_then_trace_and_raster() {
    let tmp = tempfile::tempdir().unwrap();
    let demo = tmp.path().join("demo");
    let (code, out) = holoembed(&["basin", "--out", path(&demo), "--svg", "--seed", "3"]);
    assert_eq!(code, 0, "{out}");
    let seq = demo.join("sequence.json");

    let pts = tmp.path().join("pts.csv");
    std::fs::write(&pts, "id,re_z,im_z,re_w,im_w\n0,0.1,0,0.2,0\n1,1e9,0,0,0\n").unwrap();
    let trace = tmp.path().join("trace");
    let (code, _) = holoembed(&["basin", "trace", "--sequence", path(&seq), "--points", path(&pts), "--out", path(&trace)]);
    assert_eq!(code, 0);
    let v = std::fs::read_to_string(trace.join("verdicts.csv")).unwrap();
    let rows: Vec<&str> = v.lines().collect();
    assert!(rows[1].starts_with("0,converged,"), "{v}");
    assert!(rows[2].starts_with("1,escaped,"), "{v}");

    let raster = tmp.path().join("raster");
    let (code, _) = holoembed(&[
        "basin", "raster", "--sequence", path(&seq), "--window=-2,2,-2,2", "--size", "20,10", "--out", path(&raster), "--svg",
    ]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_to_string(raster.join("raster.csv")).unwrap().lines().count(), 201);
    assert!(raster.join("raster.svg").exists());
}

#[test]
fn seed_override_changes_config_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    holoembed(&["torus2", "--config", &config("two_points.json"), "--out", path(&a)]);
    holoembed(&["torus2", "--config", &config("two_points.json"), "--out", path(&b), "--seed", "9"]);
    let ha: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.join("report.json")).unwrap()).unwrap();
    let hb: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(b.join("report.json")).unwrap()).unwrap();
    assert_ne!(ha["config_hash"], hb["config_hash"]);
}
