use std::path::Path;
use std::process::Command;

fn run(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_surfremap")).args(args).output().expect("binary runs")
}

fn csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn meta(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn remap_writes_records_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = run(&["remap", "--field", "f3", "--source-level", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv(&out);
    assert_eq!(rows[0], ["node", "theta", "phi", "value", "exact", "marked", "limited"]);
    let m = meta(&dir.path().join("r.meta.json"));
    let n = m["summary"]["target_nodes"].as_u64().unwrap() as usize;
    assert_eq!(rows.len(), n + 1);
    for r in &rows[1..] {
        let v: f64 = r[3].parse().unwrap();
        assert!((0.12 - 1e-9..=1.0 + 1e-9).contains(&v));
    }
    assert_eq!(m["schema_version"], 1);
    assert_eq!(m["records"].as_u64().unwrap() as usize, n);
    assert_eq!(m["spec"]["field"], "f3");
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        assert!(run(&["remap", "--field", "f4", "--out", p.to_str().unwrap()]).status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn configuration_errors_exit_with_two() {
    for args in [
        &["remap", "--degree", "5"][..],
        &["remap", "--field", "f9"],
        &["remap", "--sigma", "-1"],
        &["repeat", "--steps", "0"],
        &["convergence", "--source-level", "2", "--target-level", "2"],
        &["remap", "--source-level", "0"],
        &["no-such-command"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn convergence_rates_are_recomputable() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = run(&["convergence", "--field", "f1", "--method", "wls", "--source-level", "1", "--target-level", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv(&out);
    assert_eq!(rows.len(), 1 + 4);
    for pair in [(1, 2), (3, 4)] {
        let (c, f) = (&rows[pair.0], &rows[pair.1]);
        let n = |r: &Vec<String>| r[3].parse::<f64>().unwrap();
        let e = |r: &Vec<String>| r[5].parse::<f64>().unwrap();
        let rate = 2.0 * (e(c) / e(f)).ln() / (n(f) / n(c)).ln();
        let emitted: f64 = f[7].parse().unwrap();
        assert!((rate - emitted).abs() < 1e-12);
        assert!(emitted >= 4.5, "quartic rate {emitted}");
    }
}

#[test]
fn constant_field_has_no_error() {
    let o = run(&["remap", "--field", "const", "--format", "json"]);
    assert!(o.status.success());
    let recs: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for r in recs.as_array().unwrap() {
        assert!((r["value"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn detect_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    assert!(run(&["detect", "--field", "f1", "--out", out.to_str().unwrap()]).status.success());
    let m = meta(&dir.path().join("d.meta.json"));
    assert_eq!(m["summary"]["source_marked"], 0);
    assert!(dir.path().join("d.alpha.csv").exists());

    let out = dir.path().join("t.csv");
    assert!(run(&["trace", "--field", "f3", "--out", out.to_str().unwrap()]).status.success());
    let rows = csv(&out);
    let m = meta(&dir.path().join("t.meta.json"));
    assert_eq!(m["summary"]["points"].as_u64().unwrap() as usize, rows.len() - 1);
    let s: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(s.windows(2).all(|w| w[0] <= w[1]));
    for r in &rows[1..] {
        let v: f64 = r[3].parse().unwrap();
        assert!((0.12 - 1e-6..=1.0 + 1e-6).contains(&v));
    }
}

#[test]
fn repeat_with_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rep.csv");
    let o = run(&["repeat", "--field", "const", "--method", "linear", "--steps", "3", "--trace-at", "1,3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv(&out);
    assert_eq!(rows.len(), 1 + 3);
    for r in &rows[1..] {
        assert!((r[4].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    }
    assert!(dir.path().join("rep.trace-1.csv").exists());
    assert!(dir.path().join("rep.trace-3.csv").exists());
}

#[test]
fn gen_mesh_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.txt");
    assert!(run(&["gen-mesh", "--family", "cubed-sphere", "--source-level", "1", "--out", out.to_str().unwrap()]).status.success());
    let file = std::io::BufReader::new(std::fs::File::open(&out).unwrap());
    let mesh = surfremap::mesh::io::read_mesh(file).unwrap();
    assert_eq!(mesh.node_count(), 1016);
    assert!(mesh.is_closed());
}
