use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn cmr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmr"))
        .args(args)
        .env_remove("CMR_LOG")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = cmr(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn error_code(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).expect("stderr is one JSON object");
    v["error"]["code"].as_str().unwrap().to_string()
}

fn read(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn vec3(v: &Value) -> [f64; 3] {
    let a = v.as_array().unwrap();
    [0, 1, 2].map(|i| a[i].as_f64().unwrap())
}

#[test]
fn synth_then_register_recovers_root() {
    let tmp = TempDir::new().unwrap();
    let scene = tmp.path().join("scene");
    ok(&["synth", "--seed", "11", "--output", p(&scene)]);
    for f in ["mesh.obj", "regressor.json", "intrinsics.json", "landmarks.json", "mask.png", "gt.json", "spec.json"] {
        assert!(scene.join(f).is_file(), "{f} missing");
    }
    let stdout = ok(&["register", "--scene", p(&scene)]);
    let result: Value = serde_json::from_str(&stdout).unwrap();
    let gt = read(&scene.join("gt.json"));
    let (t, root) = (vec3(&result["t_star"]), vec3(&gt["root"]));
    let err = (0..3).map(|i| (t[i] - root[i]).powi(2)).sum::<f64>().sqrt();
    assert!(err < 1e-3, "root error {err}");
    assert_eq!(result["regime"], "use_2d");
}

#[test]
fn same_seed_gives_identical_files() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        ok(&["synth", "--seed", "5", "--count", "3", "--jobs", "2", "--landmark-sigma", "1.5", "--output", p(dir)]);
        ok(&["register", "--scene", p(&dir.join("scene_0005")), p(&dir.join("scene_0007")), "--output", p(&dir.join("reg"))]);
    }
    for rel in [
        "scene_0005/mask.png",
        "scene_0006/landmarks.json",
        "scene_0007/gt.json",
        "reg/scene_0005/result.json",
        "reg/scene_0007/pred.json",
    ] {
        assert_eq!(std::fs::read(a.join(rel)).unwrap(), std::fs::read(b.join(rel)).unwrap(), "{rel} differs");
    }
    assert_ne!(
        std::fs::read(a.join("scene_0005/mask.png")).unwrap(),
        std::fs::read(a.join("scene_0006/mask.png")).unwrap()
    );
}

#[test]
fn missing_mask_is_an_io_error() {
    let tmp = TempDir::new().unwrap();
    ok(&["synth", "--output", p(tmp.path())]);
    std::fs::remove_file(tmp.path().join("mask.png")).unwrap();
    let out = cmr(&["register", "--scene", p(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_code(&out), "io.mask_not_found");
}

#[test]
fn inverted_deltas_are_rejected() {
    let tmp = TempDir::new().unwrap();
    ok(&["synth", "--output", p(tmp.path())]);
    let out = cmr(&["register", "--scene", p(tmp.path()), "--delta1", "0.02", "--delta2", "0.06"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_code(&out), "config.delta_order");
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("c.toml");
    std::fs::write(&cfg, "[registration]\ndelta_one = 0.1\n").unwrap();
    let out = cmr(&["--config", p(&cfg), "synth", "--output", p(&tmp.path().join("s"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_code(&out).starts_with("io."));
}

#[test]
fn spiral_on_tetrahedron_and_bowtie() {
    let tmp = TempDir::new().unwrap();
    let tet = tmp.path().join("tet.obj");
    std::fs::write(&tet, "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 3 2\nf 1 2 4\nf 2 3 4\nf 1 4 3\n").unwrap();
    let v: Value = serde_json::from_str(&ok(&["spiral", "--mesh", p(&tet), "--vertex", "0", "--lengths", "4"])).unwrap();
    let seq: Vec<u64> = v["sequence"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert_eq!(seq.len(), 5);
    assert_eq!(seq[0], 0);
    let mut ring: Vec<u64> = seq[1..4].to_vec();
    ring.sort_unstable();
    assert_eq!(ring, [1, 2, 3]);
    assert_eq!(seq[4], seq[3]);
    assert_eq!(v["boundaries"], serde_json::json!([1, 5]));

    let bowtie = tmp.path().join("bowtie.obj");
    std::fs::write(&bowtie, "v 0 0 0\nv 1 0 0\nv 1 1 0\nv -1 0 0\nv -1 -1 0\nf 1 2 3\nf 1 4 5\n").unwrap();
    let out = cmr(&["spiral", "--mesh", p(&bowtie), "--vertex", "0"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_code(&out), "spiral.non_manifold_vertex");
}

fn write_pose(path: &Path, joints: &[[f64; 3]]) {
    std::fs::write(path, serde_json::json!({ "joints": joints }).to_string()).unwrap();
}

#[test]
fn eval_identical_and_offset_predictions() {
    let tmp = TempDir::new().unwrap();
    let joints: Vec<[f64; 3]> = (0..21).map(|i| [0.01 * i as f64, 0.02 * (i % 4) as f64, 0.6 + 0.003 * i as f64]).collect();
    let gt = tmp.path().join("gt.json");
    write_pose(&gt, &joints);
    let same: Value = serde_json::from_str(&ok(&["eval", "--pred", p(&gt), "--gt", p(&gt)])).unwrap();
    for m in ["mpjpe", "pa_mpjpe", "cs_mpjpe"] {
        assert!(same["mean"][m].as_f64().unwrap() < 1e-9, "{m}");
    }
    assert_eq!(same["auc"].as_f64().unwrap(), 1.0);

    let shifted: Vec<[f64; 3]> = joints.iter().map(|j| [j[0] + 0.012, j[1], j[2] - 0.016]).collect();
    let pred = tmp.path().join("pred.json");
    write_pose(&pred, &shifted);
    let out_dir = tmp.path().join("metrics");
    let v: Value = serde_json::from_str(&ok(&["eval", "--pred", p(&pred), "--gt", p(&gt), "--output", p(&out_dir)])).unwrap();
    assert!((v["mean"]["cs_mpjpe"].as_f64().unwrap() - 20.0).abs() < 1e-9);
    assert!(v["mean"]["mpjpe"].as_f64().unwrap() < 1e-9);
    assert!(v["mean"]["pa_mpjpe"].as_f64().unwrap() < 1e-9);
    let csv = std::fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    assert!(csv.starts_with("sample_id,metric,value\n"));
    assert!(csv.lines().any(|l| l.starts_with("all,auc,")));
    assert!(out_dir.join("metrics.json").is_file());

    let out = cmr(&["eval", "--pred", p(&pred), p(&gt), "--gt", p(&gt)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_code(&out), "config.invalid");
}

#[test]
fn batch_register_then_eval_and_plot() {
    let tmp = TempDir::new().unwrap();
    let scenes = tmp.path().join("scenes");
    ok(&["synth", "--seed", "40", "--count", "4", "--landmark-shift", "30", "--output", p(&scenes)]);
    let ids: Vec<String> = (40..44).map(|s| format!("scene_{s:04}")).collect();
    let dirs: Vec<String> = ids.iter().map(|id| p(&scenes.join(id)).to_string()).collect();
    let reg = tmp.path().join("reg");
    let mut args: Vec<&str> = vec!["--jobs", "3", "register", "--scene"];
    args.extend(dirs.iter().map(String::as_str));
    args.extend(["--output", p(&reg)]);
    ok(&args);

    let preds: Vec<String> = ids.iter().map(|id| p(&reg.join(id).join("pred.json")).to_string()).collect();
    let gts: Vec<String> = ids.iter().map(|id| p(&scenes.join(id).join("gt.json")).to_string()).collect();
    let mut args: Vec<&str> = vec!["eval", "--pred"];
    args.extend(preds.iter().map(String::as_str));
    args.push("--gt");
    args.extend(gts.iter().map(String::as_str));
    let v: Value = serde_json::from_str(&ok(&args)).unwrap();
    assert_eq!(v["samples"], 4);
    // root-relative pose is exact; only the root is off
    assert!(v["mean"]["mpjpe"].as_f64().unwrap() < 1e-6);

    let plots = tmp.path().join("plots");
    let results: Vec<String> = ids.iter().map(|id| p(&reg.join(id).join("result.json")).to_string()).collect();
    let mut args: Vec<&str> = vec!["plot", "--output", p(&plots)];
    args.extend(results.iter().map(String::as_str));
    ok(&args);
    for id in &ids {
        let svg = std::fs::read_to_string(plots.join(format!("{id}.svg"))).unwrap();
        assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
        assert!(svg.trim_end().ends_with("</svg>"));
        let meta = &svg[svg.find("<metadata>").unwrap() + 10..svg.find("</metadata>").unwrap()];
        let gaps: Value = serde_json::from_str(meta).unwrap();
        let (before, after) = (gaps["span_gap_before"].as_f64().unwrap(), gaps["span_gap_after"].as_f64().unwrap());
        assert!(after < before, "{id}: {after} >= {before}");
    }
}

#[test]
fn plot_without_inputs_fails() {
    let out = cmr(&["plot"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_code(&out), "config.invalid");
}

#[test]
fn several_scenes_need_an_output_directory() {
    let tmp = TempDir::new().unwrap();
    ok(&["synth", "--count", "2", "--output", p(tmp.path())]);
    let out = cmr(&["register", "--scene", p(&tmp.path().join("scene_0000")), p(&tmp.path().join("scene_0001"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn logging_goes_to_stderr_only() {
    let tmp = TempDir::new().unwrap();
    ok(&["synth", "--output", p(tmp.path())]);
    let out = Command::new(env!("CARGO_BIN_EXE_cmr"))
        .args(["register", "--scene", p(tmp.path())])
        .env("CMR_LOG", "debug")
        .output()
        .unwrap();
    assert!(out.status.success());
    let _: Value = serde_json::from_slice(&out.stdout).expect("stdout stays pure JSON");
}
