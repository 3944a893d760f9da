use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn srrt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srrt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = srrt(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const SPECS: &str = r#"[
  {"name": "drift", "length": 30, "image_size": [200, 160], "target_size": [24, 20],
   "start": [60, 80], "motion": {"law": "constant", "dx": 1.5, "dy": 0.5}, "texture_seed": 1},
  {"name": "jumpy", "length": 30, "image_size": [240, 160], "target_size": [20, 20],
   "start": [80, 80], "motion": {"law": "jumps", "jumps": [{"frame": 12, "dx": 45, "dy": 0}]}, "texture_seed": 2}
]"#;

const STATIC: &str = r#"{"name": "still", "length": 12, "image_size": [96, 96], "target_size": [16, 16],
  "motion": {"law": "constant", "dx": 0, "dy": 0}, "texture_seed": 3}"#;

fn make_dataset(root: &Path, specs: &str) -> std::path::PathBuf {
    fs::create_dir_all(root).unwrap();
    let spec = root.join("spec.json");
    fs::write(&spec, specs).unwrap();
    let data = root.join("data");
    ok(&[
        "synth",
        "--spec",
        p(&spec),
        "--output",
        p(&data),
        "--seed",
        "4",
    ]);
    data
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn stats_on_static_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let data = make_dataset(dir.path(), STATIC);
    let report = json(&ok(&["stats", "--dataset", p(&data)]));
    assert_eq!(report["fractions"]["2SR"], 1.0);
    assert_eq!(report["pairs"], 11);
}

#[test]
fn oracle_track_then_eval_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let data = make_dataset(dir.path(), SPECS);
    let results = dir.path().join("results");
    ok(&[
        "track",
        "--dataset",
        p(&data),
        "--output",
        p(&results),
        "--regulator",
        "oracle",
        "--tracker",
        "oracle",
        "--sigma",
        "0",
        "--seed",
        "1",
    ]);
    let report = json(&ok(&[
        "eval",
        "--dataset",
        p(&data),
        "--results",
        p(&results),
    ]));
    assert!((report["auc"].as_f64().unwrap() - 20.0 / 21.0).abs() < 1e-12);
    assert_eq!(report["p"], 1.0);
    assert_eq!(report["p_norm"], 1.0);

    let out = dir.path().join("eval");
    ok(&[
        "eval",
        "--dataset",
        p(&data),
        "--results",
        p(&results),
        "--output",
        p(&out),
    ]);
    let csv = fs::read_to_string(out.join("success.csv")).unwrap();
    assert_eq!(csv.lines().count(), 22);
    assert!(out.join("curves").join("drift.csv").exists());
}

#[test]
fn fixed_and_regulated_runs_with_ncc() {
    let dir = tempfile::tempdir().unwrap();
    let data = make_dataset(dir.path(), SPECS);
    let fixed = dir.path().join("fixed");
    ok(&[
        "track",
        "--dataset",
        p(&data),
        "--output",
        p(&fixed),
        "--gamma",
        "2",
        "--workers",
        "2",
    ]);
    let meta = json(&fs::read_to_string(fixed.join("jumpy.meta.json")).unwrap());
    assert_eq!(meta["mode"], "fixed-2SR");
    let lines = fs::read_to_string(fixed.join("jumpy.txt")).unwrap();
    assert_eq!(lines.lines().count(), 29);
    assert!(lines.lines().all(|l| l.split(',').nth(5) == Some("2")));

    let limited = dir.path().join("limited");
    ok(&[
        "track",
        "--dataset",
        p(&data),
        "--output",
        p(&limited),
        "--regulator",
        "oracle",
        "--categories",
        "2,4",
        "--K",
        "3",
        "--lambda",
        "0.2",
    ]);
    let lines = fs::read_to_string(limited.join("jumpy.txt")).unwrap();
    assert!(lines
        .lines()
        .all(|l| matches!(l.split(',').nth(5), Some("2") | Some("4"))));
}

/// Drops the latency column, the only wall-clock field.
fn strip_timing(text: &str) -> String {
    text.lines()
        .map(|l| l.rsplit_once(',').unwrap().0.to_string() + "\n")
        .collect()
}

#[test]
fn seeded_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let data = make_dataset(dir.path(), SPECS);
    let again = make_dataset(&dir.path().join("b"), SPECS);
    for name in ["drift", "jumpy"] {
        for f in ["img/0001.png", "img/0030.png", "groundtruth.txt"] {
            assert_eq!(
                fs::read(data.join(name).join(f)).unwrap(),
                fs::read(again.join(name).join(f)).unwrap()
            );
        }
    }
    let run = |out: &str| {
        let out = dir.path().join(out);
        ok(&[
            "track",
            "--dataset",
            p(&data),
            "--output",
            p(&out),
            "--regulator",
            "classical",
            "--tracker",
            "oracle",
            "--sigma",
            "1.5",
            "--seed",
            "9",
        ]);
        out
    };
    let (a, b) = (run("a"), run("b"));
    for name in ["drift", "jumpy"] {
        let ta = fs::read_to_string(a.join(format!("{name}.txt"))).unwrap();
        let tb = fs::read_to_string(b.join(format!("{name}.txt"))).unwrap();
        assert_eq!(strip_timing(&ta), strip_timing(&tb));
        assert_eq!(
            fs::read(a.join(format!("{name}.meta.json"))).unwrap(),
            fs::read(b.join(format!("{name}.meta.json"))).unwrap()
        );
    }
    let sa = ok(&["stats", "--dataset", p(&data)]);
    let sb = ok(&["stats", "--dataset", p(&data), "--workers", "1"]);
    assert_eq!(sa, sb);
}

#[test]
fn sample_exports_index_and_patches() {
    let dir = tempfile::tempdir().unwrap();
    let data = make_dataset(dir.path(), SPECS);
    let out = dir.path().join("train");
    ok(&[
        "sample",
        "--dataset",
        p(&data),
        "--output",
        p(&out),
        "--count",
        "12",
        "--seed",
        "2",
    ]);
    let index = fs::read_to_string(out.join("index.csv")).unwrap();
    assert_eq!(index.lines().count(), 12);
    let labels: Vec<&str> = index
        .lines()
        .map(|l| l.split(',').nth(3).unwrap())
        .collect();
    assert_eq!(labels.iter().filter(|&&l| l == "8").count(), 3);
    assert!(out.join("000011_c.png").exists() && out.join("000000_zd.png").exists());

    let again = dir.path().join("train2");
    ok(&[
        "sample",
        "--dataset",
        p(&data),
        "--output",
        p(&again),
        "--count",
        "12",
        "--seed",
        "2",
    ]);
    assert_eq!(index, fs::read_to_string(again.join("index.csv")).unwrap());
    assert_eq!(
        fs::read(out.join("000005_c.png")).unwrap(),
        fs::read(again.join("000005_c.png")).unwrap()
    );
}

#[test]
fn bench_orders_latency() {
    let out = ok(&[
        "bench",
        "--categories",
        "2,4,6",
        "--frames",
        "80",
        "--warmup",
        "5",
    ]);
    let rows: Vec<Vec<&str>> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][0], "fixed-2SR");
    let median: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(median[0] < median[1] && median[0] < median[2], "{median:?}");
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let data = make_dataset(dir.path(), STATIC);
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        format!(
            "dataset = {:?}\nregulator = \"oracle\"\ntracker = \"oracle\"\n",
            p(&data)
        ),
    )
    .unwrap();
    let out = dir.path().join("out");
    ok(&[
        "track",
        "--config",
        p(&cfg),
        "--output",
        p(&out),
        "--seed",
        "3",
    ]);
    let meta = json(&fs::read_to_string(out.join("still.meta.json")).unwrap());
    assert_eq!(meta["seed"], 3);
    assert_eq!(meta["config"]["regulator"], "oracle");

    fs::write(&cfg, "unknown_key = 1\n").unwrap();
    let bad = srrt(&["stats", "--config", p(&cfg), "--dataset", p(&data)]);
    assert_eq!(bad.status.code(), Some(1));
    let err = String::from_utf8(bad.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error kind=config"), "{err}");
}

#[test]
fn usage_and_runtime_errors() {
    assert_eq!(srrt(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(srrt(&["stats", "--bogus"]).status.code(), Some(2));
    assert_eq!(srrt(&[]).status.code(), Some(2));

    let missing = srrt(&["stats", "--dataset", "/nonexistent/srrt"]);
    assert_eq!(missing.status.code(), Some(1));
    let err = String::from_utf8(missing.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error kind="), "{err}");

    let no_dataset = srrt(&["stats"]);
    assert!(String::from_utf8(no_dataset.stderr)
        .unwrap()
        .starts_with("error kind=config"));
    let bad_reg = srrt(&[
        "track",
        "--dataset",
        "/tmp",
        "--output",
        "/tmp/x",
        "--regulator",
        "neural",
    ]);
    assert_eq!(bad_reg.status.code(), Some(1));
}
