use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pcdenoise"))
}

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn run(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    out
}

fn ok(args: &[&str]) {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn version_is_semver() {
    let out = run(&["--version"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let version = text.trim().strip_prefix("pcdenoise ").unwrap();
    let parts: Vec<&str> = version.split('.').collect();
    assert_eq!(parts.len(), 3, "{version}");
    assert!(parts.iter().all(|s| s.parse::<u64>().is_ok()), "{version}");
}

#[test]
fn missing_input_exits_2_and_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["denoise", "--in", "missing.xyz", "--out", p(&dir.path().join("o.xyz"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    let last = err.lines().last().unwrap();
    assert!(last.starts_with("error: ") && last.contains("missing.xyz"), "{err}");
}

#[test]
fn usage_errors_exit_2_with_one_line() {
    for args in [
        vec!["frobnicate"],
        vec!["denoise", "--in", "a.xyz"],
        vec!["add-noise", "--in", "a.xyz", "--out", "b.xyz", "--kind", "pink"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.starts_with("error: "), "{err}");
    }
}

#[test]
fn contradictory_and_unknown_config_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let input = repo("data/sphere.xyz");
    let out_path = dir.path().join("o.xyz");
    let out = run(&["denoise", "--in", p(&input), "--out", p(&out_path), "--classical", "--alpha", "0.5"]);
    assert_eq!(out.status.code(), Some(2));

    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[ascent]\nmomentum = 0.9\n").unwrap();
    let out = run(&["denoise", "--in", p(&input), "--out", p(&out_path), "--config", p(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("momentum"));
    assert!(!out_path.exists());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = repo("data/sphere.xyz");
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "knn = 6\n[ascent]\nsteps = 3\nalpha = 0.5\n").unwrap();
    let a = dir.path().join("a.xyz");
    let b = dir.path().join("b.xyz");
    let out = run(&["denoise", "--in", p(&input), "--out", p(&a), "--config", p(&cfg), "--steps", "2"]);
    assert!(out.status.success());
    let log = String::from_utf8(out.stderr).unwrap();
    assert!(log.contains(r#""knn":6"#) && log.contains(r#""steps":2"#) && log.contains(r#""alpha":0.5"#), "{log}");
    ok(&["denoise", "--in", p(&input), "--out", p(&b), "--knn", "6", "--steps", "2", "--alpha", "0.5"]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn seeded_outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let clean = repo("data/sphere.xyz");
    let mesh = repo("data/sphere.off");
    for tag in ["a", "b"] {
        let noisy = d.join(format!("noisy_{tag}.xyz"));
        ok(&["add-noise", "--in", p(&clean), "--out", p(&noisy), "--kind", "laplace", "--level", "0.01", "--seed", "5"]);
        ok(&["denoise", "--in", p(&noisy), "--out", p(&d.join(format!("out_{tag}.xyz")))]);
        ok(&[
            "train-field", "--clean", p(&mesh), "--noisy", p(&noisy), "--out", p(&d.join(format!("m_{tag}.bin"))),
            "--epochs", "1", "--hidden", "6", "--samples-per-anchor", "2", "--seed", "3",
        ]);
        ok(&["sample", "--shape", "torus", "--n", "300", "--seed", "5", "--out", p(&d.join(format!("s_{tag}.xyz")))]);
    }
    for stem in ["noisy_", "out_", "m_", "s_"] {
        let ext = if stem == "m_" { "bin" } else { "xyz" };
        let a = fs::read(d.join(format!("{stem}a.{ext}"))).unwrap();
        let b = fs::read(d.join(format!("{stem}b.{ext}"))).unwrap();
        assert_eq!(a, b, "{stem}");
    }
    let other = d.join("noisy_c.xyz");
    ok(&["add-noise", "--in", p(&clean), "--out", p(&other), "--kind", "laplace", "--level", "0.01", "--seed", "6"]);
    assert_ne!(fs::read(&other).unwrap(), fs::read(d.join("noisy_a.xyz")).unwrap());
}

#[test]
fn learned_field_round_trip_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let clean = repo("data/sphere.xyz");
    let mesh = repo("data/sphere.off");
    let noisy = d.join("noisy.xyz");
    let model = d.join("model.bin");
    let log = d.join("train.jsonl");
    ok(&["add-noise", "--in", p(&clean), "--out", p(&noisy), "--seed", "1"]);
    ok(&[
        "train-field", "--clean", p(&clean), "--noisy", p(&noisy), "--out", p(&model), "--epochs", "2",
        "--hidden", "8", "--log", p(&log),
    ]);
    assert_eq!(fs::read_to_string(&log).unwrap().lines().count(), 2);
    let field = format!("learned:{}", p(&model));
    ok(&["denoise", "--in", p(&noisy), "--out", p(&d.join("out.xyz")), "--field", &field]);
    let oracle = format!("oracle:{}", p(&mesh));
    ok(&["denoise", "--in", p(&noisy), "--out", p(&d.join("out2.xyz")), "--field", &oracle]);

    fs::write(d.join("bad.bin"), b"not a model").unwrap();
    let bad = format!("learned:{}", p(&d.join("bad.bin")));
    let out = run(&["denoise", "--in", p(&noisy), "--out", p(&d.join("o3.xyz")), "--field", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.bin"));
}

fn strip_time(csv: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let t = header.iter().position(|h| *h == "time_ms").unwrap();
    lines
        .map(|l| {
            let mut cols: Vec<&str> = l.split(',').collect();
            cols.remove(t);
            cols.join(",")
        })
        .collect()
}

#[test]
fn benchmark_is_reproducible_and_records_failures() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let plan = d.join("plan.toml");
    fs::write(
        &plan,
        "n_points = 400\nshapes = [\"sphere\", \"cube\"]\nfields = [\"mls\", \"oracle\", \"learned:nowhere.bin\"]\nsteps = [3]\n",
    )
    .unwrap();
    for tag in ["a", "b"] {
        ok(&["benchmark", "--plan", p(&plan), "--out", p(&d.join(tag))]);
    }
    let a = fs::read_to_string(d.join("a/results.csv")).unwrap();
    let b = fs::read_to_string(d.join("b/results.csv")).unwrap();
    assert_eq!(strip_time(&a), strip_time(&b));
    assert_eq!(strip_time(&a).len(), 2 * 3 * 2);

    let json: Value = serde_json::from_str(&fs::read_to_string(d.join("a/results.json")).unwrap()).unwrap();
    assert_eq!(json["plan_hash"].as_str().unwrap().len(), 64);
    let rows = json["rows"].as_array().unwrap();
    for row in rows {
        let learned = row["field"].as_str().unwrap().starts_with("learned");
        assert_eq!(row["status"] == "failed", learned);
        if learned {
            assert!(row["error"].as_str().unwrap().contains("nowhere.bin"));
        } else {
            let raw = row["cd_after"].as_f64().unwrap();
            let shown = row["cd_after_x1e4"].as_f64().unwrap();
            assert!((shown - raw * 1e4).abs() <= 1e-12 * shown.abs());
        }
    }

    let out = run(&["benchmark", "--plan", p(&d.join("none.toml")), "--out", p(&d.join("c"))]);
    assert_eq!(out.status.code(), Some(2));
}

/// Quickstart pipeline from the README against committed golden numbers.
/// Regenerate with `make golden` (sets UPDATE_GOLDEN=1).
#[test]
fn quickstart_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let clean = repo("data/sphere.xyz");
    let mesh = repo("data/sphere.off");
    let noisy = d.join("noisy.xyz");
    let denoised = d.join("denoised.xyz");
    ok(&["add-noise", "--in", p(&clean), "--out", p(&noisy), "--kind", "gaussian", "--level", "0.02", "--seed", "42"]);
    ok(&["denoise", "--in", p(&noisy), "--out", p(&denoised), "--field", "mls"]);
    let mut metrics = serde_json::Map::new();
    for (name, cloud) in [("noisy", &noisy), ("denoised", &denoised)] {
        let report = d.join(format!("{name}.json"));
        ok(&["metric", "--denoised", p(cloud), "--clean", p(&clean), "--mesh", p(&mesh), "--json", p(&report)]);
        let r: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
        metrics.insert(format!("{name}_cd"), r["cd"].clone());
        metrics.insert(format!("{name}_p2m"), r["p2m"].clone());
    }
    let golden_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/quickstart.json");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::create_dir_all(golden_path.parent().unwrap()).unwrap();
        let text = serde_json::to_string_pretty(&Value::Object(metrics.clone())).unwrap();
        fs::write(&golden_path, text + "\n").unwrap();
    }
    let golden: Value = serde_json::from_str(&fs::read_to_string(&golden_path).unwrap()).unwrap();
    for (key, value) in &metrics {
        let got = value.as_f64().unwrap();
        let want = golden[key].as_f64().unwrap();
        assert!((got - want).abs() <= 1e-9, "{key}: {got} vs golden {want}");
    }
}
