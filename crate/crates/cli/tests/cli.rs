use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn wavegate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavegate"))
        .args(args)
        .env_remove("WAVEGATE_THREADS")
        .output()
        .expect("spawn wavegate")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn last_population(dir: &Path) -> (u64, u64) {
    let csv = fs::read_to_string(dir.join("population.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    let (t, n) = last.split_once(',').unwrap();
    (t.parse().unwrap(), n.parse().unwrap())
}

fn run_pattern(rows: &str, steps: &str) -> (tempfile::TempDir, u64) {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("seed.cells");
    fs::write(&input, rows).unwrap();
    let out = dir.path().join("out");
    ok(&wavegate(&[
        "run",
        "--in",
        input.to_str().unwrap(),
        "--width",
        "701",
        "--height",
        "701",
        "--steps",
        steps,
        "--out",
        out.to_str().unwrap(),
    ]));
    let (_, n) = last_population(&out);
    (dir, n)
}

#[test]
fn block_run_reaches_104000() {
    let (_dir, n) = run_pattern("OO\nOO\n", "320");
    assert_eq!(n, 104_000);
}

#[test]
fn l_pentomino_run_reaches_95048() {
    let (_dir, n) = run_pattern("O...\nOOOO\n", "300");
    assert_eq!(n, 95_048);
}

#[test]
fn zero_steps_echoes_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("seed.rle");
    fs::write(&input, "x = 4, y = 3, rule = B2/S2345\no2bo$4b$b2o!\n").unwrap();
    let out = dir.path().join("out");
    ok(&wavegate(&[
        "run",
        "--in",
        input.to_str().unwrap(),
        "--steps",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]));
    let before = wavegate::rle::parse_any(&fs::read_to_string(&input).unwrap()).unwrap();
    let after =
        wavegate::rle::parse_any(&fs::read_to_string(out.join("final.rle")).unwrap()).unwrap();
    assert_eq!(before.pattern, after.pattern);
    assert_eq!(last_population(&out), (0, 4));
}

#[test]
fn catalog_writes_five_primitives() {
    let dir = tempfile::tempdir().unwrap();
    ok(&wavegate(&[
        "catalog",
        "--out",
        dir.path().to_str().unwrap(),
    ]));
    for name in [
        "still_life",
        "blinker",
        "oscillator",
        "particle",
        "indestructible",
    ] {
        let rle = fs::read_to_string(dir.path().join(format!("{name}.rle"))).unwrap();
        assert!(rle.starts_with(&format!("#N {name}\n")), "{rle}");
    }
    let metrics: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("metrics.json")).unwrap())
            .unwrap();
    assert_eq!(metrics["particle"]["speed"], 1.0);
    assert_eq!(metrics["particle"]["mass"], 4);
    assert_eq!(metrics["indestructible"]["mass"], 20);
}

#[test]
fn catalog_names_the_missing_particle() {
    let dir = tempfile::tempdir().unwrap();
    let out = wavegate(&[
        "--rule",
        "B3/S23",
        "catalog",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("particle"), "{err}");
    assert!(!dir.path().join("metrics.json").exists());
}

#[test]
fn meanfield_reports_three_fixed_points() {
    let json: Value = serde_json::from_str(&ok(&wavegate(&["meanfield"]))).unwrap();
    let fps: Vec<(f64, String)> = json["fixed_points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| {
            (
                f["value"].as_f64().unwrap(),
                f["stability"].as_str().unwrap().to_string(),
            )
        })
        .collect();
    assert_eq!(fps.len(), 3, "{fps:?}");
    assert!(fps[0].0.abs() < 1e-9 && fps[0].1 == "stable");
    assert!((fps[1].0 - 0.0476).abs() < 1e-3 && fps[1].1 == "unstable");
    assert!((fps[2].0 - 0.468).abs() < 1e-3 && fps[2].1 == "stable");
}

#[test]
fn spectrum_reports_a_steep_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("spectrum.csv");
    let json: Value = serde_json::from_str(&ok(&wavegate(&[
        "spectrum",
        "--seed",
        "0",
        "--steps",
        "128",
        "--out",
        csv.to_str().unwrap(),
    ])))
    .unwrap();
    let exponent = json["fit"]["exponent"].as_f64().unwrap();
    assert!((-3.0..=-1.0).contains(&exponent), "exponent {exponent}");
    // header plus bins 0..=T/2
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 1 + 65);
}

#[test]
fn random_runs_need_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = wavegate(&[
        "run",
        "--width",
        "32",
        "--height",
        "32",
        "--density",
        "0.1",
        "--steps",
        "4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
}

#[test]
fn runs_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_wavegate"))
            .args([
                "run",
                "--width",
                "300",
                "--height",
                "300",
                "--density",
                "0.04",
                "--seed",
                "7",
                "--steps",
                "60",
                "--snapshot-every",
                "20",
                "--out",
                out.to_str().unwrap(),
            ])
            .env("WAVEGATE_THREADS", threads)
            .status()
            .unwrap();
        assert!(status.success());
        out
    };
    let a = run("1", "a");
    let b = run("4", "b");
    let mut names: Vec<_> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 2 + 4, "{names:?}");
    for name in names {
        assert_eq!(
            fs::read(a.join(&name)).unwrap(),
            fs::read(b.join(&name)).unwrap(),
            "{name:?}"
        );
    }
}

#[test]
fn w3_truth_table_passes_from_the_cached_calibration() {
    let stdout = ok(&wavegate(&[
        "gate",
        "truthtable",
        "--kind",
        "w3",
        "--in",
        fixture("w3.json").to_str().unwrap(),
    ]));
    assert!(stdout.contains("8/8 rows pass"), "{stdout}");
    assert_eq!(
        stdout
            .lines()
            .filter(|l| l.ends_with(" pass") && !l.contains('/'))
            .count(),
        8
    );
}

#[test]
fn built_layout_evaluates_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let layout = dir.path().join("w3.json");
    ok(&wavegate(&[
        "gate",
        "build",
        "--kind",
        "w3",
        "--in",
        fixture("w3.json").to_str().unwrap(),
        "--out",
        layout.to_str().unwrap(),
    ]));
    for (bits, want) in [("101", 1), ("000", 0), ("110", 1), ("001", 0)] {
        let json: Value = serde_json::from_str(&ok(&wavegate(&[
            "gate",
            "eval",
            "--in",
            layout.to_str().unwrap(),
            "--bits",
            bits,
        ])))
        .unwrap();
        assert_eq!(json["output"]["value"], want, "{bits}: {json}");
    }
}

#[test]
fn gate_build_without_matching_calibration_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = wavegate(&[
        "gate",
        "build",
        "--kind",
        "w5",
        "--in",
        fixture("w3.json").to_str().unwrap(),
        "--out",
        dir.path().join("w5.json").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not calibrated"));
}

#[test]
fn calibrating_without_a_junction_names_the_gap() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ["w5", "cascade3"] {
        let out = wavegate(&[
            "gate",
            "calibrate",
            "--kind",
            kind,
            "--in",
            fixture("w3.json").to_str().unwrap(),
            "--out",
            dir.path().join("c.json").to_str().unwrap(),
        ]);
        assert!(!out.status.success());
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(&format!("no {kind} junction")), "{err}");
    }
}
