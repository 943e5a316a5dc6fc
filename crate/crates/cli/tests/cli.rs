use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn eulerlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eulerlab"))
        .args(args)
        .env_remove("EULERLAB_OUT")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != "manifest.json")
        .map(|e| {
            (
                e.file_name().into_string().unwrap(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn usage_errors_exit_two() {
    let out = eulerlab(&[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(
        eulerlab(&["spectrum", "--bogus", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        eulerlab(&["spectrum", "--trunc", "many"]).status.code(),
        Some(2)
    );
    assert_eq!(eulerlab(&["--help"]).status.code(), Some(0));
}

#[test]
fn spectrum_benchmark_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = eulerlab(&[
        "--out", d, "spectrum", "--khat", "-3,-2", "--p", "1,1", "--gamma", "2,0", "--trunc", "50",
        "--refine",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rep = json(&dir.path().join("spectrum.json"));
    let hit = rep["refined"].as_array().unwrap().iter().any(|r| {
        let l = &r["lambda_normalized"];
        (l[0].as_f64().unwrap() - 0.24822302478255).abs() < 1e-7
            && (l[1].as_f64().unwrap() - 0.35172076526520).abs() < 1e-7
    });
    assert!(hit, "{rep}");
    assert_eq!(rep["count_nonimaginary"], 4);
    let manifest = json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["subcommand"], "spectrum");
    assert_eq!(manifest["config"]["khat"], "-3,-2");
    assert_eq!(manifest["exit_code"], 0);
    let csv = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(csv.starts_with("index,re,im,re_normalized,im_normalized\n"));
    assert_eq!(csv.lines().count(), 1 + 101);
}

#[test]
fn lax_jacobi_battery() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = eulerlab(&[
        "--out",
        d,
        "lax-check",
        "--case",
        "jacobi",
        "--resolution",
        "64",
        "--trials",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rep = json(&dir.path().join("lax_report.json"));
    assert!(rep["measure"].as_f64().unwrap() < 1e-10);
    assert_eq!(rep["pass"], true);
}

#[test]
fn precondition_and_numeric_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = eulerlab(&["--out", d, "spectrum", "--p", "0,0"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&dir.path().join("manifest.json"))["exit_code"], 4);
    let out = eulerlab(&[
        "--out",
        d,
        "nls-saddle",
        "--omega",
        "3",
        "--alpha",
        "1",
        "--beta",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(4));
    let out = eulerlab(&[
        "--out",
        d,
        "euler-sim",
        "--enstrophy",
        "1e8",
        "--dt",
        "1",
        "--steps",
        "50",
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-finite"));
}

#[test]
fn identical_seed_gives_identical_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let d = dir.path().to_str().unwrap();
        let out = eulerlab(&[
            "--out",
            d,
            "--seed",
            "9",
            "euler-sim",
            "--b",
            "4",
            "--steps",
            "300",
            "--sample-every",
            "10",
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(outputs(a.path()), outputs(b.path()));
    let c = tempfile::tempdir().unwrap();
    let d = c.path().to_str().unwrap();
    eulerlab(&[
        "--out",
        d,
        "--seed",
        "10",
        "euler-sim",
        "--b",
        "4",
        "--steps",
        "300",
        "--sample-every",
        "10",
    ]);
    assert_ne!(outputs(a.path()), outputs(c.path()));
}

#[test]
fn manifest_round_trip_reproduces_outputs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let d = a.path().to_str().unwrap();
    let out = eulerlab(&[
        "--out",
        d,
        "--seed",
        "5",
        "shadow",
        "--map",
        "linear-test",
        "--delta",
        "1e-4",
        "--length",
        "12",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let manifest = a.path().join("manifest.json");
    let out = eulerlab(&[
        "--out",
        b.path().to_str().unwrap(),
        "shadow",
        "--config",
        manifest.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(outputs(a.path()), outputs(b.path()));
    assert_eq!(
        json(&manifest)["config"],
        json(&b.path().join("manifest.json"))["config"]
    );
}

#[test]
fn config_file_and_environment_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(
        &conf,
        "# dashed line at rest\ninit = fixed-point\nsteps = 20\nsample_every = 5\n",
    )
    .unwrap();
    let out_dir = dir.path().join("env-out");
    let out = Command::new(env!("CARGO_BIN_EXE_eulerlab"))
        .args([
            "dashed-line",
            "--config",
            conf.to_str().unwrap(),
            "--steps",
            "40",
        ])
        .env("EULERLAB_OUT", &out_dir)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let manifest = json(&out_dir.join("manifest.json"));
    assert_eq!(manifest["config"]["steps"], 40);
    assert_eq!(manifest["config"]["init"], "fixed-point");
    let csv = std::fs::read_to_string(out_dir.join("dashed_trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 9);

    std::fs::write(&conf, "stepz = 3\n").unwrap();
    let out = eulerlab(&["dashed-line", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn subcommands_write_their_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let runs: [(&[&str], &str); 5] = [
        (
            &["nls-sim", "--steps", "2000", "--sample-every", "10"],
            "nls_symbols.json",
        ),
        (&["nls-saddle"], "nls_saddle.json"),
        (&["darboux", "--resolution", "32"], "darboux_report.json"),
        (&["shadow", "--map", "duffing"], "shadow_report.json"),
        (
            &["lax-check", "--case", "beltrami", "--resolution", "16"],
            "lax_report.json",
        ),
    ];
    for (args, file) in runs {
        let mut full = vec!["--out", d];
        full.extend_from_slice(args);
        let out = eulerlab(&full);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(dir.path().join(file).exists(), "{file}");
    }
    let saddle = json(&dir.path().join("nls_saddle.json"));
    assert_eq!(saddle["continuum"]["silnikov_all"], true);
    let shadow = json(&dir.path().join("shadow_report.json"));
    assert!(shadow["shadow_defect"].as_f64().unwrap() < 1e-10);
    let leftovers = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .file_name()
                .to_string_lossy()
                .starts_with(".tmp")
        })
        .count();
    assert_eq!(leftovers, 0);
}
