//! End-to-end tests of the `qcilab` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn qcilab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcilab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn admissible_exit_codes() {
    let case1 = qcilab(&["admissible", "--config", s(&config("case1_equator.json"))]);
    assert_eq!(code(&case1), 3, "{}", stderr(&case1));
    let report: serde_json::Value = serde_json::from_str(&stdout(&case1)).unwrap();
    assert_eq!(report["verdict"], "not-admissible");

    let case2 = qcilab(&["admissible", "--config", s(&config("case2_longitude.json"))]);
    assert_eq!(code(&case2), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&case2)).unwrap();
    assert_eq!(report["verdict"], "admissible");
    assert!(report["min_derivative"].as_f64().unwrap() >= 0.1);

    assert_eq!(code(&qcilab(&["admissible", "--config", s(&config("straddle.json"))])), 3);
    assert_eq!(code(&qcilab(&["admissible", "--config", s(&config("case1_dsl.json"))])), 3);
    assert_eq!(code(&qcilab(&["admissible", "--config", s(&config("case2_dsl.json"))])), 0);
}

#[test]
fn empty_band_and_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write_config(
        dir.path(),
        "empty.json",
        r#"{"geodesic": {"kind": "longitude", "range": [0.3, 0.8]}, "energies": {"e1": 1.0, "e2": 5.0, "epsilon": 0.05}}"#,
    );
    assert_eq!(code(&qcilab(&["admissible", "--config", s(&empty)])), 4);

    let bad_symbol = write_config(
        dir.path(),
        "bad.json",
        r#"{"p1": "sin(t", "geodesic": {"kind": "longitude", "range": [0.3, 0.8]}, "energies": {"e1": 1.0, "e2": 0.5}}"#,
    );
    let out = qcilab(&["admissible", "--config", s(&bad_symbol)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("column 6"), "{}", stderr(&out));
    assert!(stdout(&out).is_empty());

    let unknown = write_config(dir.path(), "unknown.json", r#"{"geodesics": {}}"#);
    let out = qcilab(&["admissible", "--config", s(&unknown)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unknown field"), "{}", stderr(&out));

    assert_eq!(code(&qcilab(&["admissible"])), 2);
    assert_eq!(code(&qcilab(&["admissible", "--config", "/nonexistent/config.json"])), 2);
    assert_eq!(code(&qcilab(&["frobnicate"])), 2);
    let no_energies = write_config(dir.path(), "ne.json", r#"{"geodesic": {"kind": "longitude", "range": [0.3, 0.8]}}"#);
    assert_eq!(code(&qcilab(&["admissible", "--config", s(&no_energies)])), 2);
}

#[test]
fn eigen_table_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("eigen_sphere.json");
    let args = ["eigen", "--config", s(&cfg), "--out", s(dir.path())];
    let first = qcilab(&args);
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    let lambdas: Vec<f64> = stdout(&first)
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("index"))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(lambdas.len(), 5);
    for (got, want) in lambdas.iter().zip([0.0, 2.0, 6.0, 12.0, 20.0]) {
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
    assert!(!stderr(&first).contains("cache hit"));

    let second = qcilab(&args);
    assert_eq!(code(&second), 0);
    assert_eq!(first.stdout, second.stdout);
    assert!(stderr(&second).contains("cache hit"));
    assert!(dir.path().join("cache").is_dir());

    let coarse = write_config(dir.path(), "coarse.json", r#"{"eigen": {"k": 50, "count": 2, "n": 100}}"#);
    assert_eq!(code(&qcilab(&["eigen", "--config", s(&coarse), "--out", s(dir.path())])), 2);
    let coarse = write_config(dir.path(), "coarse2.json", r#"{"eigen": {"k": 50, "count": 2, "n": 512}}"#);
    let out = qcilab(&["eigen", "--config", s(&coarse), "--out", s(dir.path())]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("N >= 1000"), "{}", stderr(&out));
}

fn summary_slope(out: &Output) -> f64 {
    let text = stdout(out);
    let slope = text
        .trim()
        .split(' ')
        .find_map(|f| f.strip_prefix("slope="))
        .expect("slope in summary");
    slope.parse().unwrap()
}

#[test]
fn sweeps_and_plotdata() {
    let dir = tempfile::tempdir().unwrap();
    let out = qcilab(&["sweep", "--config", s(&config("tesseral.json")), "--out", s(dir.path()), "--seed", "1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains(" R2="));
    assert!((summary_slope(&out) - 0.5).abs() < 0.15);
    let csv = dir.path().join("tesseral.csv");
    assert!(fs::read_to_string(&csv).unwrap().starts_with("k,l,h,abs_I,re_I,im_I\n"));
    assert!(dir.path().join("tesseral.json").exists());
    assert!(fs::read_dir(dir.path()).unwrap().all(|e| !e.unwrap().file_name().to_string_lossy().ends_with(".tmp")));

    let plot = qcilab(&["plotdata", s(&csv)]);
    assert_eq!(code(&plot), 0);
    let text = stdout(&plot);
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 5);
    assert!(text.lines().next().unwrap().starts_with('#'));
    assert_eq!(stdout(&qcilab(&["plotdata", s(&csv)])), text);

    let zonal = qcilab(&["sweep", "--config", s(&config("zonal.json")), "--out", s(dir.path())]);
    assert_eq!(code(&zonal), 0, "{}", stderr(&zonal));
    assert!(summary_slope(&zonal).abs() < 0.05);

    let transition = qcilab(&["sweep", "--config", s(&config("transition.json")), "--out", s(dir.path())]);
    assert_eq!(code(&transition), 0);
    let slope = summary_slope(&transition);
    assert!((-0.25..=-0.08).contains(&slope), "{slope}");
}

#[test]
fn sweep_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = qcilab(&["sweep", "--config", s(&config("tesseral_allowed.json")), "--out", s(dir.path()), "--threads", "2"]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    for name in ["tesseral_allowed.csv", "tesseral_allowed.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
    }
}

#[test]
fn sweep_fit_errors() {
    let dir = tempfile::tempdir().unwrap();
    let single = write_config(
        dir.path(),
        "single.json",
        r#"{"sweep": {"experiment": "tesseral-caustic", "k_range": {"start": 50, "end": 50}}}"#,
    );
    let out = qcilab(&["sweep", "--config", s(&single), "--out", s(dir.path())]);
    assert_eq!(code(&out), 5, "{}", stderr(&out));
    let odd = write_config(dir.path(), "odd.json", r#"{"sweep": {"experiment": "zonal-equator", "k_list": [100, 101, 102]}}"#);
    assert_eq!(code(&qcilab(&["sweep", "--config", s(&odd), "--out", s(dir.path())])), 2);
    let deep = write_config(
        dir.path(),
        "deep.json",
        r#"{"sweep": {"experiment": "tesseral-caustic", "k_list": [25, 50, 100], "delta0": 0.9}}"#,
    );
    assert_eq!(code(&qcilab(&["sweep", "--config", s(&deep), "--out", s(dir.path())])), 2);
}

#[test]
fn plotdata_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    fs::write(&csv, "k,l,h,abs_I,re_I,im_I\n").unwrap();
    fs::write(
        dir.path().join("empty.json"),
        r#"{"experiment": "custom", "slope": null, "intercept_logC": null, "r_squared": null, "delta0": null,
            "quadrature": {"nodes_per_panel": 12, "panels_per_wavelength": 4.0, "max_panels": 1000000}}"#,
    )
    .unwrap();
    let out = qcilab(&["plotdata", s(&csv)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).lines().all(|l| l.starts_with('#')));

    let plots = dir.path().join("plots");
    let out = qcilab(&["plotdata", s(&csv), "--out", s(&plots)]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read_to_string(plots.join("empty.dat")).unwrap(), stdout(&out));

    fs::write(&csv, "k,l,h,abs_I,re_I,im_I\n25,50,0.0198,0.0194,0.0194,0\n50,100,0.0099\n").unwrap();
    let out = qcilab(&["plotdata", s(&csv)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    assert_eq!(code(&qcilab(&["plotdata", s(&dir.path().join("missing.csv"))])), 2);
}

#[test]
fn integrate_reports_value() {
    let out = qcilab(&["integrate", "--config", s(&config("integrate_tesseral.json"))]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let abs = v["abs"].as_f64().unwrap();
    assert!(abs > 0.0 && abs < 0.1);
    assert!(v["error_estimate"].as_f64().unwrap() < 1e-8 * abs);
}
