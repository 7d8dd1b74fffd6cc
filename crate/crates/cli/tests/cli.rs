//! End-to-end runs of the `bubblelab` binary against the shipped configs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run_bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bubblelab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_config(config: &Path, out: &Path) -> Output {
    run_bin(&[
        "run",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).expect("report exists")).expect("valid JSON")
}

#[test]
fn shipped_configs_run_clean() {
    let expected = [
        ("textbook", "Bubbly"),
        ("two_sector", "Bubbly"),
        ("ces", "Bubbly"),
        ("wilson", "Bubbly"),
        ("crra", "Bubbly"),
        ("olg_generic", "Bubbly"),
        ("diamond", "Bubbly"),
        ("bewley_invest", "Bubbly"),
        ("bewley_pref", "Bubbly"),
    ];
    let dir = tempfile::tempdir().unwrap();
    for (name, label) in expected {
        let out = run_config(&configs_dir().join(format!("{name}.toml")), dir.path());
        assert!(
            out.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let report = read_json(&dir.path().join(format!("{name}.verdict.json")));
        assert_eq!(report["schema"], 1);
        assert_eq!(report["model"], name);
        assert_eq!(report["verdict"]["label"], label, "{name}");
        assert!(report["necessity"]["holds"].as_bool().unwrap(), "{name}");
        // The path table exists and has a header plus horizon rows.
        let csv = fs::read_to_string(dir.path().join(format!("{name}.csv"))).unwrap();
        assert!(csv.lines().count() > 10, "{name} CSV too short");
    }
}

#[test]
fn wilson_report_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(&configs_dir().join("wilson.toml"), dir.path());
    assert!(out.status.success());
    let report = read_json(&dir.path().join("wilson.verdict.json"));
    assert_eq!(report["verdict"]["label"], "Bubbly");
    let relevance = report["verdict"]["relevance"].as_f64().unwrap();
    assert!((relevance - 1.0).abs() <= 1e-9, "relevance {relevance}");
}

#[test]
fn ces_knife_edge_label() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("ces_unit.toml");
    fs::write(
        &config,
        r#"
model = "ces"
horizon = 50

[params]
sigma = 1.0
alpha = 0.3
beta = 0.5
g_k = 1.05
g_l = 1.0
k0 = 1.0
l0 = 1.0
"#,
    )
    .unwrap();
    let out = run_config(&config, dir.path());
    assert!(out.status.success());
    let report = read_json(&dir.path().join("ces_unit.verdict.json"));
    assert_eq!(report["verdict"]["label"], "Knife-edge");
    assert!(report["necessity"]["borderline"].as_bool().unwrap());
}

#[test]
fn diamond_delta_zero_exits_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("diamond_delta0.toml");
    fs::write(
        &config,
        r#"
model = "diamond"
horizon = 60

[params]
a_tfp = 1.0
alpha = 0.3
delta = 0.0
beta = 0.5
k0 = 0.2
d0 = 0.001
g_d = 0.9
"#,
    )
    .unwrap();
    let out = run_config(&config, dir.path());
    assert_eq!(out.status.code(), Some(2));
    let report = read_json(&dir.path().join("diamond_delta0.verdict.json"));
    assert!(!report["necessity"]["holds"].as_bool().unwrap());
    let diagnostics = report["diagnostics"].as_array().unwrap();
    assert!(
        diagnostics
            .iter()
            .any(|d| d.as_str().unwrap().contains("NecessityFails")),
        "{diagnostics:?}"
    );
}

#[test]
fn bad_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("broken.toml");
    fs::write(&config, "model = \"textbook\"\n").unwrap();
    let out = run_config(&config, dir.path());
    assert_eq!(out.status.code(), Some(1));
    let missing = dir.path().join("nope.toml");
    let out = run_config(&missing, dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reruns_are_byte_identical() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for name in ["diamond", "bewley_pref"] {
        let config = configs_dir().join(format!("{name}.toml"));
        assert!(run_config(&config, dir_a.path()).status.success());
        assert!(run_config(&config, dir_b.path()).status.success());
        for suffix in ["csv", "verdict.json"] {
            let a = fs::read(dir_a.path().join(format!("{name}.{suffix}"))).unwrap();
            let b = fs::read(dir_b.path().join(format!("{name}.{suffix}"))).unwrap();
            assert_eq!(a, b, "{name}.{suffix} differs between reruns");
        }
    }
}

#[test]
fn sweep_persistence_is_monotone_in_rho() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_bin(&[
        "sweep",
        configs_dir().join("bewley_invest.toml").to_str().unwrap(),
        "--param",
        "tau",
        "--grid",
        "0,0.25,0.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("bewley_invest.sweep.csv")).unwrap();
    let rhos: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert_eq!(rhos.len(), 3);
    assert!(rhos.windows(2).all(|w| w[1] >= w[0]), "{rhos:?}");
    // Persistence oracle at tau = 0.5: 0.96 * 1.5 * 0.95.
    assert!((rhos[2] - 1.368).abs() <= 1e-9);
}

#[test]
fn sweep_crra_flips_at_condition_boundary() {
    // For gamma = 1 the necessity boundary is G w = beta, i.e. w = 0.47619.
    let dir = tempfile::tempdir().unwrap();
    let out = run_bin(&[
        "sweep",
        configs_dir().join("crra.toml").to_str().unwrap(),
        "--param",
        "w",
        "--grid",
        "0.3,0.45,0.5,0.6",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("crra.sweep.csv")).unwrap();
    let holds: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(5).unwrap())
        .collect();
    assert_eq!(holds, ["true", "true", "false", "false"]);
}

#[test]
fn sweep_two_sector_regime_rows_fail_loudly() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_bin(&[
        "sweep",
        configs_dir().join("two_sector.toml").to_str().unwrap(),
        "--param",
        "g2",
        "--grid",
        "0.95,1.0,1.05,1.1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("two_sector.sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert!(rows[0].contains("Bubbly") && rows[0].ends_with("ok"));
    assert!(rows[1].contains("Bubbly") && rows[1].ends_with("ok"));
    for failing in &rows[2..] {
        assert!(failing.contains("failed:"), "{failing}");
        assert!(failing.to_lowercase().contains("g1 > g2"), "{failing}");
    }
    // Unknown parameter is a configuration error.
    let out = run_bin(&[
        "sweep",
        configs_dir().join("two_sector.toml").to_str().unwrap(),
        "--param",
        "nonexistent",
        "--grid",
        "1,2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}
