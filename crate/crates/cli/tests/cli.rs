use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_spillover"))
        .args(args)
        .output()
        .expect("binary runs");
    Output {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

/// Compares against the stored output; `UPDATE_GOLDEN=1` rewrites it.
fn check_golden(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(actual, expected, "output differs from {}", name);
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{},", key)))
        .unwrap_or_else(|| panic!("no `{}` line", key))
        .parse()
        .unwrap()
}

#[test]
fn analyze_four_units() {
    let out = run(&["analyze", "--data", &fixture("data4.csv"), "--design", &fixture("complete4.json")]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    // HT: (3 + 5)/(4 · 0.5) - (1 + 2)/(4 · 0.5) = 2.5; V_ber = (36 + 4 + 100 + 16)/16.
    assert_eq!(field(&out.stdout, "ht"), 2.5);
    assert_eq!(field(&out.stdout, "hajek"), 2.5);
    assert_eq!(field(&out.stdout, "v_ber"), 9.75);
    assert!(out.stdout.contains("warning,"));
    let row = out.stdout.lines().last().unwrap();
    let cols: Vec<f64> = row.split(',').skip(1).filter_map(|c| c.parse().ok()).collect();
    let half = 195f64.sqrt();
    assert!((cols[cols.len() - 2] - (2.5 - half)).abs() < 1e-12);
    check_golden("analyze_complete4.txt", &out.stdout);
}

#[test]
fn analyze_bernoulli_has_no_warning() {
    let out = run(&["analyze", "--data", &fixture("data4.csv"), "--design", &fixture("bernoulli4.json")]);
    assert_eq!(out.code, 0);
    assert!(!out.stdout.contains("warning"));
}

#[test]
fn analyze_sensitivity_sweep() {
    let out = run(&[
        "analyze",
        "--data",
        &fixture("data4.csv"),
        "--design",
        &fixture("bernoulli4.json"),
        "--factors",
        "1,5,25",
    ]);
    assert_eq!(out.code, 0);
    let rows: Vec<&str> = out.stdout.lines().skip_while(|l| !l.starts_with("estimator,")).skip(1).collect();
    assert_eq!(rows.len(), 3);
    let widths: Vec<f64> = rows
        .iter()
        .map(|r| {
            let c: Vec<f64> = r.split(',').rev().take(2).map(|v| v.parse().unwrap()).collect();
            c[0] - c[1]
        })
        .collect();
    assert!((widths[1] / widths[0] - 5f64.sqrt()).abs() < 1e-12);
    assert!((widths[2] / widths[0] - 5.0).abs() < 1e-12);
    check_golden("analyze_sweep.txt", &out.stdout);
}

#[test]
fn analyze_sr_without_graph_is_a_config_error() {
    let out = run(&[
        "analyze",
        "--data",
        &fixture("data4.csv"),
        "--design",
        &fixture("bernoulli4.json"),
        "--variance-kind",
        "sr",
    ]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("inflation factor requires graph or explicit factor"));
}

#[test]
fn analyze_sr_with_graph() {
    let out = run(&[
        "analyze",
        "--data",
        &fixture("data4.csv"),
        "--design",
        &fixture("bernoulli4.json"),
        "--variance-kind",
        "sr",
        "--graph",
        &fixture("star4.csv"),
    ]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let row: Vec<&str> = out.stdout.lines().last().unwrap().split(',').collect();
    assert_eq!(&row[..4], ["ht", "2.5", "9.75", "sr"]);
    // Largest eigenvalue of the all-ones 3x3 block.
    let factor: f64 = row[4].parse().unwrap();
    assert!((factor - 3.0).abs() < 1e-9);
}

#[test]
fn analyze_degenerate_arm() {
    let out = run(&["analyze", "--data", &fixture("all_treated4.csv"), "--design", &fixture("bernoulli4.json")]);
    assert_eq!(out.code, 4);
    assert!(out.stderr.contains("hajek"));
}

#[test]
fn metrics_identity_and_star() {
    let out = run(&["metrics", "--graph", &fixture("identity4.csv")]);
    assert_eq!(out.code, 0);
    assert_eq!(field(&out.stdout, "d_avg"), 1.0);
    assert_eq!(field(&out.stdout, "d_max"), 1.0);
    assert!((field(&out.stdout, "lambda1") - 1.0).abs() < 1e-9);

    let out = run(&["metrics", "--graph", &fixture("star4.csv"), "--n", "4", "--design", &fixture("paired4.json")]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    // Units 1-3 share unit 1's treatment, unit 4 stands alone.
    assert_eq!(field(&out.stdout, "d_avg"), 2.5);
    assert_eq!(field(&out.stdout, "d_max"), 3.0);
    assert_eq!(field(&out.stdout, "C_1"), 1.5);
    assert_eq!(field(&out.stdout, "C_inf"), 3.0);
    check_golden("metrics_star4.txt", &out.stdout);
}

#[test]
fn mixing_reports() {
    let out = run(&["mixing", "--design", &fixture("bernoulli4.json"), "--graph", &fixture("star4.csv")]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(field(&out.stdout, "alpha_ext"), 0.0);
    assert_eq!(field(&out.stdout, "alpha_int"), 0.0);

    let out = run(&["mixing", "--design", &fixture("paired4.json"), "--graph", &fixture("star4.csv")]);
    assert_eq!(out.code, 0);
    let metrics = run(&["metrics", "--graph", &fixture("star4.csv"), "--n", "4", "--design", &fixture("paired4.json")]);
    assert_eq!(field(&out.stdout, "alpha_ext"), field(&metrics.stdout, "e_avg") / 4.0);
    assert_eq!(field(&out.stdout, "alpha_int"), field(&metrics.stdout, "r_sum") / 4.0);
    check_golden("mixing_paired_star4.txt", &out.stdout);
}

#[test]
fn distance_reports() {
    let out = run(&["distance", "--design-a", &fixture("bernoulli4.json"), "--design-b", &fixture("bernoulli4.json")]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.lines().nth(1).unwrap().starts_with("0,"));

    let out = run(&[
        "distance",
        "--design-a",
        &fixture("bernoulli4.json"),
        "--design-b",
        &fixture("complete4.json"),
        "--metric",
        "w1",
        "--k-tau",
        "2",
        "--graph",
        &fixture("identity4.csv"),
    ]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let cols: Vec<f64> = out.stdout.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert!((cols[0] - 0.625).abs() < 1e-12);
    // W1 = E|S - 2| for S ~ Bin(4, 1/2).
    assert!((cols[2] - 0.75).abs() < 1e-12);
    check_golden("distance_w1.txt", &out.stdout);

    let out = run(&["distance", "--design-a", &fixture("bernoulli4.json"), "--design-b", &fixture("complete4.json"), "--metric", "l7"]);
    assert_eq!(out.code, 2);
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let reps = dir.path().join("reps.csv");
    let cfg = fixture("sim_min.json");
    let out = run(&["simulate", "--config", &cfg, "--out", a.to_str().unwrap(), "--workers", "1", "--dump-reps", reps.to_str().unwrap()]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let out = run(&["simulate", "--config", &cfg, "--out", b.to_str().unwrap(), "--workers", "8"]);
    assert_eq!(out.code, 0);
    let first = fs::read_to_string(&a).unwrap();
    assert_eq!(first, fs::read_to_string(&b).unwrap());
    // Header plus one row per estimator.
    assert_eq!(first.lines().count(), 3);
    assert_eq!(fs::read_to_string(&reps).unwrap().lines().count(), 1 + 10 * 2 * 4);
    check_golden("simulate_min.csv", &first);

    let seeded = run(&["simulate", "--config", &cfg, "--seed", "8"]);
    assert_ne!(seeded.stdout, first);
}

#[test]
fn simulate_rejects_unknown_keys_with_line() {
    let out = run(&["simulate", "--config", &fixture("sim_bad_key.json")]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("sim_bad_key.json:6:"), "{}", out.stderr);
}

#[test]
fn reproduce_small_figure() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["reproduce", "figB1", "--scale", "small", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let series = dir.path().join("figB1/series");
    for design in ["bernoulli", "complete", "paired"] {
        for k in 1..=5 {
            let text = fs::read_to_string(series.join(format!("group_{}_a{}.txt", design, k))).unwrap();
            assert_eq!(text.lines().count(), 2 + 5);
        }
        assert!(dir.path().join(format!("figB1/group_{}.svg", design)).exists());
    }
    let baseline = fs::read_to_string(series.join("group_bernoulli_a1.txt")).unwrap();
    assert_eq!(baseline.lines().nth(2).unwrap(), "100,1");
}

#[test]
fn reproduce_paper_scale_needs_confirmation() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["reproduce", "figB3", "--scale", "paper", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("hours"));
}
