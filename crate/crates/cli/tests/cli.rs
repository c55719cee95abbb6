use std::fs;
use std::process::{Command, Output};

fn svtail(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svtail"))
        .args(args)
        .env_remove("SVTAIL_SEED")
        .output()
        .expect("failed to launch svtail")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(idx).unwrap().to_string())
        .collect()
}

#[test]
fn bound_prints_crossover() {
    let out = svtail(&["bound", "--m", "5", "--n", "5", "--crossover"]);
    assert!(out.status.success());
    let line = stdout(&out);
    let value: f64 = line
        .trim()
        .strip_prefix("crossover_t=")
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - 6.017_670_066_542_968).abs() < 1e-9);
}

#[test]
fn bound_table_has_one_row_per_grid_point() {
    let out = svtail(&["bound", "--m", "5", "--n", "5", "--t-grid", "0:12:0.5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 26);
    let refined = column(&text, "refined_probability");
    let last: f64 = refined.last().unwrap().parse().unwrap();
    assert!(last > 0.0 && last < 1e-15);
}

#[test]
fn bound_json_output() {
    let out = svtail(&[
        "bound", "--m", "5", "--n", "5", "--t", "10", "--format", "json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let row = &doc["rows"][0];
    let log10 = row["net_log10_bound"].as_f64().unwrap();
    assert!((log10 + 14.423_994_056_138_42).abs() < 1e-9);
}

#[test]
fn unknown_tag_is_a_config_error() {
    let out = svtail(&["verify", "--m", "5", "--n", "5", "--bounds", "netX"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("netX"), "{err}");
    assert!(err.contains("--bounds"), "{err}");
}

#[test]
fn invalid_dimension_names_the_field() {
    let out = svtail(&["simulate", "--m", "0", "--n", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`m`"));
    let out = svtail(&["simulate", "--m", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--n"));
}

#[test]
fn show_rho_reports_dimension() {
    let out = svtail(&["toeplitz", "--d", "4", "--show-rho"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "rho = 4");
}

#[test]
fn config_line_echoes_defaults() {
    let out = svtail(&[
        "simulate", "--m", "2", "--n", "3", "--t", "1", "--trials", "200",
    ]);
    assert!(out.status.success());
    let err = stderr(&out);
    let config = err.lines().find(|l| l.starts_with("# config:")).unwrap();
    for piece in [
        "--seed 1",
        "--confidence 0.99",
        "--model gaussian",
        "--trials 200",
    ] {
        assert!(config.contains(piece), "{config}");
    }
}

#[test]
fn seed_can_come_from_environment() {
    let args = [
        "simulate", "--m", "2", "--n", "2", "--t-grid", "0:3:0.5", "--trials", "500",
    ];
    let explicit = svtail(&[&args[..], &["--seed", "77"]].concat());
    let from_env = Command::new(env!("CARGO_BIN_EXE_svtail"))
        .args(args)
        .env("SVTAIL_SEED", "77")
        .output()
        .unwrap();
    assert_eq!(explicit.stdout, from_env.stdout);
    assert_ne!(explicit.stdout, svtail(&args).stdout);
}

#[test]
fn simulate_is_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "2", "8"] {
        let path = dir.path().join(format!("run{threads}.csv"));
        let out = svtail(&[
            "simulate",
            "--m",
            "4",
            "--n",
            "6",
            "--trials",
            "3000",
            "--seed",
            "11",
            "--threads",
            threads,
            "--bounds",
            "net,refined",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        outputs.push(fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let rerun = svtail(&[
        "simulate",
        "--m",
        "4",
        "--n",
        "6",
        "--trials",
        "3000",
        "--seed",
        "11",
        "--bounds",
        "net,refined",
    ]);
    assert_eq!(rerun.stdout, outputs[0]);
}

#[test]
fn toeplitz_of_dimension_one_matches_scalar_simulation() {
    let grid = "0:4:0.25";
    let toeplitz = svtail(&[
        "toeplitz", "--d", "1", "--t-grid", grid, "--trials", "5000", "--seed", "3",
    ]);
    let scalar = svtail(&[
        "simulate", "--m", "1", "--n", "1", "--t-grid", grid, "--trials", "5000", "--seed", "3",
    ]);
    assert!(toeplitz.status.success(), "{}", stderr(&toeplitz));
    assert!(scalar.status.success());
    let (a, b) = (stdout(&toeplitz), stdout(&scalar));
    assert_eq!(column(&a, "empirical_p"), column(&b, "empirical_p"));
    assert_eq!(column(&a, "ci_low"), column(&b, "ci_low"));
}

#[test]
fn verify_passes_for_small_gaussian_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = svtail(&[
        "verify",
        "--m",
        "5",
        "--n",
        "5",
        "--trials",
        "5000",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("verdict: pass"));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["verdict"], "pass");
    assert_eq!(doc["summaries"].as_array().unwrap().len(), 3);
}

#[test]
fn verify_exits_one_when_a_bound_is_violated() {
    let out = svtail(&[
        "verify", "--d", "8", "--t-grid", "0:12:1", "--trials", "5000",
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert!(stdout(&out).contains("verdict: fail"));
}

#[test]
fn simulate_json_rows_match_grid() {
    let out = svtail(&[
        "simulate", "--m", "3", "--n", "3", "--t-grid", "1,2,3", "--trials", "400", "--format",
        "json",
    ]);
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2]["t"].as_f64(), Some(3.0));
    assert_eq!(rows[0]["n_trials"].as_u64(), Some(400));
}
