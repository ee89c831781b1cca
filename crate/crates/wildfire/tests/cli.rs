use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(p: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(p)
}

fn wildfire(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wildfire"))
        .args(args)
        .env_remove("WILDFIRE_OUT_DIR")
        .env_remove("WILDFIRE_CATALOG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn simulate_repeats_exactly_and_prints_its_config() {
    let args = ["--seed", "4", "simulate", "--synthetic", "ridge", "--width", "40", "--height", "30", "--agent", "blind"];
    let (a, b) = (wildfire(&args), wildfire(&args));
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(stdout(&a), stdout(&b));
    for field in ["Cells Burned:", "Timesteps:", "Helitacks:", "Water Used:"] {
        assert!(stdout(&a).contains(field), "{}", stdout(&a));
    }
    assert!(stderr(&a).starts_with("config: {"), "{}", stderr(&a));
}

#[test]
fn multi_episode_json_matches_single_runs() {
    let base = ["simulate", "--synthetic", "flat_uniform", "--width", "32", "--height", "24", "--agent", "circler", "--json"];
    let many = wildfire(&[&["--seed", "10"][..], &base, &["--episodes", "3", "--parallel", "2"]].concat());
    assert!(many.status.success(), "{}", stderr(&many));
    let lines: Vec<serde_json::Value> = stdout(&many).lines().filter_map(|l| serde_json::from_str(l).ok()).collect();
    let episodes: Vec<_> = lines.iter().filter(|v| v.get("seed").is_some()).collect();
    assert_eq!(episodes.len(), 3);
    for (i, ep) in episodes.iter().enumerate() {
        let seed = (10 + i).to_string();
        let one = wildfire(&[&["--seed", &seed][..], &base].concat());
        let v: serde_json::Value = serde_json::from_str(stdout(&one).lines().next().unwrap()).unwrap();
        assert_eq!(v["cells_burned"], ep["cells_burned"]);
        assert_eq!(v["timesteps"], ep["timesteps"]);
        assert_eq!(v["reward_total"], ep["reward_total"]);
    }
}

#[test]
fn missing_scenario_exits_2_without_a_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.json");
    let o = wildfire(&["simulate", "--scenario", "/nonexistent/scenario.json", "--agent", "blind", "--log-out", p(&log)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("/nonexistent/scenario.json"));
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(wildfire(&["simulate", "--synthetic", "volcano"]).status.code(), Some(2));
    assert_eq!(wildfire(&["simulate", "--agent", "blind"]).status.code(), Some(2));
    assert_eq!(wildfire(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn bench_reports_both_rates() {
    let zero = wildfire(&["bench", "--synthetic", "flat_uniform", "--steps", "0", "--json"]);
    assert!(zero.status.success(), "{}", stderr(&zero));
    let v: serde_json::Value = serde_json::from_str(stdout(&zero).trim()).unwrap();
    assert_eq!(v["steps"], 0);

    let o = wildfire(&["bench", "--synthetic", "flat_uniform", "--width", "64", "--height", "48", "--steps", "3000", "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    let raw = v["raw_steps_per_sec"].as_f64().unwrap();
    let env = v["env_steps_per_sec"].as_f64().unwrap();
    assert!(raw > 0.0 && env > 0.0, "{v}");
}

#[test]
fn dedup_matches_the_python_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("kept.csv");
    let o = wildfire(&["dataset", "dedup", "--input", p(&data("dedup/incidents.csv")), "--output", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(out).unwrap(), fs::read_to_string(data("dedup/expected.csv")).unwrap());
}

#[test]
fn negatives_saturate_when_positives_run_out() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("neg.csv");
    let o = wildfire(&[
        "--seed", "1", "dataset", "negatives",
        "--positives", p(&data("dedup/expected.csv")),
        "--output", p(&out),
        "--far", "0", "--near", "0", "--yearly", "1000",
    ]);
    // Each of the 210 positives backs at most one yearly negative.
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(!out.exists());
    assert!(stderr(&o).contains("saturated"), "{}", stderr(&o));
}

#[test]
fn windows_reproduce_the_reference_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("windows.csv");
    let o = wildfire(&[
        "dataset", "windows",
        "--samples", p(&data("windows/samples.csv")),
        "--weather", p(&data("windows/weather.csv")),
        "--output", p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let got = fs::read_to_string(out).unwrap();
    let expected = fs::read_to_string(data("windows/reference_rows.csv")).unwrap();
    assert_eq!(got.lines().next(), expected.lines().next());
    // Two samples, 75 days each.
    assert_eq!(got.lines().count(), 1 + 2 * 75);
    for row in expected.lines().skip(1) {
        assert!(got.lines().any(|l| l == row), "missing {row}");
    }
}

#[test]
fn report_renders_a_written_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.json");
    let o = wildfire(&[
        "--seed", "2", "simulate", "--fixture", "--agent", "circler", "--log-out", p(&log), "--json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: serde_json::Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(summary["contained"], true);
    let steps = summary["timesteps"].as_u64().unwrap();

    let text = wildfire(&["report", "--log", p(&log)]);
    assert!(text.status.success(), "{}", stderr(&text));
    assert!(stdout(&text).contains(&format!("contained at step {steps}")), "{}", stdout(&text));

    let json = wildfire(&["report", "--log", p(&log), "--format", "json"]);
    let report: wildfire_core::report::ThreatReport = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(report.suppression.containment_step, Some(steps as u32));
    let again: wildfire_core::report::ThreatReport =
        serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(again, report);
}

#[test]
fn truncated_log_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.json");
    let o = wildfire(&["simulate", "--synthetic", "flat_uniform", "--width", "24", "--height", "16", "--agent", "blind", "--max-steps", "30", "--log-out", p(&log)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&log).unwrap();
    fs::write(&log, &text[..text.len() / 2]).unwrap();
    let r = wildfire(&["report", "--log", p(&log)]);
    assert!(!r.status.success());
    assert!(stdout(&r).is_empty());
}

#[test]
fn relative_outputs_land_in_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let o = wildfire(&["--out-dir", p(dir.path()), "synth", "--kind", "two_fuel", "--width", "16", "--height", "12", "--output", "t.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("t.json")).unwrap()).unwrap();
    assert_eq!(doc["width"], 16);
    assert_eq!(doc["height"], 12);
}
