use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_jumpsync"));
    cmd.env("RUST_LOG", "warn");
    cmd
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path
}

const SIM: &str = r#"{
  "simulation": {
    "n_assets": 3, "grid_points_per_day": 78, "horizon_days": 45,
    "jump_intensity": 2.0, "jump_size_sd": 0.02, "jump_size_correlation": 0.9,
    "common_jumps": true
  },
  "backtest": { "lookback": 20, "bootstrap": { "n_boot": 199 } }
}"#;

#[test]
fn abc_fixture_reproduces_the_toy_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    run(bin()
        .arg("rearrange")
        .arg(fixture("abc_panel.csv"))
        .arg("--config")
        .arg(fixture("abc_config.json"))
        .arg("--out")
        .arg(&out));
    let summary = json(&out.join("summary.json"));
    assert_eq!(summary["built"], 1);
    assert_eq!(summary["rearranged"], 1);
    let event = json(&out.join("events/event_0000.json"));
    let s = &event["solution"];
    assert!((s["initial_range"].as_f64().unwrap() - 1.421).abs() < 1e-3);
    assert!((s["range"].as_f64().unwrap() - 0.048).abs() < 1e-3);
    assert_eq!(s["new_rows"], serde_json::json!([2, 2, 2]));
    let trace = fs::read_to_string(out.join("events/event_0000_trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("c,range,matched"));
    let ranges: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    let want = [1.421, 0.386, 0.048, 0.048, 0.048];
    assert_eq!(ranges.len(), want.len());
    for (g, w) in ranges.iter().zip(want) {
        assert!((g - w).abs() < 1e-3, "{ranges:?}");
    }
}

#[test]
fn zero_budget_leaves_the_panel_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SIM);
    let panel = dir.path().join("panel.csv");
    run(bin().args(["simulate", "--seed", "3", "--out"]).arg(&panel).arg("--config").arg(&cfg));
    let out = dir.path().join("out");
    run(bin()
        .arg("rearrange")
        .arg(&panel)
        .args(["--budget", "0", "--out"])
        .arg(&out)
        .arg("--config")
        .arg(&cfg));
    assert!(json(&out.join("summary.json"))["built"].as_u64().unwrap() > 0);
    assert_eq!(fs::read(&panel).unwrap(), fs::read(out.join("rearranged.csv")).unwrap());
}

#[test]
fn simulate_is_deterministic_and_sized() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"simulation": {"n_assets": 2, "grid_points_per_day": 390, "jump_intensity": 0.0}}"#,
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let out = run(bin().args(["simulate", "--seed", "5", "--out"]).arg(&a).arg("--config").arg(&cfg));
    run(bin().args(["simulate", "--seed", "5", "--out"]).arg(&b).arg("--config").arg(&cfg));
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["jumps"], 0);
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 1 + 391 * 3);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn identical_backtest_inputs_give_p_value_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SIM);
    let panel = dir.path().join("panel.csv");
    run(bin().args(["simulate", "--out"]).arg(&panel).arg("--config").arg(&cfg));
    let table = dir.path().join("table.json");
    run(bin()
        .arg("backtest")
        .arg(&panel)
        .arg(&panel)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&table));
    let row = json(&table);
    assert_eq!(row["p_value"], 1.0);
    assert_eq!(row["rearranged_events"], 0);
    assert_eq!(row["closing_value_raw"], row["closing_value_rearranged"]);
    assert_eq!(row["sd_raw"], row["sd_rearranged"]);
}

#[test]
fn simulated_backtest_fills_every_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SIM);
    let panel = dir.path().join("panel.csv");
    run(bin().args(["simulate", "--out"]).arg(&panel).arg("--config").arg(&cfg));
    let out = dir.path().join("out");
    run(bin().arg("rearrange").arg(&panel).arg("--out").arg(&out).arg("--config").arg(&cfg));
    let table = dir.path().join("table.csv");
    run(bin()
        .arg("backtest")
        .arg(&panel)
        .arg(out.join("rearranged.csv"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&table));
    let text = fs::read_to_string(&table).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some(
            "days,cojumps,rearranged_events,closing_value_raw,closing_value_rearranged,\
             sd_raw,sd_rearranged,msharpe_raw,msharpe_rearranged,p_value"
        )
    );
    let values: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(values.len(), 10);
    assert!(values.iter().all(|v| !v.is_empty()), "{values:?}");
    assert_eq!(values[0], "45");
    let rearranged = json(&out.join("summary.json"))["rearranged"].as_u64().unwrap();
    assert!(rearranged > 0);
    assert!(values[2].parse::<u64>().unwrap() > 0);
}

#[test]
fn missing_file_exits_with_io_code() {
    let out = bin()
        .args(["rearrange", "/nonexistent/panel.csv", "--out", "/tmp/never"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/panel.csv"));
}

#[test]
fn schema_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let panel = dir.path().join("bad.csv");
    fs::write(&panel, "time_index,asset_id,log_price,is_etf,weight\n0,A,0,0,1\n0,A,0,0,1\n").unwrap();
    let out = bin()
        .arg("rearrange")
        .arg(&panel)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":3:"));
}

#[test]
fn impossible_fixed_shift_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"returns_per_day": 100,
            "pipeline": {"detect": {"window": 20}, "window_pre": 2, "window_post": 2, "budget": 4,
                         "constraints": {"fixed_shifts": [[0, 9]]}}}"#,
    );
    let out = bin()
        .arg("rearrange")
        .arg(fixture("abc_panel.csv"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

fn shifted_abc(dir: &Path, at: usize) -> PathBuf {
    // move the toy block so its ETF jump sits at `at + 2`
    let text = fs::read_to_string(fixture("abc_panel.csv")).unwrap();
    let mut rows: Vec<Vec<String>> = text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
    let price = |rows: &Vec<Vec<String>>, t: usize, k: usize| -> f64 { rows[t * 4 + k][2].parse().unwrap() };
    let mut returns = vec![vec![0.0; 100]; 4];
    for (k, r) in returns.iter_mut().enumerate() {
        for (t, v) in r.iter_mut().enumerate() {
            *v = price(&rows, t + 1, k) - price(&rows, t, k);
        }
        let block: Vec<f64> = r[60..65].to_vec();
        let pad: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 0.03 } else { -0.03 }).collect();
        *r = pad;
        r[at..at + 5].copy_from_slice(&block);
    }
    for k in 0..4 {
        let mut p = 0.0;
        rows[k][2] = format!("{p:?}");
        for t in 0..100 {
            p += returns[k][t];
            rows[(t + 1) * 4 + k][2] = format!("{p:?}");
        }
    }
    let mut out = String::from("time_index,asset_id,log_price,is_etf,weight\n");
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    let path = dir.join("panel.csv");
    fs::write(&path, out).unwrap();
    path
}

#[test]
fn events_near_the_open_are_excluded() {
    let dir = tempfile::tempdir().unwrap();
    let panel = shifted_abc(dir.path(), 3);
    let out = dir.path().join("out");
    run(bin()
        .arg("rearrange")
        .arg(&panel)
        .arg("--config")
        .arg(fixture("abc_config.json"))
        .arg("--out")
        .arg(&out));
    let summary = json(&out.join("summary.json"));
    assert_eq!(summary["events"], 1);
    assert_eq!(summary["excluded"], 1);
    assert_eq!(summary["rearranged"], 0);
    let event = json(&out.join("events/event_0000.json"));
    assert_eq!(event["candidate"]["excluded"], "EdgeOfDay");
    assert!(event["solution"].is_null());
    assert_eq!(fs::read(&panel).unwrap(), fs::read(out.join("rearranged.csv")).unwrap());
}

#[test]
fn panels_without_etf_jumps_pass_through() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("time_index,asset_id,log_price,is_etf,weight\n");
    for t in 0..=100 {
        let p = if t % 2 == 0 { 0.0 } else { 0.01 };
        text.push_str(&format!("{t},A,{p:?},0,0.5\n{t},B,{p:?},0,0.5\n{t},E,{p:?},1,1.0\n"));
    }
    let panel = dir.path().join("panel.csv");
    fs::write(&panel, text).unwrap();
    let out = dir.path().join("out");
    run(bin()
        .arg("rearrange")
        .arg(&panel)
        .arg("--config")
        .arg(fixture("abc_config.json"))
        .arg("--out")
        .arg(&out));
    assert_eq!(json(&out.join("summary.json"))["events"], 0);
    assert_eq!(fs::read(&panel).unwrap(), fs::read(out.join("rearranged.csv")).unwrap());
}
