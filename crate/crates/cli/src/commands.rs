use std::fs;
use std::path::Path;

use jumpsync::covport::{backtest as run_backtest, PerformanceRow};
use jumpsync::eventmatrix::{find_events, EventCandidate, EventMatrixRecord, PricePanel};
use jumpsync::jumpdetect::detect_panel;
use jumpsync::pipeline::{run_pipeline, PipelineOutput};
use jumpsync::rearrange::{RearrangementSolution, TracePoint};
use jumpsync::simgen::simulate as run_simulation;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::panel_csv::{read_panel, write_panel};

#[derive(Debug, Serialize)]
struct SimulationSummary {
    assets: usize,
    days: usize,
    returns: usize,
    jumps: usize,
    truncated_delays: usize,
    mean_delay_seconds: f64,
    max_delay_seconds: u64,
}

pub fn simulate(cfg: &RunConfig, out: &Path, efficient_out: Option<&Path>) -> Result<()> {
    let sim = run_simulation(&cfg.simulation)?;
    write_panel(out, &sim.observed_panel())?;
    if let Some(path) = efficient_out {
        write_panel(path, &sim.efficient_panel())?;
    }
    let delays: Vec<u64> = sim.observed.step_functions.iter().map(|s| s.total_delay).collect();
    let summary = SimulationSummary {
        assets: cfg.simulation.n_assets,
        days: cfg.simulation.horizon_days,
        returns: cfg.simulation.n_returns(),
        jumps: sim.efficient.jumps.len(),
        truncated_delays: sim.observed.step_functions.iter().filter(|s| s.truncated).count(),
        mean_delay_seconds: if delays.is_empty() {
            0.0
        } else {
            delays.iter().sum::<u64>() as f64 / delays.len() as f64
        },
        max_delay_seconds: delays.iter().copied().max().unwrap_or(0),
    };
    println!("{}", to_json(&summary)?);
    Ok(())
}

#[derive(Debug, Serialize)]
struct EventJson<'a> {
    event: usize,
    candidate: &'a EventCandidate,
    matrix: Option<EventMatrixRecord>,
    solution: Option<&'a RearrangementSolution<f64>>,
}

#[derive(Debug, Serialize)]
struct TraceRow {
    c: usize,
    range: f64,
    matched: usize,
}

#[derive(Debug, Serialize)]
struct RearrangeSummary {
    events: usize,
    built: usize,
    excluded: usize,
    rearranged: usize,
    rearrangement_days: Vec<usize>,
}

pub fn rearrange(panel_path: &Path, cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let panel = read_panel(panel_path, cfg.returns_per_day())?;
    let mut pipeline = cfg.pipeline.clone();
    pipeline.trace = true;
    let out = run_pipeline(&panel, &pipeline)?;
    let events_dir = out_dir.join("events");
    fs::create_dir_all(&events_dir).map_err(|e| CliError::io(&events_dir, e))?;
    for (k, ev) in out.events.iter().enumerate() {
        if let Some(reason) = ev.candidate.excluded {
            log::info!(
                "event {k} at ETF jumps {:?} excluded: {reason:?}",
                ev.candidate.etf_jump_indices
            );
        }
        let json = EventJson {
            event: k,
            candidate: &ev.candidate,
            matrix: ev.matrix.as_ref().map(|m| m.to_record()),
            solution: ev.solution.as_ref(),
        };
        write_text(&events_dir.join(format!("event_{k:04}.json")), &to_json(&json)?)?;
        if let Some(trace) = &ev.trace {
            write_trace(&events_dir.join(format!("event_{k:04}_trace.csv")), &trace.points)?;
        }
    }
    write_panel(&out_dir.join("rearranged.csv"), &out.rearranged)?;
    let summary = summarize(&out);
    write_text(&out_dir.join("summary.json"), &to_json(&summary)?)?;
    println!(
        "events: {}, built: {}, excluded: {}, rearranged: {}",
        summary.events, summary.built, summary.excluded, summary.rearranged
    );
    Ok(())
}

fn summarize(out: &PipelineOutput<f64>) -> RearrangeSummary {
    RearrangeSummary {
        events: out.events.len(),
        built: out.n_built(),
        excluded: out.events.iter().filter(|e| e.candidate.excluded.is_some()).count(),
        rearranged: out.n_rearranged(),
        rearrangement_days: out.rearrangement_days.clone(),
    }
}

fn write_trace(path: &Path, points: &[TracePoint<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    for p in points {
        w.serialize(TraceRow {
            c: p.budget,
            range: p.range,
            matched: p.matched_count,
        })
        .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Days on which any stock return differs between the two panels.
fn changed_days(raw: &PricePanel<f64>, rearranged: &PricePanel<f64>) -> Vec<usize> {
    let (a, b) = (raw.stock_returns(), rearranged.stock_returns());
    let m = raw.returns_per_day;
    (0..raw.n_returns() / m)
        .filter(|&d| a.iter().zip(&b).any(|(x, y)| x[d * m..(d + 1) * m] != y[d * m..(d + 1) * m]))
        .collect()
}

pub fn backtest(raw_path: &Path, rearranged_path: &Path, cfg: &RunConfig, out: &Path) -> Result<()> {
    let rpd = cfg.returns_per_day();
    let raw = read_panel(raw_path, rpd)?;
    let rearranged = read_panel(rearranged_path, rpd)?;
    if raw.asset_ids != rearranged.asset_ids || raw.len() != rearranged.len() {
        return Err(CliError::Schema("raw and rearranged panels differ in assets or length".into()));
    }
    let detection = detect_panel(&raw, &cfg.pipeline.detect)?;
    let classified = detection.classified(&raw)?;
    let events: Vec<EventCandidate> = find_events(
        &classified,
        cfg.pipeline.window_pre,
        cfg.pipeline.window_post,
        cfg.pipeline.edge_exclusion,
    )
    .into_iter()
    .filter(|e| e.excluded.is_none())
    .collect();
    let (a, b) = (raw.stock_returns(), rearranged.stock_returns());
    let moved = events
        .iter()
        .filter(|e| {
            let (s, t) = (e.start as usize, e.end as usize + 1);
            a.iter().zip(&b).any(|(x, y)| x[s..t] != y[s..t])
        })
        .count();
    let days = changed_days(&raw, &rearranged);
    let report = run_backtest(&raw, &rearranged, &days, &cfg.backtest)?;
    let row = report.performance_row(events.len(), moved);
    write_table(out, &row)?;
    println!("{}", to_json(&row)?);
    Ok(())
}

fn write_table(path: &Path, row: &PerformanceRow) -> Result<()> {
    if path.extension().is_some_and(|e| e == "json") {
        return write_text(path, &to_json(row)?);
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.serialize(row).map_err(|e| csv_io(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

fn to_json<S: Serialize>(value: &S) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.to_string()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn csv_io(path: &Path, e: csv::Error) -> CliError {
    CliError::io(path, std::io::Error::other(e.to_string()))
}
