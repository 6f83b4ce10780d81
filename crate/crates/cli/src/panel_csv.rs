//! Long-format panel CSV: `time_index, asset_id, log_price, is_etf, weight`.

use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use jumpsync::eventmatrix::PricePanel;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelCsvRow {
    pub time_index: usize,
    pub asset_id: String,
    pub log_price: f64,
    pub is_etf: u8,
    pub weight: f64,
}

struct Series {
    is_etf: bool,
    first_line: u64,
    points: Vec<Option<(f64, f64)>>,
}

pub fn read_panel(path: &Path, returns_per_day: usize) -> Result<PricePanel<f64>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let schema = |line: u64, msg: String| CliError::Schema(format!("{}:{line}: {msg}", path.display()));
    let mut order: Vec<String> = Vec::new();
    let mut series: HashMap<String, Series> = HashMap::new();
    let headers = reader
        .headers()
        .map_err(|e| schema(1, e.to_string()))?
        .clone();
    let mut record = csv::StringRecord::new();
    loop {
        let more = reader.read_record(&mut record).map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            schema(line, e.to_string())
        })?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        let row: PanelCsvRow = record
            .deserialize(Some(&headers))
            .map_err(|e| schema(line, e.to_string()))?;
        if row.is_etf > 1 {
            return Err(schema(line, format!("is_etf must be 0 or 1, got {}", row.is_etf)));
        }
        if !row.log_price.is_finite() || !row.weight.is_finite() {
            return Err(schema(line, "non-finite log_price or weight".into()));
        }
        let s = series.entry(row.asset_id.clone()).or_insert_with(|| {
            order.push(row.asset_id.clone());
            Series {
                is_etf: row.is_etf == 1,
                first_line: line,
                points: Vec::new(),
            }
        });
        if s.is_etf != (row.is_etf == 1) {
            return Err(schema(line, format!("asset {} changes its is_etf flag", row.asset_id)));
        }
        if s.points.len() <= row.time_index {
            s.points.resize(row.time_index + 1, None);
        }
        if s.points[row.time_index].is_some() {
            return Err(schema(
                line,
                format!("duplicate row for asset {} at time {}", row.asset_id, row.time_index),
            ));
        }
        s.points[row.time_index] = Some((row.log_price, row.weight));
    }
    let etfs: Vec<&String> = order.iter().filter(|id| series[*id].is_etf).collect();
    if etfs.len() != 1 {
        return Err(schema(0, format!("expected exactly one ETF, found {}", etfs.len())));
    }
    let etf_id = etfs[0].clone();
    let len = series.values().map(|s| s.points.len()).max().unwrap_or(0);
    let complete = |id: &String| -> Result<(Vec<f64>, Vec<f64>)> {
        let s = &series[id];
        let mut prices = Vec::with_capacity(len);
        let mut weights = Vec::with_capacity(len);
        for t in 0..len {
            let Some(&Some((p, w))) = s.points.get(t) else {
                return Err(schema(s.first_line, format!("asset {id} has no row at time {t}")));
            };
            prices.push(p);
            weights.push(w);
        }
        Ok((prices, weights))
    };
    let (etf, _) = complete(&etf_id)?;
    let mut asset_ids = Vec::new();
    let mut prices = Vec::new();
    let mut weights = Vec::new();
    for id in order.iter().filter(|id| **id != etf_id) {
        let (p, w) = complete(id)?;
        asset_ids.push(id.clone());
        prices.push(p);
        weights.push(w);
    }
    let panel = PricePanel {
        asset_ids,
        prices,
        weights,
        etf_id,
        etf,
        returns_per_day,
    };
    panel.validate()?;
    Ok(panel)
}

pub fn write_panel(path: &Path, panel: &PricePanel<f64>) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    let io = |e: csv::Error| CliError::io(path, std::io::Error::other(e.to_string()));
    for t in 0..panel.len() {
        for (k, id) in panel.asset_ids.iter().enumerate() {
            writer
                .serialize(PanelCsvRow {
                    time_index: t,
                    asset_id: id.clone(),
                    log_price: panel.prices[k][t],
                    is_etf: 0,
                    weight: panel.weights[k][t],
                })
                .map_err(io)?;
        }
        writer
            .serialize(PanelCsvRow {
                time_index: t,
                asset_id: panel.etf_id.clone(),
                log_price: panel.etf[t],
                is_etf: 1,
                weight: 1.0,
            })
            .map_err(io)?;
    }
    writer.flush().map_err(|e| CliError::io(path, e))
}
