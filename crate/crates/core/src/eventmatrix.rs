//! Synthetic-index spreads and jump-event matrices.
//!
//! Returns are indexed from zero: return `r` is the move from price `r` to
//! price `r + 1`, and its index weights are the weights recorded at price
//! `r + 1`. The return spread is computed with log-return weighting,
//! `sum_k w_k dY_k - dZ`, so it coincides with the first difference of the
//! price spread whenever the weights are constant over the interval.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{ordered_sum, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EventError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("event window [{start}, {end}] is clipped by the trading day [{day_start}, {day_end}]")]
    WindowClipped {
        start: i64,
        end: i64,
        day_start: usize,
        day_end: usize,
    },
    #[error("invalid jump-event matrix: {0}")]
    InvalidMatrix(String),
}

pub type Result<T> = std::result::Result<T, EventError>;

/// Aligned multi-asset log prices with per-time index weights and one ETF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricePanel<T> {
    pub asset_ids: Vec<String>,
    /// Asset-major log prices, one row per stock.
    pub prices: Vec<Vec<T>>,
    /// Asset-major weights on the same grid as `prices`.
    pub weights: Vec<Vec<T>>,
    pub etf_id: String,
    pub etf: Vec<T>,
    pub returns_per_day: usize,
}

fn diff<T: Scalar>(xs: &[T]) -> Vec<T> {
    xs.windows(2).map(|w| w[1] - w[0]).collect()
}

impl<T: Scalar> PricePanel<T> {
    /// Builds a panel from returns, cumulating each series from zero.
    ///
    /// `weights` has one entry per return; the weight of the opening price
    /// repeats the first one.
    pub fn from_returns(
        asset_ids: Vec<String>,
        stock_returns: &[Vec<T>],
        weights: &[Vec<T>],
        etf_id: impl Into<String>,
        etf_returns: &[T],
        returns_per_day: usize,
    ) -> Result<Self> {
        let cumulate = |r: &[T]| {
            let mut out = Vec::with_capacity(r.len() + 1);
            out.push(T::zero());
            let mut acc = T::zero();
            for &x in r {
                acc = acc + x;
                out.push(acc);
            }
            out
        };
        let expand = |w: &[T]| {
            let mut out = Vec::with_capacity(w.len() + 1);
            out.push(w.first().copied().unwrap_or_else(T::zero));
            out.extend_from_slice(w);
            out
        };
        let panel = Self {
            asset_ids,
            prices: stock_returns.iter().map(|r| cumulate(r)).collect(),
            weights: weights.iter().map(|w| expand(w)).collect(),
            etf_id: etf_id.into(),
            etf: cumulate(etf_returns),
            returns_per_day,
        };
        panel.validate()?;
        Ok(panel)
    }

    pub fn n_assets(&self) -> usize {
        self.prices.len()
    }

    /// Number of grid points (prices) per series.
    pub fn len(&self) -> usize {
        self.etf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.etf.is_empty()
    }

    pub fn n_returns(&self) -> usize {
        self.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if n < 2 {
            return Err(EventError::Schema("panel needs at least two grid points".into()));
        }
        if self.asset_ids.len() != self.prices.len() {
            return Err(EventError::Schema(format!(
                "{} asset ids for {} price series",
                self.asset_ids.len(),
                self.prices.len()
            )));
        }
        if self.weights.len() != self.prices.len() {
            return Err(EventError::Schema(format!(
                "{} weight series for {} assets",
                self.weights.len(),
                self.prices.len()
            )));
        }
        for (k, (p, w)) in self.prices.iter().zip(&self.weights).enumerate() {
            if p.len() != n || w.len() != n {
                return Err(EventError::Schema(format!(
                    "asset {} has {} prices and {} weights, expected {n}",
                    self.asset_ids[k],
                    p.len(),
                    w.len()
                )));
            }
            if w.iter().any(|&x| x < T::zero()) {
                return Err(EventError::Schema(format!(
                    "asset {} has a negative weight",
                    self.asset_ids[k]
                )));
            }
        }
        if self.returns_per_day == 0 || !self.n_returns().is_multiple_of(self.returns_per_day) {
            return Err(EventError::Schema(format!(
                "{} returns do not split into days of {}",
                self.n_returns(),
                self.returns_per_day
            )));
        }
        Ok(())
    }

    /// Asset-major stock log returns.
    pub fn stock_returns(&self) -> Vec<Vec<T>> {
        self.prices.iter().map(|p| diff(p)).collect()
    }

    pub fn etf_returns(&self) -> Vec<T> {
        diff(&self.etf)
    }

    /// Weights attached to each return (the weight at the interval's end).
    pub fn return_weights(&self) -> Vec<Vec<T>> {
        self.weights.iter().map(|w| w[1..].to_vec()).collect()
    }
}

/// `S_i = sum_k w_{k,i} Y_{k,i}`.
pub fn synthetic_index<T: Scalar>(panel: &PricePanel<T>) -> Result<Vec<T>> {
    panel.validate()?;
    Ok((0..panel.len())
        .map(|i| ordered_sum((0..panel.n_assets()).map(|k| panel.weights[k][i] * panel.prices[k][i])))
        .collect())
}

/// Price and return spreads between the synthetic index and the ETF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadSeries<T> {
    /// `S_i - Z_i`, one per grid point.
    pub price_spread: Vec<T>,
    /// `sum_k w_{k,i} dY_{k,i} - dZ_i`, one per return.
    pub return_spread: Vec<T>,
}

pub fn return_spread<T: Scalar>(panel: &PricePanel<T>) -> Result<SpreadSeries<T>> {
    let index = synthetic_index(panel)?;
    let price_spread = index.iter().zip(&panel.etf).map(|(&s, &z)| s - z).collect();
    let returns = panel.stock_returns();
    let weights = panel.return_weights();
    let etf = panel.etf_returns();
    let return_spread = (0..panel.n_returns())
        .map(|r| ordered_sum((0..panel.n_assets()).map(|k| weights[k][r] * returns[k][r])) - etf[r])
        .collect();
    Ok(SpreadSeries {
        price_spread,
        return_spread,
    })
}

/// Returns split into jumps and continuous moves for every stock and the ETF.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedReturns<T> {
    pub asset_ids: Vec<String>,
    pub stock_returns: Vec<Vec<T>>,
    pub stock_jumps: Vec<Vec<bool>>,
    /// Weight per stock per return.
    pub weights: Vec<Vec<T>>,
    pub etf_returns: Vec<T>,
    pub etf_jumps: Vec<bool>,
    pub returns_per_day: usize,
}

impl<T: Scalar> ClassifiedReturns<T> {
    pub fn new(
        panel: &PricePanel<T>,
        stock_jumps: Vec<Vec<bool>>,
        etf_jumps: Vec<bool>,
    ) -> Result<Self> {
        panel.validate()?;
        let n = panel.n_returns();
        if stock_jumps.len() != panel.n_assets() || stock_jumps.iter().any(|f| f.len() != n) {
            return Err(EventError::Schema("stock jump flags do not match the panel".into()));
        }
        if etf_jumps.len() != n {
            return Err(EventError::Schema("ETF jump flags do not match the panel".into()));
        }
        Ok(Self {
            asset_ids: panel.asset_ids.clone(),
            stock_returns: panel.stock_returns(),
            stock_jumps,
            weights: panel.return_weights(),
            etf_returns: panel.etf_returns(),
            etf_jumps,
            returns_per_day: panel.returns_per_day,
        })
    }

    pub fn n_returns(&self) -> usize {
        self.etf_returns.len()
    }

    pub fn n_assets(&self) -> usize {
        self.stock_returns.len()
    }

    /// `w_k dJ_k` at return `r`.
    pub fn weighted_jump(&self, k: usize, r: usize) -> T {
        if self.stock_jumps[k][r] {
            self.weights[k][r] * self.stock_returns[k][r]
        } else {
            T::zero()
        }
    }

    /// `w_k dC_k` at return `r`.
    pub fn weighted_continuous(&self, k: usize, r: usize) -> T {
        if self.stock_jumps[k][r] {
            T::zero()
        } else {
            self.weights[k][r] * self.stock_returns[k][r]
        }
    }

    /// Target entry `sum_k w_k dC_k - dZ` at return `r`.
    pub fn target(&self, r: usize) -> T {
        ordered_sum((0..self.n_assets()).map(|k| self.weighted_continuous(k, r))) - self.etf_returns[r]
    }

    /// Return spread at `r`.
    pub fn spread(&self, r: usize) -> T {
        ordered_sum((0..self.n_assets()).map(|k| self.weights[k][r] * self.stock_returns[k][r]))
            - self.etf_returns[r]
    }

    pub fn day_bounds(&self, r: usize) -> (usize, usize) {
        let day = r / self.returns_per_day;
        let start = day * self.returns_per_day;
        (start, start + self.returns_per_day - 1)
    }

    pub fn etf_jump_indices(&self) -> Vec<usize> {
        (0..self.n_returns()).filter(|&r| self.etf_jumps[r]).collect()
    }
}

/// A single stock jump inside an event window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpColumn<T> {
    pub asset: usize,
    pub asset_id: String,
    /// Zero-based row inside the window.
    pub row: usize,
    /// Weighted jump return `w_k dJ_k`.
    pub value: T,
    /// Return index in the full series.
    pub source_index: usize,
}

/// `h x q` matrix of weighted stock jumps plus a fixed target column.
///
/// Every jump column holds exactly one nonzero entry, so it is stored as a
/// (row, value) pair; [`JumpEventMatrix::dense`] materializes the matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpEventMatrix<T> {
    /// Return index of the first window row.
    pub window_start: usize,
    pub h: usize,
    pub columns: Vec<JumpColumn<T>>,
    pub target: Vec<T>,
    /// Rows of ETF jumps inside the window.
    pub etf_jump_rows: Vec<usize>,
}

impl<T: Scalar> JumpEventMatrix<T> {
    pub fn new(
        window_start: usize,
        columns: Vec<JumpColumn<T>>,
        target: Vec<T>,
        etf_jump_rows: Vec<usize>,
    ) -> Result<Self> {
        let h = target.len();
        if h == 0 {
            return Err(EventError::InvalidMatrix("empty window".into()));
        }
        for (l, c) in columns.iter().enumerate() {
            if c.row >= h {
                return Err(EventError::InvalidMatrix(format!(
                    "column {l} places its jump on row {} of {h}",
                    c.row
                )));
            }
            if c.value == T::zero() {
                return Err(EventError::InvalidMatrix(format!("column {l} has no nonzero entry")));
            }
        }
        if let Some(&r) = etf_jump_rows.iter().find(|&&r| r >= h) {
            return Err(EventError::InvalidMatrix(format!("ETF jump row {r} outside window")));
        }
        Ok(Self {
            window_start,
            h,
            columns,
            target,
            etf_jump_rows,
        })
    }

    /// Builds a matrix from dense rows whose last entry is the target.
    pub fn from_dense(rows: &[Vec<T>], etf_jump_rows: Vec<usize>) -> Result<Self> {
        let q = rows.first().map_or(0, Vec::len);
        if q == 0 || rows.iter().any(|r| r.len() != q) {
            return Err(EventError::InvalidMatrix("ragged or empty dense matrix".into()));
        }
        let mut columns = Vec::with_capacity(q - 1);
        for l in 0..q - 1 {
            let nonzero: Vec<usize> = (0..rows.len()).filter(|&i| rows[i][l] != T::zero()).collect();
            if nonzero.len() != 1 {
                return Err(EventError::InvalidMatrix(format!(
                    "jump column {l} has {} nonzero entries",
                    nonzero.len()
                )));
            }
            let row = nonzero[0];
            columns.push(JumpColumn {
                asset: l,
                asset_id: format!("J{}", l + 1),
                row,
                value: rows[row][l],
                source_index: row,
            });
        }
        let target = rows.iter().map(|r| r[q - 1]).collect();
        Self::new(0, columns, target, etf_jump_rows)
    }

    pub fn q(&self) -> usize {
        self.columns.len() + 1
    }

    pub fn n_jumps(&self) -> usize {
        self.columns.len()
    }

    pub fn original_rows(&self) -> Vec<usize> {
        self.columns.iter().map(|c| c.row).collect()
    }

    /// Dense column `l`; `l = q - 1` is the target.
    pub fn column(&self, l: usize) -> Vec<T> {
        if l == self.columns.len() {
            return self.target.clone();
        }
        let mut out = vec![T::zero(); self.h];
        out[self.columns[l].row] = self.columns[l].value;
        out
    }

    /// Row-major dense matrix.
    pub fn dense(&self) -> Vec<Vec<T>> {
        let mut rows: Vec<Vec<T>> = (0..self.h)
            .map(|i| {
                let mut r = vec![T::zero(); self.q()];
                r[self.q() - 1] = self.target[i];
                r
            })
            .collect();
        for (l, c) in self.columns.iter().enumerate() {
            rows[c.row][l] = c.value;
        }
        rows
    }

    /// Row sums with each jump placed on `rows[l]`.
    ///
    /// Summation order is fixed: the target first, then jump columns left to
    /// right, so two callers placing jumps identically get identical bits.
    pub fn row_sums_at(&self, rows: &[usize]) -> Vec<T> {
        let mut sums = self.target.clone();
        for (c, &r) in self.columns.iter().zip(rows) {
            sums[r] = sums[r] + c.value;
        }
        sums
    }

    pub fn row_sums(&self) -> Vec<T> {
        self.row_sums_at(&self.original_rows())
    }

    /// Same matrix with every jump moved to `rows[l]`.
    pub fn with_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.len() != self.columns.len() {
            return Err(EventError::InvalidMatrix("one row per jump column required".into()));
        }
        let mut out = self.clone();
        for (c, &r) in out.columns.iter_mut().zip(rows) {
            if r >= self.h {
                return Err(EventError::InvalidMatrix(format!("row {r} outside window")));
            }
            c.row = r;
        }
        Ok(out)
    }

    /// Flat record for serialization.
    pub fn to_record(&self) -> EventMatrixRecord {
        EventMatrixRecord {
            window_start: self.window_start,
            h: self.h,
            q: self.q(),
            columns: self
                .columns
                .iter()
                .map(|c| (c.row, c.value.as_f64(), c.asset_id.clone()))
                .collect(),
            target: self.target.iter().map(|t| t.as_f64()).collect(),
            etf_jump_rows: self.etf_jump_rows.clone(),
        }
    }
}

/// Row sums of a dense row-major matrix.
pub fn row_sums<T: Scalar>(dense: &[Vec<T>]) -> Vec<T> {
    dense.iter().map(|r| ordered_sum(r.iter().copied())).collect()
}

/// Serialized form: jumps as `(row, value, asset)` triples and a dense target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventMatrixRecord {
    pub window_start: usize,
    pub h: usize,
    pub q: usize,
    pub columns: Vec<(usize, f64, String)>,
    pub target: Vec<f64>,
    pub etf_jump_rows: Vec<usize>,
}

/// Builds the jump-event matrix spanning `window_pre` returns before the
/// first and `window_post` after the last of `etf_jump_rows`.
pub fn build_jump_event_matrix<T: Scalar>(
    returns: &ClassifiedReturns<T>,
    etf_jump_rows: &[usize],
    window_pre: usize,
    window_post: usize,
) -> Result<JumpEventMatrix<T>> {
    let (&first, &last) = match (etf_jump_rows.iter().min(), etf_jump_rows.iter().max()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(EventError::Schema("event needs at least one ETF jump".into())),
    };
    if last >= returns.n_returns() {
        return Err(EventError::Schema(format!("ETF jump index {last} out of range")));
    }
    let (day_start, day_end) = returns.day_bounds(first);
    let start = first as i64 - window_pre as i64;
    let end = (last + window_post) as i64;
    if start < day_start as i64 || end > day_end as i64 {
        return Err(EventError::WindowClipped {
            start,
            end,
            day_start,
            day_end,
        });
    }
    let (start, end) = (start as usize, end as usize);

    let mut columns = Vec::new();
    for k in 0..returns.n_assets() {
        for r in start..=end {
            if returns.stock_jumps[k][r] {
                let value = returns.weighted_jump(k, r);
                // a flagged zero return carries nothing to move
                if value != T::zero() {
                    columns.push(JumpColumn {
                        asset: k,
                        asset_id: returns.asset_ids[k].clone(),
                        row: r - start,
                        value,
                        source_index: r,
                    });
                }
            }
        }
    }
    let target = (start..=end).map(|r| returns.target(r)).collect();
    let etf_rows = (start..=end)
        .filter(|&r| returns.etf_jumps[r])
        .map(|r| r - start)
        .collect();
    JumpEventMatrix::new(start, columns, target, etf_rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exclusion {
    /// An ETF jump falls in the first or last minutes of the day.
    EdgeOfDay,
    /// The window does not fit inside the trading day.
    WindowClipped,
}

/// ETF jumps grouped into one event window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventCandidate {
    pub etf_jump_indices: Vec<usize>,
    pub start: i64,
    pub end: i64,
    pub day: usize,
    pub excluded: Option<Exclusion>,
}

/// Groups ETF jumps into event windows, merging overlapping windows within a
/// day, and flags events that cannot be rearranged.
pub fn find_events<T: Scalar>(
    returns: &ClassifiedReturns<T>,
    window_pre: usize,
    window_post: usize,
    edge_exclusion: usize,
) -> Vec<EventCandidate> {
    let rpd = returns.returns_per_day;
    let mut events: Vec<EventCandidate> = Vec::new();
    for r in returns.etf_jump_indices() {
        let day = r / rpd;
        let start = r as i64 - window_pre as i64;
        match events.last_mut() {
            Some(ev) if ev.day == day && start <= ev.end => {
                ev.etf_jump_indices.push(r);
                ev.end = (r + window_post) as i64;
            }
            _ => events.push(EventCandidate {
                etf_jump_indices: vec![r],
                start,
                end: (r + window_post) as i64,
                day,
                excluded: None,
            }),
        }
    }
    for ev in &mut events {
        let day_start = ev.day * rpd;
        let day_end = day_start + rpd - 1;
        let near_edge = ev.etf_jump_indices.iter().any(|&r| {
            let pos = r - day_start;
            pos < edge_exclusion || pos + edge_exclusion >= rpd
        });
        ev.excluded = if near_edge {
            Some(Exclusion::EdgeOfDay)
        } else if ev.start < day_start as i64 || ev.end > day_end as i64 {
            Some(Exclusion::WindowClipped)
        } else {
            None
        };
    }
    events
}
