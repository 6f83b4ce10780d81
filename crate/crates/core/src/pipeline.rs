//! Detection, event matrices and rearrangement chained over a panel.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eventmatrix::{
    build_jump_event_matrix, find_events, EventCandidate, EventError, JumpEventMatrix, PricePanel,
};
use crate::jumpdetect::{detect_panel, DetectConfig, DetectError, PanelDetection};
use crate::rearrange::{solve_rlp, trace, RearrangeError, RearrangementSolution, RlpConstraints, Trace};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Event(#[from] EventError),
    #[error(transparent)]
    Rearrange(#[from] RearrangeError),
}

pub type Result<T> = std::result::Result<T, PipelineError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub detect: DetectConfig,
    pub window_pre: usize,
    pub window_post: usize,
    /// ETF jumps this close to the open or close are not rearranged.
    pub edge_exclusion: usize,
    pub budget: usize,
    pub constraints: RlpConstraints,
    /// Also record the solution for every budget up to `budget`.
    pub trace: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            detect: DetectConfig::default(),
            window_pre: 5,
            window_post: 5,
            edge_exclusion: 10,
            budget: 10,
            constraints: RlpConstraints::empirical(),
            trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventReport<T> {
    pub candidate: EventCandidate,
    pub matrix: Option<JumpEventMatrix<T>>,
    pub solution: Option<RearrangementSolution<T>>,
    pub trace: Option<Trace<T>>,
}

impl<T: Real> EventReport<T> {
    pub fn is_rearranged(&self) -> bool {
        self.solution.as_ref().is_some_and(|s| !s.is_identity())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput<T> {
    pub detection: PanelDetection<T>,
    pub events: Vec<EventReport<T>>,
    pub rearranged: PricePanel<T>,
    /// Days with at least one rearranged event, ascending.
    pub rearrangement_days: Vec<usize>,
}

impl<T: Real> PipelineOutput<T> {
    pub fn n_built(&self) -> usize {
        self.events.iter().filter(|e| e.matrix.is_some()).count()
    }

    pub fn n_rearranged(&self) -> usize {
        self.events.iter().filter(|e| e.is_rearranged()).count()
    }
}

/// Moves each stock jump of `matrix` to its new row in `panel`.
///
/// A jump return `J` moved back by `s` returns raises the `s` log prices
/// between its new and its old position by `J`; every other price keeps
/// its bits.
pub fn apply_to_panel<T: Real>(
    panel: &mut PricePanel<T>,
    matrix: &JumpEventMatrix<T>,
    solution: &RearrangementSolution<T>,
) {
    for (col, &s) in matrix.columns.iter().zip(&solution.shifts) {
        if s == 0 {
            continue;
        }
        let t = col.source_index;
        let prices = &mut panel.prices[col.asset];
        let jump = prices[t + 1] - prices[t];
        for p in &mut prices[t + 1 - s..=t] {
            *p = *p + jump;
        }
    }
}

pub fn run_pipeline<T: Real>(panel: &PricePanel<T>, config: &PipelineConfig) -> Result<PipelineOutput<T>> {
    let detection = detect_panel(panel, &config.detect)?;
    let classified = detection.classified(panel)?;
    let candidates = find_events(
        &classified,
        config.window_pre,
        config.window_post,
        config.edge_exclusion,
    );
    let mut rearranged = panel.clone();
    let mut events = Vec::with_capacity(candidates.len());
    let mut days = Vec::new();
    for candidate in candidates {
        if candidate.excluded.is_some() {
            events.push(EventReport {
                candidate,
                matrix: None,
                solution: None,
                trace: None,
            });
            continue;
        }
        let matrix = build_jump_event_matrix(
            &classified,
            &candidate.etf_jump_indices,
            config.window_pre,
            config.window_post,
        )?;
        let solution = solve_rlp(&matrix, config.budget, &config.constraints)?;
        let tr = if config.trace {
            Some(trace(&matrix, config.budget, &config.constraints)?)
        } else {
            None
        };
        if !solution.is_identity() {
            apply_to_panel(&mut rearranged, &matrix, &solution);
            if days.last() != Some(&candidate.day) {
                days.push(candidate.day);
            }
        }
        events.push(EventReport {
            candidate,
            matrix: Some(matrix),
            solution: Some(solution),
            trace: tr,
        });
    }
    Ok(PipelineOutput {
        detection,
        events,
        rearranged,
        rearrangement_days: days,
    })
}
