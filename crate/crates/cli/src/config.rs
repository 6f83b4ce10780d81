use std::path::Path;

use jumpsync::covport::BacktestConfig;
use jumpsync::pipeline::PipelineConfig;
use jumpsync::simgen::SimConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// JSON run configuration; every section is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub simulation: SimConfig,
    pub pipeline: PipelineConfig,
    pub backtest: BacktestConfig,
    /// Grid returns per trading day of input panels; defaults to the
    /// simulation grid.
    pub returns_per_day: Option<usize>,
}

/// Command-line values that override the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub budget: Option<usize>,
    pub alpha: Option<f64>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: Overrides) -> Result<()> {
        if let Some(seed) = o.seed {
            self.simulation.rng_seed = seed;
            self.backtest.bootstrap.seed = seed;
        }
        if let Some(budget) = o.budget {
            self.pipeline.budget = budget;
        }
        if let Some(alpha) = o.alpha {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(CliError::Schema(format!("alpha {alpha} outside (0, 1)")));
            }
            self.pipeline.detect.alpha = alpha;
        }
        Ok(())
    }

    pub fn returns_per_day(&self) -> usize {
        self.returns_per_day
            .unwrap_or(self.simulation.grid_points_per_day)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_sections_keep_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"pipeline": {"budget": 3}, "returns_per_day": 78}"#).unwrap();
        assert_eq!(c.pipeline.budget, 3);
        assert_eq!(c.pipeline.window_pre, 5);
        assert_eq!(c.returns_per_day(), 78);
        assert_eq!(c.simulation, SimConfig::default());
    }

    #[test]
    fn overrides_win() {
        let mut c = RunConfig::default();
        c.apply(Overrides {
            seed: Some(4),
            budget: Some(0),
            alpha: Some(0.01),
        })
        .unwrap();
        assert_eq!(c.simulation.rng_seed, 4);
        assert_eq!(c.backtest.bootstrap.seed, 4);
        assert_eq!(c.pipeline.budget, 0);
        assert_eq!(c.pipeline.detect.alpha, 0.01);
        assert!(c.apply(Overrides { alpha: Some(2.0), ..Overrides::default() }).is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"pipline": {}}"#).is_err());
    }
}
