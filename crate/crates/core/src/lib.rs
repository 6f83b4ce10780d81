//! Synchronizing sluggish price jumps across the constituents of an index.
//!
//! The crate simulates jump-diffusion prices whose jumps are impounded
//! gradually, detects jumps in intraday returns, collects the stock jumps
//! around every ETF jump into a jump-event matrix, and re-times those jumps
//! so that the spread between the synthetic index and the ETF varies as
//! little as possible. Realized covariances and minimum-variance portfolios
//! computed from raw and from re-timed returns can then be compared.
//!
//! The event-matrix and rearrangement code is generic over [`Scalar`], so it
//! runs on `f32`, `f64` and exact [`Rational64`]. Detection and portfolio
//! code needs [`Real`]. The simulator works in `f64`.

pub mod covport;
pub mod eventmatrix;
pub mod jumpdetect;
mod linalg;
pub mod pipeline;
pub mod rearrange;
pub mod scalar;
pub mod simgen;

pub use num_rational::Rational64;

pub use covport::{
    backtest, efficient_frontier, min_variance_weights, modified_sharpe, realized_covariance,
    sharpe_diff_test, BacktestConfig, BacktestReport, BootstrapConfig, CovSource, CovarianceEstimate,
    MinVariancePortfolio, PerformanceRow, PortfolioRun,
};
pub use eventmatrix::{
    build_jump_event_matrix, find_events, return_spread, synthetic_index, ClassifiedReturns,
    EventCandidate, JumpColumn, JumpEventMatrix, PricePanel,
};
pub use jumpdetect::{detect_jumps, estimate_periodicity, DetectConfig, JumpClassification, Periodicity, ReturnSeries};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineOutput};
pub use rearrange::{
    apply, brute_force_oracle, range, solve_rlp, trace, vanilla_ra, CoPermutation, Permutation,
    PermutationMatrix, RearrangementSolution, RlpConstraints,
};
pub use scalar::{Real, Scalar};
pub use simgen::{simulate, SimConfig, Simulation};

pub type PanelF64 = PricePanel<f64>;
pub type PanelF32 = PricePanel<f32>;
pub type JumpEventMatrixF64 = JumpEventMatrix<f64>;
pub type JumpEventMatrixF32 = JumpEventMatrix<f32>;
/// Jump-event matrix in exact rational arithmetic.
pub type ExactJumpEventMatrix = JumpEventMatrix<Rational64>;
pub type SolutionF64 = RearrangementSolution<f64>;
pub type ExactSolution = RearrangementSolution<Rational64>;
pub type ClassificationF64 = JumpClassification<f64>;
pub type CovarianceF64 = CovarianceEstimate<f64>;
