use jumpsync::covport::{backtest, BacktestConfig};
use jumpsync::pipeline::{run_pipeline, PipelineConfig};
use jumpsync::simgen::{simulate, SimConfig};
use proptest::prelude::*;

fn config(seed: u64, days: usize) -> SimConfig {
    SimConfig {
        n_assets: 4,
        grid_points_per_day: 390,
        horizon_days: days,
        jump_intensity: 3.0,
        jump_size_sd: 0.02,
        jump_size_correlation: 0.9,
        common_jumps: true,
        max_delay: Some(540),
        rng_seed: seed,
        ..SimConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn rearranging_keeps_window_totals(seed in any::<u64>()) {
        let sim = simulate(&config(seed, 1)).unwrap();
        let raw = sim.observed_panel();
        let out = run_pipeline(&raw, &PipelineConfig::default()).unwrap();
        prop_assert_eq!(&out.rearranged.etf, &raw.etf);
        for ev in out.events.iter().filter(|e| e.matrix.is_some()) {
            let (a, b) = (ev.candidate.start as usize, ev.candidate.end as usize + 1);
            for k in 0..raw.n_assets() {
                let before = raw.prices[k][b] - raw.prices[k][a];
                let after = out.rearranged.prices[k][b] - out.rearranged.prices[k][a];
                prop_assert!((before - after).abs() < 1e-12);
            }
        }
        let moved = out.rearranged.prices.iter().zip(&raw.prices).any(|(x, y)| x != y);
        prop_assert_eq!(moved, out.n_rearranged() > 0);
        prop_assert_eq!(out.rearrangement_days.is_empty(), out.n_rearranged() == 0);
    }
}

#[test]
fn unrearranged_backtest_runs_coincide() {
    let sim = simulate(&config(8, 40)).unwrap();
    let raw = sim.observed_panel();
    let cfg = BacktestConfig {
        lookback: 10,
        ..BacktestConfig::default()
    };
    let report = backtest(&raw, &raw, &[5, 12, 30], &cfg).unwrap();
    assert_eq!(report.raw.daily_returns, report.rearranged.daily_returns);
    assert_eq!(report.raw.weights, report.rearranged.weights);
    assert_eq!(report.p_value, Some(1.0));
}
