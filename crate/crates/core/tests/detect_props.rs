use jumpsync::jumpdetect::{
    classify, critical_value, detect_jumps, detect_panel, estimate_periodicity, DetectConfig, Periodicity,
    ReturnSeries,
};
use jumpsync::simgen::{simulate, SimConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn gaussian(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            1e-3 * z
        })
        .collect()
}

#[test]
fn critical_value_grows_with_confidence_and_sample() {
    assert!(critical_value(0.001, 390) > critical_value(0.01, 390));
    assert!(critical_value(0.01, 390) > critical_value(0.05, 390));
    assert!(critical_value(0.001, 23_400) > critical_value(0.001, 390));
}

#[test]
fn u_shaped_volatility_is_recovered() {
    let per_day = 78;
    let days = 60;
    let shape: Vec<f64> = (0..per_day)
        .map(|i| {
            let x = i as f64 / (per_day - 1) as f64;
            1.0 + 1.5 * (2.0 * x - 1.0).powi(2)
        })
        .collect();
    let z = gaussian(per_day * days, 5);
    let r: Vec<f64> = z.iter().enumerate().map(|(i, v)| v * shape[i % per_day]).collect();
    let p = estimate_periodicity(&ReturnSeries::new(r, per_day).unwrap());
    assert!(!p.fallback);
    let norm = (shape.iter().map(|s| s * s).sum::<f64>() / per_day as f64).sqrt();
    let mid = per_day / 2;
    for i in 10..per_day - 10 {
        let expected = shape[i] / norm;
        assert!((p.factors[i] - expected).abs() < 0.15 * expected, "slot {i}");
    }
    assert!(p.factors[3] > 1.5 * p.factors[mid]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn isolated_spikes_are_flagged(seed in any::<u64>(), at in 100usize..780, sign in prop::bool::ANY) {
        let mut r = gaussian(780, seed);
        r[at] = if sign { 0.02 } else { -0.02 };
        let s = ReturnSeries::new(r, 390).unwrap();
        let c = detect_jumps(&s, &Periodicity::unit(390), &DetectConfig::default()).unwrap();
        prop_assert!(c.is_jump[at]);
        prop_assert_eq!(c.jump_returns[at], s.values[at]);
        prop_assert_eq!(c.continuous_returns[at], 0.0);
    }

    #[test]
    fn classification_splits_every_return(seed in any::<u64>()) {
        let s = ReturnSeries::new(gaussian(390 * 6, seed), 390).unwrap();
        let c = classify(&s, &DetectConfig::default()).unwrap();
        for i in 0..s.len() {
            prop_assert_eq!(c.jump_returns[i] + c.continuous_returns[i], s.values[i]);
            prop_assert!(c.jump_returns[i] == 0.0 || c.continuous_returns[i] == 0.0);
        }
    }
}

#[test]
fn simulated_cojumps_reach_the_etf() {
    let config = SimConfig {
        n_assets: 5,
        grid_points_per_day: 390,
        horizon_days: 5,
        jump_intensity: 2.0,
        jump_size_mean: 0.03,
        jump_size_sd: 0.002,
        jump_size_correlation: 0.9,
        common_jumps: true,
        rng_seed: 21,
        ..SimConfig::default()
    };
    let sim = simulate(&config).unwrap();
    let detection = detect_panel(&sim.observed_panel(), &DetectConfig::default()).unwrap();
    let flagged = detection.etf.jump_indices();
    let mut times: Vec<usize> = sim.efficient.jumps.iter().map(|j| j.time_index).collect();
    times.dedup();
    assert!(!times.is_empty());
    for t in times {
        // the ETF is efficiently priced: its jump sits on the return ending at t
        assert!(flagged.contains(&(t - 1)), "ETF jump at {t} missed: {flagged:?}");
    }
}
