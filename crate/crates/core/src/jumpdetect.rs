//! Periodicity-adjusted jump test on intraday returns.
//!
//! Each return is divided by the intraday periodicity factor of its slot and
//! by a local volatility estimated from the bipower variation of the `K`
//! returns that precede it. The resulting statistic is compared with the
//! critical value of the maximum of `n` absolute standard normals, `n` being
//! the number of returns per day. Flagged returns go wholly into the jump
//! part, the rest into the continuous part.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eventmatrix::{ClassifiedReturns, EventError, PricePanel};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Event(#[from] EventError),
}

pub type Result<T> = std::result::Result<T, DetectError>;

/// Log returns of one asset, split into days of equal length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries<T> {
    pub values: Vec<T>,
    pub returns_per_day: usize,
}

impl<T: Real> ReturnSeries<T> {
    pub fn new(values: Vec<T>, returns_per_day: usize) -> Result<Self> {
        if returns_per_day == 0 {
            return Err(DetectError::InvalidArgument("returns_per_day must be positive".into()));
        }
        if !values.len().is_multiple_of(returns_per_day) {
            return Err(DetectError::InvalidArgument(format!(
                "{} returns do not split into days of {returns_per_day}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DetectError::InvalidArgument("non-finite return".into()));
        }
        Ok(Self {
            values,
            returns_per_day,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_days(&self) -> usize {
        self.values.len() / self.returns_per_day
    }

    pub fn day(&self, d: usize) -> &[T] {
        &self.values[d * self.returns_per_day..(d + 1) * self.returns_per_day]
    }

    pub fn slot(&self, i: usize) -> usize {
        i % self.returns_per_day
    }
}

/// Intraday scale factors, one per slot, with unit mean square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Periodicity<T> {
    pub factors: Vec<T>,
    /// Set when the sample was too short and unit factors were used.
    pub fallback: bool,
}

impl<T: Real> Periodicity<T> {
    pub fn unit(returns_per_day: usize) -> Self {
        Self {
            factors: vec![T::one(); returns_per_day],
            fallback: false,
        }
    }
}

/// Days needed before slot factors are estimated.
pub const MIN_PERIODICITY_DAYS: usize = 5;
/// Neighbouring slots pooled on each side of a slot.
pub const PERIODICITY_SMOOTHING: usize = 5;

fn bipower_mean<T: Real>(xs: &[T]) -> T {
    if xs.len() < 2 {
        return T::zero();
    }
    let s = xs
        .windows(2)
        .fold(T::zero(), |acc, w| acc + w[0].abs() * w[1].abs());
    s / T::from_count(xs.len() - 1)
}

/// Slot-wise robust scale: returns are standardized by their day's bipower
/// volatility, then each slot takes the median absolute standardized return
/// pooled over all days and the `smoothing` slots on either side.
pub fn estimate_periodicity_with<T: Real>(series: &ReturnSeries<T>, smoothing: usize) -> Periodicity<T> {
    let m = series.returns_per_day;
    if series.n_days() < MIN_PERIODICITY_DAYS {
        log::warn!(
            "{} days of data, fewer than {MIN_PERIODICITY_DAYS}; using unit periodicity",
            series.n_days()
        );
        return Periodicity {
            factors: vec![T::one(); m],
            fallback: true,
        };
    }
    let half_pi = T::lit(std::f64::consts::FRAC_PI_2);
    let mut by_slot: Vec<Vec<T>> = vec![Vec::new(); m];
    for d in 0..series.n_days() {
        let day = series.day(d);
        let scale = (half_pi * bipower_mean(day)).sqrt();
        if scale <= T::zero() {
            continue;
        }
        for (s, &r) in day.iter().enumerate() {
            by_slot[s].push(r.abs() / scale);
        }
    }
    let mut raw = Vec::with_capacity(m);
    let mut pool = Vec::new();
    for s in 0..m {
        pool.clear();
        for slot in by_slot
            .iter()
            .take((s + smoothing + 1).min(m))
            .skip(s.saturating_sub(smoothing))
        {
            pool.extend_from_slice(slot);
        }
        raw.push(median(&mut pool));
    }
    let positive_min = raw
        .iter()
        .copied()
        .filter(|&x| x > T::zero())
        .fold(None, |acc: Option<T>, x| Some(acc.map_or(x, |a| a.min(x))));
    let Some(floor) = positive_min else {
        log::warn!("no variation in the sample; using unit periodicity");
        return Periodicity {
            factors: vec![T::one(); m],
            fallback: true,
        };
    };
    let raw: Vec<T> = raw.into_iter().map(|x| if x > T::zero() { x } else { floor }).collect();
    let ms = raw.iter().fold(T::zero(), |a, &x| a + x * x) / T::from_count(m);
    let norm = ms.sqrt();
    Periodicity {
        factors: raw.into_iter().map(|x| x / norm).collect(),
        fallback: false,
    }
}

pub fn estimate_periodicity<T: Real>(series: &ReturnSeries<T>) -> Periodicity<T> {
    estimate_periodicity_with(series, PERIODICITY_SMOOTHING)
}

fn median<T: Real>(xs: &mut [T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    let n = xs.len();
    let cmp = |a: &T, b: &T| a.partial_cmp(b).expect("finite");
    let (_, &mut hi, _) = xs.select_nth_unstable_by(n / 2, cmp);
    if n % 2 == 1 {
        return hi;
    }
    let lo = xs[..n / 2].iter().copied().fold(T::neg_infinity(), T::max);
    (lo + hi) / T::lit(2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectConfig {
    pub alpha: f64,
    /// Returns in the local volatility window.
    pub window: usize,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            alpha: 0.001,
            window: 78,
        }
    }
}

impl DetectConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(DetectError::InvalidArgument(format!(
                "alpha {} outside (0, 1)",
                self.alpha
            )));
        }
        if self.window < 10 {
            return Err(DetectError::InvalidArgument(format!(
                "volatility window {} shorter than 10",
                self.window
            )));
        }
        Ok(())
    }
}

/// Critical value for the absolute standardized return at level `alpha`
/// when `n` returns are tested.
pub fn critical_value(alpha: f64, n: usize) -> f64 {
    let c = (2.0 / std::f64::consts::PI).sqrt();
    let n = (n.max(3)) as f64;
    let l = (2.0 * n.ln()).sqrt();
    let c_n = l / c - (std::f64::consts::PI.ln() + n.ln().ln()) / (2.0 * c * l);
    let s_n = 1.0 / (c * l);
    let beta = -(-(1.0 - alpha).ln()).ln();
    (c_n + s_n * beta) * c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpClassification<T> {
    pub jump_returns: Vec<T>,
    pub continuous_returns: Vec<T>,
    pub statistics: Vec<T>,
    pub threshold: T,
    pub is_jump: Vec<bool>,
}

impl<T: Real> JumpClassification<T> {
    pub fn jump_indices(&self) -> Vec<usize> {
        (0..self.is_jump.len()).filter(|&i| self.is_jump[i]).collect()
    }
}

pub fn detect_jumps<T: Real>(
    series: &ReturnSeries<T>,
    periodicity: &Periodicity<T>,
    config: &DetectConfig,
) -> Result<JumpClassification<T>> {
    config.validate()?;
    let k = config.window;
    let n = series.len();
    if k >= n {
        return Err(DetectError::InvalidArgument(format!(
            "volatility window {k} needs more than {n} returns"
        )));
    }
    if periodicity.factors.len() != series.returns_per_day {
        return Err(DetectError::InvalidArgument(format!(
            "{} periodicity factors for {} slots",
            periodicity.factors.len(),
            series.returns_per_day
        )));
    }
    let adjusted: Vec<T> = series
        .values
        .iter()
        .enumerate()
        .map(|(i, &r)| r / periodicity.factors[series.slot(i)])
        .collect();
    let half_pi = T::lit(std::f64::consts::FRAC_PI_2);
    let threshold = T::lit(critical_value(config.alpha, series.returns_per_day));
    let mut statistics = Vec::with_capacity(n);
    let mut is_jump = Vec::with_capacity(n);
    for i in 0..n {
        // the first returns borrow the window that follows them
        let window = if i >= k { &adjusted[i - k..i] } else { &adjusted[i + 1..i + 1 + k] };
        let vol = (half_pi * bipower_mean(window)).sqrt();
        let r = adjusted[i].abs();
        let stat = if vol > T::zero() {
            r / vol
        } else if r > T::zero() {
            T::infinity()
        } else {
            T::zero()
        };
        statistics.push(stat);
        is_jump.push(stat > threshold);
    }
    let (jump_returns, continuous_returns) = series
        .values
        .iter()
        .zip(&is_jump)
        .map(|(&r, &j)| if j { (r, T::zero()) } else { (T::zero(), r) })
        .unzip();
    Ok(JumpClassification {
        jump_returns,
        continuous_returns,
        statistics,
        threshold,
        is_jump,
    })
}

/// Estimates periodicity and detects jumps in one go.
pub fn classify<T: Real>(series: &ReturnSeries<T>, config: &DetectConfig) -> Result<JumpClassification<T>> {
    detect_jumps(series, &estimate_periodicity(series), config)
}

/// Jump flags for every stock and the ETF of a panel.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelDetection<T> {
    pub stocks: Vec<JumpClassification<T>>,
    pub etf: JumpClassification<T>,
}

impl<T: Real> PanelDetection<T> {
    pub fn classified(&self, panel: &PricePanel<T>) -> Result<ClassifiedReturns<T>> {
        Ok(ClassifiedReturns::new(
            panel,
            self.stocks.iter().map(|c| c.is_jump.clone()).collect(),
            self.etf.is_jump.clone(),
        )?)
    }
}

pub fn detect_panel<T: Real>(panel: &PricePanel<T>, config: &DetectConfig) -> Result<PanelDetection<T>> {
    panel.validate()?;
    let m = panel.returns_per_day;
    let stocks = panel
        .stock_returns()
        .into_iter()
        .map(|r| classify(&ReturnSeries::new(r, m)?, config))
        .collect::<Result<Vec<_>>>()?;
    let etf = classify(&ReturnSeries::new(panel.etf_returns(), m)?, config)?;
    Ok(PanelDetection { stocks, etf })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn gaussian(n: usize, sd: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = Normal::new(0.0, sd).unwrap();
        (0..n).map(|_| d.sample(&mut rng)).collect()
    }

    #[test]
    fn zero_returns_have_no_jumps() {
        let s = ReturnSeries::new(vec![0.0; 780], 390).unwrap();
        let c = classify(&s, &DetectConfig::default()).unwrap();
        assert!(c.is_jump.iter().all(|&j| !j));
        assert!(c.continuous_returns.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn decomposition_is_exact() {
        let mut v = gaussian(3900, 1e-3, 1);
        v[500] = 0.05;
        v[2000] = -0.04;
        let s = ReturnSeries::new(v.clone(), 390).unwrap();
        let c = classify(&s, &DetectConfig::default()).unwrap();
        for i in 0..v.len() {
            assert_eq!(c.jump_returns[i] + c.continuous_returns[i], v[i]);
            assert!(c.jump_returns[i] == 0.0 || c.continuous_returns[i] == 0.0);
        }
        assert!(c.is_jump[500] && c.is_jump[2000]);
    }

    #[test]
    fn injected_jump_is_flagged() {
        let sd = 2e-4;
        let mut v = gaussian(390 * 5, sd, 7);
        v[1000] = 20.0 * sd;
        v[40] = -20.0 * sd;
        let s = ReturnSeries::new(v, 390).unwrap();
        let c = classify(&s, &DetectConfig::default()).unwrap();
        assert!(c.is_jump[1000]);
        assert!(c.is_jump[40]);
        assert!(c.jump_indices().len() <= 4);
    }

    #[test]
    fn scale_invariance() {
        let mut v = gaussian(390 * 6, 1e-3, 3);
        v[100] = 0.02;
        let s1 = ReturnSeries::new(v.clone(), 390).unwrap();
        let s2 = ReturnSeries::new(v.iter().map(|x| x * 37.5).collect(), 390).unwrap();
        let c1 = classify(&s1, &DetectConfig::default()).unwrap();
        let c2 = classify(&s2, &DetectConfig::default()).unwrap();
        assert_eq!(c1.is_jump, c2.is_jump);
        for (a, b) in c1.statistics.iter().zip(&c2.statistics) {
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn flat_periodicity() {
        let s = ReturnSeries::new(gaussian(200 * 78, 1e-3, 11), 78).unwrap();
        let p = estimate_periodicity(&s);
        assert!(!p.fallback);
        assert!(p.factors.iter().all(|&f| (0.9..=1.1).contains(&f)), "{:?}", p.factors);
    }

    #[test]
    fn u_shape_periodicity() {
        let m = 78;
        let shape: Vec<f64> = (0..m)
            .map(|i| {
                let x = (i as f64 - (m - 1) as f64 / 2.0) / ((m - 1) as f64 / 2.0);
                1.0 + 0.8 * x * x
            })
            .collect();
        let v: Vec<f64> = gaussian(200 * m, 1e-3, 5)
            .into_iter()
            .enumerate()
            .map(|(i, x)| x * shape[i % m])
            .collect();
        let p = estimate_periodicity(&ReturnSeries::new(v, m).unwrap());
        let ms = (shape.iter().map(|s| s * s).sum::<f64>() / m as f64).sqrt();
        for (f, s) in p.factors.iter().zip(&shape) {
            let want = s / ms;
            assert!((f / want - 1.0).abs() < 0.1, "{f} vs {want}");
        }
        let mean_sq = p.factors.iter().map(|f| f * f).sum::<f64>() / m as f64;
        assert!((mean_sq - 1.0).abs() < 1e-12);
    }

    #[test]
    fn short_sample_falls_back() {
        let s = ReturnSeries::new(gaussian(390, 1e-3, 2), 390).unwrap();
        let p = estimate_periodicity(&s);
        assert!(p.fallback);
        assert!(p.factors.iter().all(|&f| f == 1.0));
    }

    #[test]
    fn argument_errors() {
        let s = ReturnSeries::new(gaussian(50, 1e-3, 2), 50).unwrap();
        let p = Periodicity::unit(50);
        assert!(detect_jumps(&s, &p, &DetectConfig { alpha: 0.001, window: 50 }).is_err());
        assert!(detect_jumps(&s, &p, &DetectConfig { alpha: 0.001, window: 5 }).is_err());
        assert!(detect_jumps(&s, &p, &DetectConfig { alpha: 1.5, window: 20 }).is_err());
        assert!(detect_jumps(&s, &Periodicity::unit(10), &DetectConfig { alpha: 0.01, window: 20 }).is_err());
        assert!(ReturnSeries::new(vec![0.0; 7], 5).is_err());
        assert!(ReturnSeries::<f64>::new(vec![f64::NAN; 5], 5).is_err());
    }

    #[test]
    fn critical_value_behaviour() {
        let a = critical_value(0.001, 390);
        let b = critical_value(0.05, 390);
        assert!(a > b && b > 1.0);
        assert!(critical_value(0.001, 23_400) > a);
    }

    #[test]
    fn single_precision() {
        let v: Vec<f32> = gaussian(780, 1e-3, 9).into_iter().map(|x| x as f32).collect();
        let mut v = v;
        v[300] = 0.03;
        let c = classify(&ReturnSeries::new(v, 390).unwrap(), &DetectConfig::default()).unwrap();
        assert!(c.is_jump[300]);
    }
}
