//! Realized covariance, minimum-variance portfolios and their evaluation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::eventmatrix::PricePanel;
use crate::linalg::{cho_solve, cholesky, dot, quad_form, trace};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CovError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("target return {target} is not attainable")]
    Infeasible { target: f64 },
}

pub type Result<T> = std::result::Result<T, CovError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovSource {
    Raw,
    Rearranged,
    Efficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEstimate<T> {
    pub matrix: Vec<Vec<T>>,
    pub source: CovSource,
}

impl<T: Real> CovarianceEstimate<T> {
    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn frobenius_distance(&self, other: &Self) -> T {
        self.matrix
            .iter()
            .flatten()
            .zip(other.matrix.iter().flatten())
            .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b))
            .sqrt()
    }

    pub fn is_symmetric(&self) -> bool {
        let p = self.dim();
        (0..p).all(|i| (0..i).all(|j| self.matrix[i][j] == self.matrix[j][i]))
    }

    pub fn trace(&self) -> T {
        trace(&self.matrix)
    }
}

/// Sum of outer products of the return vectors of one day.
///
/// `returns` is asset-major: one slice of intraday returns per asset.
pub fn realized_covariance<T: Real>(returns: &[Vec<T>], source: CovSource) -> Result<CovarianceEstimate<T>> {
    let n = returns.first().map_or(0, Vec::len);
    if returns.iter().any(|r| r.len() != n) {
        return Err(CovError::Schema("return series of different lengths".into()));
    }
    let p = returns.len();
    let mut matrix = vec![vec![T::zero(); p]; p];
    for i in 0..p {
        for j in 0..=i {
            let s = dot(&returns[i], &returns[j]);
            matrix[i][j] = s;
            matrix[j][i] = s;
        }
    }
    Ok(CovarianceEstimate { matrix, source })
}

/// One realized covariance per day of the panel's stocks.
pub fn daily_realized_covariances<T: Real>(
    panel: &PricePanel<T>,
    source: CovSource,
) -> Result<Vec<CovarianceEstimate<T>>> {
    panel.validate().map_err(|e| CovError::Schema(e.to_string()))?;
    let m = panel.returns_per_day;
    let returns = panel.stock_returns();
    (0..panel.n_returns() / m)
        .map(|d| {
            let day: Vec<Vec<T>> = returns.iter().map(|r| r[d * m..(d + 1) * m].to_vec()).collect();
            realized_covariance(&day, source)
        })
        .collect()
}

/// Relative ridge added when the covariance is numerically singular.
pub const RIDGE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinVariancePortfolio<T> {
    pub weights: Vec<T>,
    pub target: T,
    pub expected_return: T,
    pub variance: T,
    pub ridged: bool,
}

struct Factored<T> {
    chol: Vec<Vec<T>>,
    ridged: bool,
}

fn factor<T: Real>(c: &[Vec<T>]) -> Result<Factored<T>> {
    let p = c.len();
    if p == 0 || c.iter().any(|r| r.len() != p) {
        return Err(CovError::Schema("covariance must be a non-empty square matrix".into()));
    }
    if c.iter().flatten().any(|x| !x.is_finite()) {
        return Err(CovError::Numerical("non-finite covariance entry".into()));
    }
    if let Some(chol) = cholesky(c) {
        return Ok(Factored { chol, ridged: false });
    }
    let eps = T::lit(RIDGE) * trace(c) / T::from_count(p);
    log::warn!("covariance is not positive definite; adding a ridge of {:?}", eps);
    let mut r = c.to_vec();
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = row[i] + eps;
    }
    cholesky(&r)
        .map(|chol| Factored { chol, ridged: true })
        .ok_or_else(|| CovError::Numerical("covariance is singular after the ridge".into()))
}

struct Frontier<T> {
    f: Factored<T>,
    c: Vec<Vec<T>>,
    ci1: Vec<T>,
    cimu: Vec<T>,
    a: T,
    b: T,
    cc: T,
    d: T,
    mu: Vec<T>,
}

impl<T: Real> Frontier<T> {
    fn new(c: &[Vec<T>], mu: &[T]) -> Result<Self> {
        if mu.len() != c.len() {
            return Err(CovError::Schema(format!(
                "{} expected returns for a {}x{} covariance",
                mu.len(),
                c.len(),
                c.len()
            )));
        }
        let f = factor(c)?;
        let ones = vec![T::one(); c.len()];
        let ci1 = cho_solve(&f.chol, &ones);
        let cimu = cho_solve(&f.chol, mu);
        let a = ones.iter().zip(&ci1).fold(T::zero(), |s, (&x, &y)| s + x * y);
        let b = dot(&ci1, mu);
        let cc = dot(&cimu, mu);
        let d = a * cc - b * b;
        Ok(Self {
            f,
            c: c.to_vec(),
            ci1,
            cimu,
            a,
            b,
            cc,
            d,
            mu: mu.to_vec(),
        })
    }

    fn degenerate(&self) -> bool {
        !(self.d > T::lit(1e-12) * self.a * self.cc.abs())
    }

    fn combine(&self, lambda: T, gamma: T) -> Vec<T> {
        self.ci1
            .iter()
            .zip(&self.cimu)
            .map(|(&u, &v)| lambda * u + gamma * v)
            .collect()
    }

    fn portfolio(&self, target: T) -> Result<MinVariancePortfolio<T>> {
        let mut w = if self.degenerate() {
            let w: Vec<T> = self.ci1.iter().map(|&x| x / self.a).collect();
            let er = dot(&w, &self.mu);
            let tol = T::lit(1e-10) * T::one().max(target.abs());
            if (er - target).abs() > tol {
                return Err(CovError::Infeasible {
                    target: target.to_f64().unwrap_or(f64::NAN),
                });
            }
            w
        } else {
            let lambda = (self.cc - self.b * target) / self.d;
            let gamma = (self.a * target - self.b) / self.d;
            self.combine(lambda, gamma)
        };
        // one refinement step on the two equality constraints
        let r1 = T::one() - w.iter().fold(T::zero(), |s, &x| s + x);
        if self.degenerate() {
            let step = r1 / self.a;
            for (wi, &u) in w.iter_mut().zip(&self.ci1) {
                *wi = *wi + step * u;
            }
        } else {
            let r2 = target - dot(&w, &self.mu);
            let dl = (self.cc * r1 - self.b * r2) / self.d;
            let dg = (self.a * r2 - self.b * r1) / self.d;
            for (wi, x) in w.iter_mut().zip(self.combine(dl, dg)) {
                *wi = *wi + x;
            }
        }
        Ok(MinVariancePortfolio {
            expected_return: dot(&w, &self.mu),
            variance: quad_form(&self.c, &w),
            weights: w,
            target,
            ridged: self.f.ridged,
        })
    }
}

/// Closed-form minimum-variance weights subject to full investment and a
/// target expected return.
pub fn min_variance_weights<T: Real>(c: &[Vec<T>], mu: &[T], target: T) -> Result<MinVariancePortfolio<T>> {
    Frontier::new(c, mu)?.portfolio(target)
}

/// Global minimum-variance weights (full investment only).
pub fn global_min_variance<T: Real>(c: &[Vec<T>]) -> Result<Vec<T>> {
    let f = factor(c)?;
    let x = cho_solve(&f.chol, &vec![T::one(); c.len()]);
    let s = x.iter().fold(T::zero(), |a, &v| a + v);
    Ok(x.into_iter().map(|v| v / s).collect())
}

/// Minimum-variance portfolios on an even grid of targets from the lowest
/// to the highest expected return.
pub fn efficient_frontier<T: Real>(
    c: &[Vec<T>],
    mu: &[T],
    n_targets: usize,
) -> Result<Vec<MinVariancePortfolio<T>>> {
    if n_targets == 0 {
        return Err(CovError::InvalidArgument("at least one target required".into()));
    }
    let fr = Frontier::new(c, mu)?;
    let lo = mu.iter().copied().fold(T::infinity(), T::min);
    let hi = mu.iter().copied().fold(T::neg_infinity(), T::max);
    (0..n_targets)
        .map(|k| {
            let t = if n_targets == 1 {
                lo
            } else {
                lo + (hi - lo) * T::from_count(k) / T::from_count(n_targets - 1)
            };
            fr.portfolio(if fr.degenerate() { dot(&fr.ci1, &fr.mu) / fr.a } else { t })
        })
        .collect()
}

/// Minimum number of observations for the modified Sharpe ratio.
pub const MIN_SHARPE_OBS: usize = 30;

fn msr_from_raw<T: Real>(m: [T; 4], z: T) -> Option<T> {
    let [m1, m2, m3, m4] = m;
    let var = m2 - m1 * m1;
    if !(var > T::zero()) {
        return None;
    }
    let sd = var.sqrt();
    let c3 = m3 - T::lit(3.0) * m1 * m2 + T::lit(2.0) * m1 * m1 * m1;
    let c4 = m4 - T::lit(4.0) * m1 * m3 + T::lit(6.0) * m1 * m1 * m2 - T::lit(3.0) * m1 * m1 * m1 * m1;
    let skew = c3 / (var * sd);
    let kurt = c4 / (var * var) - T::lit(3.0);
    let z2 = z * z;
    let z3 = z2 * z;
    let zcf = z + (z2 - T::one()) * skew / T::lit(6.0) + (z3 - T::lit(3.0) * z) * kurt / T::lit(24.0)
        - (T::lit(2.0) * z3 - T::lit(5.0) * z) * skew * skew / T::lit(36.0);
    let mvar = -(m1 + zcf * sd);
    if mvar == T::zero() || !mvar.is_finite() {
        return None;
    }
    Some(m1 / mvar)
}

fn raw_moments<T: Real>(x: &[T]) -> [T; 4] {
    let n = T::from_count(x.len());
    let mut m = [T::zero(); 4];
    for &v in x {
        let v2 = v * v;
        m[0] = m[0] + v;
        m[1] = m[1] + v2;
        m[2] = m[2] + v2 * v;
        m[3] = m[3] + v2 * v2;
    }
    m.map(|s| s / n)
}

fn normal_quantile(p: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(p)
}

/// Mean over the Cornish-Fisher modified value at risk at level `alpha`.
pub fn modified_sharpe<T: Real>(excess: &[T], alpha: f64) -> Result<T> {
    if excess.len() < MIN_SHARPE_OBS {
        return Err(CovError::InvalidArgument(format!(
            "{} observations, at least {MIN_SHARPE_OBS} needed",
            excess.len()
        )));
    }
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(CovError::InvalidArgument(format!("alpha {alpha} outside (0, 0.5)")));
    }
    msr_from_raw(raw_moments(excess), T::lit(normal_quantile(alpha)))
        .ok_or_else(|| CovError::Degenerate("zero variance or zero modified VaR".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BootstrapConfig {
    pub n_boot: usize,
    pub block_len: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            n_boot: 1000,
            block_len: 5,
            alpha: 0.05,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpeDiff<T> {
    pub difference: T,
    pub std_error: T,
    pub p_value: T,
}

/// Moment series `(a, a^2, a^3, a^4, b, ..., b^4)` for each observation.
fn moment_rows<T: Real>(a: &[T], b: &[T]) -> Vec<[T; 8]> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let x2 = x * x;
            let y2 = y * y;
            [x, x2, x2 * x, x2 * x2, y, y2, y2 * y, y2 * y2]
        })
        .collect()
}

fn diff_of<T: Real>(m: &[T; 8], z: T) -> Option<T> {
    Some(msr_from_raw([m[0], m[1], m[2], m[3]], z)? - msr_from_raw([m[4], m[5], m[6], m[7]], z)?)
}

fn gradient<T: Real>(m: &[T; 8], z: T) -> Option<[T; 8]> {
    let sa = m[1].max(T::min_positive_value()).sqrt();
    let sb = m[5].max(T::min_positive_value()).sqrt();
    let mut g = [T::zero(); 8];
    for k in 0..8 {
        let s = if k < 4 { sa } else { sb };
        let h = T::lit(1e-5) * s.powi((k % 4) as i32 + 1);
        let mut up = *m;
        let mut dn = *m;
        up[k] = up[k] + h;
        dn[k] = dn[k] - h;
        g[k] = (diff_of(&up, z)? - diff_of(&dn, z)?) / (h + h);
    }
    Some(g)
}

/// `grad' Psi grad / n` with `Psi` estimated from block sums.
fn block_se<T: Real>(rows: &[[T; 8]], blocks: &[std::ops::Range<usize>], grad: &[T; 8]) -> T {
    let n = rows.len();
    let mut mean = [T::zero(); 8];
    for r in rows {
        for k in 0..8 {
            mean[k] = mean[k] + r[k];
        }
    }
    let nn = T::from_count(n);
    let mean = mean.map(|s| s / nn);
    let mut acc = T::zero();
    let mut len = 0usize;
    for blk in blocks {
        // projected block sum: grad . sum_t (y_t - mean)
        let mut s = T::zero();
        for t in blk.clone() {
            let r = &rows[t % n];
            for k in 0..8 {
                s = s + grad[k] * (r[k] - mean[k]);
            }
        }
        acc = acc + s * s;
        len += blk.len();
    }
    let psi = acc / T::from_count(len);
    (psi / nn).max(T::zero()).sqrt()
}

fn studentized<T: Real>(diff: T, se: T) -> T {
    if se > T::zero() {
        diff.abs() / se
    } else if diff == T::zero() {
        T::zero()
    } else {
        T::infinity()
    }
}

/// Two-sided p-value for equal modified Sharpe ratios of two paired
/// series, from a studentized circular block bootstrap.
pub fn sharpe_diff_test<T: Real>(a: &[T], b: &[T], config: &BootstrapConfig) -> Result<SharpeDiff<T>> {
    let n = a.len();
    let l = config.block_len;
    if b.len() != n {
        return Err(CovError::Schema("paired series of different lengths".into()));
    }
    if l == 0 || n < 2 * l {
        return Err(CovError::InvalidArgument(format!(
            "{n} observations are too few for blocks of {l}"
        )));
    }
    if config.n_boot == 0 {
        return Err(CovError::InvalidArgument("n_boot must be positive".into()));
    }
    let z = T::lit(normal_quantile(config.alpha));
    if a == b {
        return Ok(SharpeDiff {
            difference: T::zero(),
            std_error: T::zero(),
            p_value: T::one(),
        });
    }
    let rows = moment_rows(a, b);
    let m = mean_row(&rows);
    let degenerate = || CovError::Degenerate("modified Sharpe undefined for an input series".into());
    let d = diff_of(&m, z).ok_or_else(degenerate)?;
    let g = gradient(&m, z).ok_or_else(degenerate)?;
    let overlapping: Vec<_> = (0..n).map(|s| s..s + l).collect();
    let se = block_se(&rows, &overlapping, &g);
    let observed = studentized(d, se);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n_blocks = n.div_ceil(l);
    let mut exceed = 0usize;
    let mut sample = Vec::with_capacity(n_blocks * l);
    for _ in 0..config.n_boot {
        sample.clear();
        for _ in 0..n_blocks {
            let s = rng.random_range(0..n);
            sample.extend((s..s + l).map(|t| rows[t % n]));
        }
        sample.truncate(n);
        let ms = mean_row(&sample);
        let stat = match (diff_of(&ms, z), gradient(&ms, z)) {
            (Some(ds), Some(gs)) => {
                let blocks: Vec<_> = (0..n).step_by(l).map(|s| s..(s + l).min(n)).collect();
                studentized(ds - d, block_se(&sample, &blocks, &gs))
            }
            _ => T::infinity(),
        };
        if stat >= observed {
            exceed += 1;
        }
    }
    Ok(SharpeDiff {
        difference: d,
        std_error: se,
        p_value: T::from_count(exceed + 1) / T::from_count(config.n_boot + 1),
    })
}

fn mean_row<T: Real>(rows: &[[T; 8]]) -> [T; 8] {
    let mut m = [T::zero(); 8];
    for r in rows {
        for k in 0..8 {
            m[k] = m[k] + r[k];
        }
    }
    let n = T::from_count(rows.len());
    m.map(|s| s / n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BacktestConfig {
    /// Days in the trailing mean of daily returns.
    pub lookback: usize,
    pub n_targets: usize,
    pub bootstrap: BootstrapConfig,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        Self {
            lookback: 60,
            n_targets: 100,
            bootstrap: BootstrapConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioRun<T> {
    pub source: CovSource,
    /// Weights held during each day.
    pub weights: Vec<Vec<T>>,
    pub daily_returns: Vec<T>,
    pub excess_returns: Vec<T>,
    pub closing_value: T,
    pub sd: T,
    pub modified_sharpe: Option<T>,
    pub optimization_days: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport<T> {
    pub days: usize,
    pub raw: PortfolioRun<T>,
    pub rearranged: PortfolioRun<T>,
    pub p_value: Option<T>,
    /// Days whose covariance input was unusable.
    pub skipped_days: Vec<usize>,
}

/// Row of the performance table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceRow {
    pub days: usize,
    pub cojumps: usize,
    pub rearranged_events: usize,
    pub closing_value_raw: f64,
    pub closing_value_rearranged: f64,
    pub sd_raw: f64,
    pub sd_rearranged: f64,
    pub msharpe_raw: Option<f64>,
    pub msharpe_rearranged: Option<f64>,
    pub p_value: Option<f64>,
}

impl<T: Real> BacktestReport<T> {
    pub fn performance_row(&self, cojumps: usize, rearranged_events: usize) -> PerformanceRow {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        PerformanceRow {
            days: self.days,
            cojumps,
            rearranged_events,
            closing_value_raw: f(self.raw.closing_value),
            closing_value_rearranged: f(self.rearranged.closing_value),
            sd_raw: f(self.raw.sd),
            sd_rearranged: f(self.rearranged.sd),
            msharpe_raw: self.raw.modified_sharpe.map(f),
            msharpe_rearranged: self.rearranged.modified_sharpe.map(f),
            p_value: self.p_value.map(f),
        }
    }
}

fn sample_sd<T: Real>(x: &[T]) -> T {
    if x.len() < 2 {
        return T::zero();
    }
    let n = T::from_count(x.len());
    let mean = x.iter().fold(T::zero(), |a, &v| a + v) / n;
    let ss = x.iter().fold(T::zero(), |a, &v| a + (v - mean) * (v - mean));
    (ss / T::from_count(x.len() - 1)).sqrt()
}

fn day_slices<T: Real>(series: &[Vec<T>], d: usize, m: usize) -> Vec<Vec<T>> {
    series.iter().map(|r| r[d * m..(d + 1) * m].to_vec()).collect()
}

fn run_portfolio<T: Real>(
    panel: &PricePanel<T>,
    daily_simple: &[Vec<T>],
    etf_simple: &[T],
    rebalance: &[bool],
    config: &BacktestConfig,
    source: CovSource,
    skipped: &mut Vec<usize>,
) -> Result<PortfolioRun<T>> {
    let p = panel.n_assets();
    let m = panel.returns_per_day;
    let n_days = etf_simple.len();
    let intraday = panel.stock_returns();
    let mut w = vec![T::one() / T::from_count(p); p];
    let mut weights = Vec::with_capacity(n_days);
    let mut daily_returns = Vec::with_capacity(n_days);
    let mut optimization_days = Vec::new();
    for d in 0..n_days {
        let r = (0..p).fold(T::zero(), |acc, k| acc + w[k] * daily_simple[k][d]);
        weights.push(w.clone());
        daily_returns.push(r);
        if !rebalance[d] {
            continue;
        }
        let day = day_slices(&intraday, d, m);
        if day.iter().flatten().any(|x| !x.is_finite()) {
            log::warn!("day {d}: non-finite returns, skipped");
            skipped.push(d);
            continue;
        }
        let cov = realized_covariance(&day, source)?;
        let from = (d + 1).saturating_sub(config.lookback);
        let span = T::from_count(d + 1 - from);
        let mu: Vec<T> = (0..p)
            .map(|k| daily_simple[k][from..=d].iter().fold(T::zero(), |a, &x| a + x) / span)
            .collect();
        match efficient_frontier(&cov.matrix, &mu, config.n_targets) {
            Ok(frontier) => {
                let best = frontier
                    .into_iter()
                    .reduce(|a, b| if b.variance < a.variance { b } else { a })
                    .expect("non-empty frontier");
                w = best.weights;
                optimization_days.push(d);
            }
            Err(e) => {
                log::warn!("day {d}: {e}; weights kept");
                skipped.push(d);
            }
        }
    }
    let excess_returns: Vec<T> = daily_returns.iter().zip(etf_simple).map(|(&r, &e)| r - e).collect();
    let closing_value = daily_returns.iter().fold(T::one(), |v, &r| v * (T::one() + r));
    Ok(PortfolioRun {
        source,
        weights,
        sd: sample_sd(&daily_returns),
        modified_sharpe: modified_sharpe(&excess_returns, config.bootstrap.alpha).ok(),
        daily_returns,
        excess_returns,
        closing_value,
        optimization_days,
    })
}

/// Daily minimum-variance backtest run twice, once on raw and once on
/// rearranged intraday returns.
///
/// Weights are re-optimized after the close of every day in
/// `rearrangement_days` and held from the next day on; before the first
/// optimization the portfolio is equally weighted. Both runs earn the raw
/// daily returns, so they differ only through their covariance input.
pub fn backtest<T: Real>(
    raw: &PricePanel<T>,
    rearranged: &PricePanel<T>,
    rearrangement_days: &[usize],
    config: &BacktestConfig,
) -> Result<BacktestReport<T>> {
    raw.validate().map_err(|e| CovError::Schema(e.to_string()))?;
    rearranged.validate().map_err(|e| CovError::Schema(e.to_string()))?;
    if raw.len() != rearranged.len()
        || raw.n_assets() != rearranged.n_assets()
        || raw.returns_per_day != rearranged.returns_per_day
    {
        return Err(CovError::Schema("raw and rearranged panels differ in shape".into()));
    }
    let m = raw.returns_per_day;
    let n_days = raw.n_returns() / m;
    if n_days == 0 {
        return Err(CovError::Schema("panel shorter than one day".into()));
    }
    let simple = |r: &[T], d: usize| r[d * m..(d + 1) * m].iter().fold(T::zero(), |a, &x| a + x).exp() - T::one();
    let stock = raw.stock_returns();
    let daily_simple: Vec<Vec<T>> = stock.iter().map(|r| (0..n_days).map(|d| simple(r, d)).collect()).collect();
    let etf = raw.etf_returns();
    let etf_simple: Vec<T> = (0..n_days).map(|d| simple(&etf, d)).collect();
    let mut rebalance = vec![false; n_days];
    for &d in rearrangement_days {
        if d < n_days {
            rebalance[d] = true;
        } else {
            log::warn!("rearrangement day {d} outside the panel, ignored");
        }
    }
    let mut skipped = Vec::new();
    let raw_run = run_portfolio(raw, &daily_simple, &etf_simple, &rebalance, config, CovSource::Raw, &mut skipped)?;
    let rear_run = run_portfolio(
        rearranged,
        &daily_simple,
        &etf_simple,
        &rebalance,
        config,
        CovSource::Rearranged,
        &mut skipped,
    )?;
    skipped.sort_unstable();
    skipped.dedup();
    let p_value = sharpe_diff_test(&raw_run.excess_returns, &rear_run.excess_returns, &config.bootstrap)
        .ok()
        .map(|t| t.p_value);
    Ok(BacktestReport {
        days: n_days,
        raw: raw_run,
        rearranged: rear_run,
        p_value,
        skipped_days: skipped,
    })
}
