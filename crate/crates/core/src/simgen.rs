//! Efficient and sluggishly observed price paths.
//!
//! The efficient log price of every asset is a driftless Brownian motion plus
//! a compound Poisson jump component. The observed price adds i.i.d.
//! microstructure noise to the continuous part and impounds every efficient
//! jump gradually through a random step function whose levels are sampled
//! from a Brownian bridge running from 0 to 1.
//!
//! Time has two clocks. Prices live on an integer grid with
//! `grid_points_per_day` returns per day, while step functions are measured in
//! whole seconds; `seconds_per_day / grid_points_per_day` converts between
//! them.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Exp, Normal, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eventmatrix::PricePanel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, SimError>;

/// Parameters of the data generating process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_assets: usize,
    /// Returns per day; a day holds `grid_points_per_day + 1` prices.
    pub grid_points_per_day: usize,
    pub horizon_days: usize,
    /// Length of the trading day in seconds.
    pub seconds_per_day: f64,
    /// Annualized return volatility; daily variance is `vol^2 / trading_days_per_year`.
    pub annualized_vol: f64,
    pub trading_days_per_year: f64,
    /// Noise-to-signal ratio `sqrt(n * omega^2 / IV)`.
    pub noise_ratio: f64,
    /// Expected number of jumps per asset per day.
    pub jump_intensity: f64,
    pub jump_size_mean: f64,
    pub jump_size_sd: f64,
    /// Equicorrelation of jump sizes within a common jump event.
    pub jump_size_correlation: f64,
    /// Equicorrelation of the Brownian increments across assets.
    pub diffusion_correlation: f64,
    /// Share jump arrival times across all assets.
    pub common_jumps: bool,
    pub step_count_trials: u64,
    pub step_count_prob: f64,
    /// Mean waiting time per step is `step_wait_scale * N^D` seconds.
    pub step_wait_scale: f64,
    /// Seconds per unit of time of the bridge's Wiener process.
    pub bridge_time_scale: f64,
    pub bridge_volatility: f64,
    /// Redraws of the waiting times before an overrunning delay is truncated.
    pub max_redraws: usize,
    /// Upper bound in seconds on the total impoundment delay.
    pub max_delay: Option<u64>,
    pub initial_log_price: f64,
    pub rng_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_assets: 1,
            grid_points_per_day: 23_400,
            horizon_days: 1,
            seconds_per_day: 23_400.0,
            annualized_vol: 0.039f64.sqrt(),
            trading_days_per_year: 252.0,
            noise_ratio: 0.5,
            jump_intensity: 1.0,
            jump_size_mean: 0.0,
            jump_size_sd: 0.005,
            jump_size_correlation: 0.0,
            diffusion_correlation: 0.0,
            common_jumps: false,
            step_count_trials: 5,
            step_count_prob: 0.4,
            step_wait_scale: 15.0,
            bridge_time_scale: 60.0,
            bridge_volatility: 1.0,
            max_redraws: 10,
            max_delay: None,
            initial_log_price: 100f64.ln(),
            rng_seed: 0,
        }
    }
}

fn check(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(SimError::InvalidConfig(msg.to_string()))
    }
}

fn unit_interval(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        check(self.n_assets >= 1, "n_assets must be >= 1")?;
        check(self.grid_points_per_day >= 1, "grid_points_per_day must be >= 1")?;
        check(self.horizon_days >= 1, "horizon_days must be >= 1")?;
        check(self.step_count_trials >= 1, "step_count_trials must be >= 1")?;
        check(
            self.seconds_per_day.is_finite() && self.seconds_per_day > 0.0,
            "seconds_per_day must be positive",
        )?;
        check(
            self.annualized_vol.is_finite() && self.annualized_vol >= 0.0,
            "annualized_vol must be non-negative",
        )?;
        check(
            self.trading_days_per_year.is_finite() && self.trading_days_per_year > 0.0,
            "trading_days_per_year must be positive",
        )?;
        check(
            self.noise_ratio.is_finite() && self.noise_ratio >= 0.0,
            "noise_ratio must be non-negative",
        )?;
        check(
            self.jump_intensity.is_finite() && self.jump_intensity >= 0.0,
            "jump_intensity must be non-negative",
        )?;
        check(self.jump_size_mean.is_finite(), "jump_size_mean must be finite")?;
        check(
            self.jump_size_sd.is_finite() && self.jump_size_sd >= 0.0,
            "jump_size_sd must be non-negative",
        )?;
        check(
            unit_interval(self.jump_size_correlation),
            "jump_size_correlation must lie in [0, 1]",
        )?;
        check(
            unit_interval(self.diffusion_correlation),
            "diffusion_correlation must lie in [0, 1]",
        )?;
        check(unit_interval(self.step_count_prob), "step_count_prob must lie in [0, 1]")?;
        check(
            self.step_wait_scale.is_finite() && self.step_wait_scale > 0.0,
            "step_wait_scale must be positive",
        )?;
        check(
            self.bridge_time_scale.is_finite() && self.bridge_time_scale > 0.0,
            "bridge_time_scale must be positive",
        )?;
        check(
            self.bridge_volatility.is_finite() && self.bridge_volatility >= 0.0,
            "bridge_volatility must be non-negative",
        )?;
        check(self.initial_log_price.is_finite(), "initial_log_price must be finite")?;
        Ok(())
    }

    /// Total number of returns across the horizon.
    pub fn n_returns(&self) -> usize {
        self.grid_points_per_day * self.horizon_days
    }

    pub fn seconds_per_step(&self) -> f64 {
        self.seconds_per_day / self.grid_points_per_day as f64
    }

    /// Integrated variance of one day.
    pub fn daily_variance(&self) -> f64 {
        self.annualized_vol * self.annualized_vol / self.trading_days_per_year
    }

    /// Variance of one Brownian increment, `sigma^2 * Delta_n`.
    pub fn step_variance(&self) -> f64 {
        self.daily_variance() / self.grid_points_per_day as f64
    }

    /// `omega^2` solving `noise_ratio = sqrt(n * omega^2 / IV)`.
    pub fn noise_variance(&self) -> f64 {
        self.noise_ratio * self.noise_ratio * self.daily_variance()
            / self.grid_points_per_day as f64
    }

    /// Grid index of the last price of the day containing `time_index`.
    pub fn day_end(&self, time_index: usize) -> usize {
        let g = self.grid_points_per_day;
        let day = if time_index == 0 { 0 } else { (time_index - 1) / g };
        (day + 1) * g
    }
}

/// One jump of the efficient price.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub id: usize,
    pub asset: usize,
    /// First grid index whose price includes the jump.
    pub time_index: usize,
    pub size: f64,
    /// Identifier of the news event; shared by common jumps.
    pub event: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficientPath {
    /// `X^c`, asset-major.
    pub continuous: Vec<Vec<f64>>,
    pub jumps: Vec<JumpEvent>,
    /// `X = X^c + X^d`.
    pub combined: Vec<Vec<f64>>,
}

impl EfficientPath {
    pub fn n_assets(&self) -> usize {
        self.continuous.len()
    }

    pub fn len(&self) -> usize {
        self.continuous.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `X^d` of one asset.
    pub fn jump_component(&self, asset: usize) -> Vec<f64> {
        let mut increments = vec![0.0; self.len()];
        for j in self.jumps.iter().filter(|j| j.asset == asset) {
            increments[j.time_index] += j.size;
        }
        cumulate(&mut increments);
        increments
    }
}

/// Gradual impoundment of one efficient jump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    pub jump_id: usize,
    /// Seconds elapsed since the jump at which each step arrives.
    pub arrival_offsets: Vec<u64>,
    /// Bridge levels sampled at the arrival offsets.
    pub levels: Vec<f64>,
    pub increments: Vec<f64>,
    pub total_delay: u64,
    /// The drawn delay overran the day and was cut short.
    pub truncated: bool,
}

impl StepFunction {
    /// Immediate impoundment: a single step of size one at the jump time.
    pub fn instant(jump_id: usize) -> Self {
        Self {
            jump_id,
            arrival_offsets: vec![0],
            levels: vec![1.0],
            increments: vec![1.0],
            total_delay: 0,
            truncated: false,
        }
    }

    /// Builds a step function from waiting times and bridge levels.
    ///
    /// `levels` holds one value per arrival time including the start, so it
    /// must be one longer than `waits`, start at 0 and end at 1.
    pub fn from_parts(jump_id: usize, waits: &[u64], levels: &[f64]) -> Result<Self> {
        if waits.is_empty() {
            return Ok(Self::instant(jump_id));
        }
        if levels.len() != waits.len() + 1 {
            return Err(SimError::InvalidArgument(format!(
                "expected {} levels, got {}",
                waits.len() + 1,
                levels.len()
            )));
        }
        if waits.contains(&0) {
            return Err(SimError::InvalidArgument("waiting times must be positive".into()));
        }
        if levels[0] != 0.0 || levels[levels.len() - 1] != 1.0 {
            return Err(SimError::InvalidArgument("levels must run from 0 to 1".into()));
        }
        let mut offsets = Vec::with_capacity(levels.len());
        let mut acc = 0u64;
        offsets.push(0);
        for &w in waits {
            acc += w;
            offsets.push(acc);
        }
        Ok(Self {
            jump_id,
            increments: increments_from_levels(levels),
            arrival_offsets: offsets,
            levels: levels.to_vec(),
            total_delay: acc,
            truncated: false,
        })
    }

    pub fn n_steps(&self) -> usize {
        self.arrival_offsets.len() - 1
    }

    /// Share of the jump impounded `elapsed` seconds after the jump.
    pub fn progress(&self, elapsed: f64) -> f64 {
        self.arrival_offsets
            .iter()
            .zip(&self.increments)
            .filter(|(&offset, _)| offset as f64 <= elapsed)
            .map(|(_, &inc)| inc)
            .sum()
    }
}

fn increments_from_levels(levels: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(levels.len());
    out.push(levels[0]);
    out.extend(levels.windows(2).map(|w| w[1] - w[0]));
    out
}

/// Brownian bridge pinned at 0 at `t_start` and at 1 at `t_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrownianBridge {
    pub t_start: f64,
    pub t_end: f64,
    pub volatility: f64,
}

impl BrownianBridge {
    pub fn new(t_start: f64, t_end: f64, volatility: f64) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite() && t_start < t_end) {
            return Err(SimError::InvalidArgument(format!(
                "bridge needs t_start < t_end, got [{t_start}, {t_end}]"
            )));
        }
        if !(volatility.is_finite() && volatility >= 0.0) {
            return Err(SimError::InvalidArgument("bridge volatility must be non-negative".into()));
        }
        Ok(Self {
            t_start,
            t_end,
            volatility,
        })
    }

    /// Conditional mean of the bridge at `t`.
    pub fn mean(&self, t: f64) -> f64 {
        (t - self.t_start) / (self.t_end - self.t_start)
    }

    /// Samples the bridge at sorted times by sequential conditioning on the
    /// previous value and the right pylon.
    pub fn sample<R: Rng + ?Sized>(&self, times: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(SimError::InvalidArgument("sample times must be sorted".into()));
        }
        if times
            .iter()
            .any(|&t| !(t >= self.t_start && t <= self.t_end))
        {
            return Err(SimError::InvalidArgument(format!(
                "sample times must lie in [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        let mut out = Vec::with_capacity(times.len());
        let (mut t_prev, mut v_prev) = (self.t_start, 0.0);
        for &t in times {
            let v = if t == self.t_start {
                0.0
            } else if t == self.t_end {
                1.0
            } else if t == t_prev {
                v_prev
            } else {
                let span = self.t_end - t_prev;
                let mean = v_prev + (t - t_prev) / span * (1.0 - v_prev);
                let var = self.volatility * self.volatility * (t - t_prev) * (self.t_end - t) / span;
                let z: f64 = StandardNormal.sample(rng);
                mean + var.sqrt() * z
            };
            out.push(v);
            t_prev = t;
            v_prev = v;
        }
        Ok(out)
    }
}

/// Samples a standard bridge from 0 at `t_start` to 1 at `t_end`.
pub fn sample_brownian_bridge<R: Rng + ?Sized>(
    t_start: f64,
    t_end: f64,
    sample_times: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>> {
    BrownianBridge::new(t_start, t_end, 1.0)?.sample(sample_times, rng)
}

/// Draws the step function that spreads `jump` over several seconds.
pub fn draw_step_function<R: Rng + ?Sized>(
    jump: &JumpEvent,
    config: &SimConfig,
    rng: &mut R,
) -> Result<StepFunction> {
    let binomial = Binomial::new(config.step_count_trials, config.step_count_prob)
        .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    let n_steps = binomial.sample(rng) as usize;
    if n_steps == 0 {
        return Ok(StepFunction::instant(jump.id));
    }
    let remaining_steps = config.day_end(jump.time_index).saturating_sub(jump.time_index);
    let mut remaining = (remaining_steps as f64 * config.seconds_per_step()).floor() as u64;
    if let Some(cap) = config.max_delay {
        remaining = remaining.min(cap);
    }
    if remaining == 0 {
        return Ok(StepFunction {
            truncated: true,
            ..StepFunction::instant(jump.id)
        });
    }

    let wait_dist = Exp::new(1.0 / (config.step_wait_scale * n_steps as f64))
        .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    let draw_waits = |rng: &mut R| -> Vec<u64> {
        (0..n_steps)
            .map(|_| (wait_dist.sample(rng).ceil() as u64).max(1))
            .collect()
    };

    let mut waits = draw_waits(rng);
    let mut truncated = false;
    let mut redraws = 0;
    while waits.iter().sum::<u64>() > remaining {
        if redraws == config.max_redraws {
            let mut acc = 0;
            waits.retain(|&w| {
                acc += w;
                acc <= remaining
            });
            truncated = true;
            break;
        }
        waits = draw_waits(rng);
        redraws += 1;
    }
    if waits.is_empty() {
        return Ok(StepFunction {
            truncated: true,
            ..StepFunction::instant(jump.id)
        });
    }

    let mut offsets = vec![0u64];
    let mut acc = 0;
    for &w in &waits {
        acc += w;
        offsets.push(acc);
    }
    let bridge = BrownianBridge::new(
        0.0,
        acc as f64 / config.bridge_time_scale,
        config.bridge_volatility,
    )?;
    let times: Vec<f64> = offsets
        .iter()
        .map(|&o| o as f64 / config.bridge_time_scale)
        .collect();
    let mut levels = bridge.sample(&times, rng)?;
    // pylons hold exactly, independent of the division above
    levels[0] = 0.0;
    *levels.last_mut().expect("non-empty") = 1.0;

    Ok(StepFunction {
        jump_id: jump.id,
        increments: increments_from_levels(&levels),
        arrival_offsets: offsets,
        levels,
        total_delay: acc,
        truncated,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservedPath {
    /// `Y = Y^c + Y^d`, asset-major.
    pub prices: Vec<Vec<f64>>,
    pub continuous: Vec<Vec<f64>>,
    pub discontinuous: Vec<Vec<f64>>,
    pub noise: Vec<Vec<f64>>,
    /// One step function per efficient jump, in jump order.
    pub step_functions: Vec<StepFunction>,
}

fn cumulate(values: &mut [f64]) {
    let mut acc = 0.0;
    for v in values.iter_mut() {
        acc += *v;
        *v = acc;
    }
}

fn new_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn draw_jump_times<R: Rng + ?Sized>(
    config: &SimConfig,
    poisson: Option<&Poisson<f64>>,
    day: usize,
    rng: &mut R,
) -> Vec<usize> {
    let count = poisson.map_or(0, |p| p.sample(rng) as usize);
    let g = config.grid_points_per_day;
    let mut times: Vec<usize> = (0..count)
        .map(|_| day * g + rng.random_range(1..=g))
        .collect();
    times.sort_unstable();
    times
}

/// Simulates the efficient jump-diffusion, seeded from `config.rng_seed`.
pub fn simulate_efficient(config: &SimConfig) -> Result<EfficientPath> {
    let mut rng = new_rng(config.rng_seed, 0);
    simulate_efficient_with(config, &mut rng)
}

pub fn simulate_efficient_with<R: Rng + ?Sized>(
    config: &SimConfig,
    rng: &mut R,
) -> Result<EfficientPath> {
    config.validate()?;
    let p = config.n_assets;
    let n = config.n_returns();
    let step_sd = config.step_variance().sqrt();
    let rho = config.diffusion_correlation;
    let (common_load, own_load) = (rho.sqrt(), (1.0 - rho).sqrt());

    let mut continuous = vec![vec![config.initial_log_price; n + 1]; p];
    for i in 1..=n {
        let common: f64 = StandardNormal.sample(rng);
        for path in continuous.iter_mut() {
            let own: f64 = StandardNormal.sample(rng);
            let z = common_load * common + own_load * own;
            path[i] = path[i - 1] + step_sd * z;
        }
    }

    let poisson = if config.jump_intensity > 0.0 {
        Some(Poisson::new(config.jump_intensity).map_err(|e| SimError::InvalidConfig(e.to_string()))?)
    } else {
        None
    };
    let size_sd = config.jump_size_sd;
    let size = Normal::new(0.0, 1.0).expect("standard normal");
    let rho_j = config.jump_size_correlation;
    let (jc, jo) = (rho_j.sqrt(), (1.0 - rho_j).sqrt());

    let mut jumps = Vec::new();
    let mut event = 0;
    for day in 0..config.horizon_days {
        if config.common_jumps {
            for t in draw_jump_times(config, poisson.as_ref(), day, rng) {
                let common = size.sample(rng);
                for asset in 0..p {
                    let z = jc * common + jo * size.sample(rng);
                    jumps.push(JumpEvent {
                        id: jumps.len(),
                        asset,
                        time_index: t,
                        size: config.jump_size_mean + size_sd * z,
                        event,
                    });
                }
                event += 1;
            }
        } else {
            for asset in 0..p {
                for t in draw_jump_times(config, poisson.as_ref(), day, rng) {
                    jumps.push(JumpEvent {
                        id: jumps.len(),
                        asset,
                        time_index: t,
                        size: config.jump_size_mean + size_sd * size.sample(rng),
                        event,
                    });
                    event += 1;
                }
            }
        }
    }

    let mut path = EfficientPath {
        combined: Vec::new(),
        continuous,
        jumps,
    };
    path.combined = (0..p)
        .map(|k| {
            path.continuous[k]
                .iter()
                .zip(path.jump_component(k))
                .map(|(c, d)| c + d)
                .collect()
        })
        .collect();
    Ok(path)
}

/// Evaluates `Y^d` of one asset on the grid from its jumps and step functions.
pub fn observed_jump_component(
    len: usize,
    jumps: &[(&JumpEvent, &StepFunction)],
    seconds_per_step: f64,
) -> Vec<f64> {
    let mut increments = vec![0.0; len];
    for (jump, steps) in jumps {
        for (&offset, &inc) in steps.arrival_offsets.iter().zip(&steps.increments) {
            let lag = (offset as f64 / seconds_per_step).ceil() as usize;
            let idx = jump.time_index + lag;
            if idx < len {
                increments[idx] += inc * jump.size;
            }
        }
    }
    cumulate(&mut increments);
    increments
}

/// Adds microstructure noise and sluggish jump impoundment to an efficient path.
pub fn contaminate<R: Rng + ?Sized>(
    efficient: &EfficientPath,
    config: &SimConfig,
    rng: &mut R,
) -> Result<ObservedPath> {
    config.validate()?;
    let len = efficient.len();
    if len != config.n_returns() + 1 || efficient.n_assets() != config.n_assets {
        return Err(SimError::InvalidArgument(
            "efficient path does not match the configured grid".into(),
        ));
    }
    let noise_sd = config.noise_variance().sqrt();
    let noise: Vec<Vec<f64>> = (0..config.n_assets)
        .map(|_| {
            (0..len)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    noise_sd * z
                })
                .collect()
        })
        .collect();
    let continuous: Vec<Vec<f64>> = efficient
        .continuous
        .iter()
        .zip(&noise)
        .map(|(x, u)| x.iter().zip(u).map(|(a, b)| a + b).collect())
        .collect();

    let step_functions = efficient
        .jumps
        .iter()
        .map(|j| draw_step_function(j, config, rng))
        .collect::<Result<Vec<_>>>()?;

    let sps = config.seconds_per_step();
    let discontinuous: Vec<Vec<f64>> = (0..config.n_assets)
        .map(|k| {
            let own: Vec<_> = efficient
                .jumps
                .iter()
                .zip(&step_functions)
                .filter(|(j, _)| j.asset == k)
                .collect();
            observed_jump_component(len, &own, sps)
        })
        .collect();
    let prices = continuous
        .iter()
        .zip(&discontinuous)
        .map(|(c, d)| c.iter().zip(d).map(|(a, b)| a + b).collect())
        .collect();

    Ok(ObservedPath {
        prices,
        continuous,
        discontinuous,
        noise,
        step_functions,
    })
}

/// Efficient and observed paths plus the efficiently priced ETF.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub config: SimConfig,
    pub efficient: EfficientPath,
    pub observed: ObservedPath,
    /// Constant index weights, one per asset.
    pub weights: Vec<f64>,
    /// `Z = sum_k w_k X_k`.
    pub etf: Vec<f64>,
}

impl Simulation {
    /// Observed stock prices with the ETF, as a panel.
    pub fn observed_panel(&self) -> PricePanel<f64> {
        self.panel(&self.observed.prices)
    }

    /// Efficient stock prices with the ETF, as a panel.
    pub fn efficient_panel(&self) -> PricePanel<f64> {
        self.panel(&self.efficient.combined)
    }

    fn panel(&self, prices: &[Vec<f64>]) -> PricePanel<f64> {
        let len = self.etf.len();
        PricePanel {
            asset_ids: (0..prices.len()).map(|k| format!("S{k:02}")).collect(),
            prices: prices.to_vec(),
            weights: self.weights.iter().map(|&w| vec![w; len]).collect(),
            etf_id: "ETF".to_string(),
            etf: self.etf.clone(),
            returns_per_day: self.config.grid_points_per_day,
        }
    }
}

/// Runs the full data generating process from `config.rng_seed`.
pub fn simulate(config: &SimConfig) -> Result<Simulation> {
    let efficient = simulate_efficient(config)?;
    let mut rng = new_rng(config.rng_seed, 1);
    let observed = contaminate(&efficient, config, &mut rng)?;
    let w = 1.0 / config.n_assets as f64;
    let weights = vec![w; config.n_assets];
    let etf = (0..efficient.len())
        .map(|i| {
            efficient
                .combined
                .iter()
                .zip(&weights)
                .fold(0.0, |acc, (x, w)| acc + w * x[i])
        })
        .collect();
    Ok(Simulation {
        config: config.clone(),
        efficient,
        observed,
        weights,
        etf,
    })
}
