//! Monte-Carlo shot harness: finite-statistics estimates of the game
//! value over a θ grid, with per-shot keyed streams so results do not
//! depend on execution order.

use serde::Serialize;

use crate::error::Result;
use crate::game::{win_probability, StrategyStar};
use crate::quantum::outcome_probabilities;
use crate::photonic::{CompiledThetaOptics, NoiseModel};
use crate::strategies::unitary_theta_strategy;
use crate::stream::stream;

const KEY_SHOT: u64 = 0x73686f74;
const KEY_OPTICS: u64 = 0x6f707469;

/// One θ sweep: grid, shot budget, and how the strategy is realized.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub theta_grid: Vec<f64>,
    pub shots_per_point: u64,
    pub seed: u64,
    pub noise: NoiseModel,
    /// realize gates through compiled waveplate sequences instead of
    /// ideal unitaries
    pub use_compiled_optics: bool,
    /// cycle inputs (a, b) in fixed order instead of sampling them
    pub balanced_inputs: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            theta_grid: default_theta_grid(10),
            shots_per_point: 38_000,
            seed: 0,
            noise: NoiseModel::none(),
            use_compiled_optics: false,
            balanced_inputs: false,
        }
    }
}

/// `steps + 1` equally spaced angles covering [0, π/2].
pub fn default_theta_grid(steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|k| std::f64::consts::FRAC_PI_2 * k as f64 / steps as f64)
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub theta_rad: f64,
    /// exact game value of the strategy actually run at this point
    pub w_exact: f64,
    /// shot-frequency estimate of the same value
    pub w_hat: f64,
    /// binomial standard error √(ŵ(1−ŵ)/N)
    pub stderr: f64,
    pub shots: u64,
    pub seed: u64,
}

fn outcome_zero_table(s: &StrategyStar) -> Result<[[f64; 2]; 2]> {
    let mut p0 = [[0.0; 2]; 2];
    for a in 0..2u8 {
        for b in 0..2u8 {
            let rho = s.final_state(a, b)?;
            p0[a as usize][b as usize] = outcome_probabilities(&rho, s.measurement())?.0;
        }
    }
    Ok(p0)
}

/// Shot-frequency estimate of w. Each shot draws from its own stream
/// keyed by (seed, point, replica, shot): inputs a, b (sampled or cycled)
/// and one uniform for the outcome, exactly as `play_round` would draw it.
pub fn run_point(
    s: &StrategyStar,
    shots: u64,
    seed: u64,
    point_index: u64,
    replica_index: u64,
    balanced_inputs: bool,
) -> Result<(f64, f64)> {
    let p0 = outcome_zero_table(s)?;
    let mut wins = 0u64;
    for shot in 0..shots {
        let mut rng = stream(seed, &[KEY_SHOT, point_index, replica_index, shot]);
        let (a, b) = if balanced_inputs {
            (((shot >> 1) & 1) as usize, (shot & 1) as usize)
        } else {
            use rand::Rng;
            (rng.gen_range(0..2usize), rng.gen_range(0..2usize))
        };
        let u: f64 = {
            use rand::Rng;
            rng.gen()
        };
        // same draw rule as play_round, using the cached probabilities
        let c = usize::from(u >= p0[a][b]);
        if c == (a & b) {
            wins += 1;
        }
    }
    let w_hat = wins as f64 / shots as f64;
    let stderr = (w_hat * (1.0 - w_hat) / shots as f64).sqrt();
    Ok((w_hat, stderr))
}

/// Builds the strategy for one grid point under the configured realization.
pub fn point_strategy(cfg: &ExperimentConfig, point_index: usize) -> Result<StrategyStar> {
    let theta = cfg.theta_grid[point_index];
    if cfg.use_compiled_optics {
        let optics = CompiledThetaOptics::compile(theta)?;
        let mut rng = stream(cfg.seed, &[KEY_OPTICS, point_index as u64]);
        optics.strategy(&cfg.noise, &mut rng)
    } else {
        Ok(unitary_theta_strategy(theta))
    }
}

/// Full sweep over the grid, one record per θ.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    let mut records = Vec::with_capacity(cfg.theta_grid.len());
    for (i, &theta) in cfg.theta_grid.iter().enumerate() {
        let s = point_strategy(cfg, i)?;
        let w_exact = win_probability(&s)?.w;
        let (w_hat, stderr) = run_point(
            &s,
            cfg.shots_per_point,
            cfg.seed,
            i as u64,
            0,
            cfg.balanced_inputs,
        )?;
        records.push(SweepRecord {
            theta_rad: theta,
            w_exact,
            w_hat,
            stderr,
            shots: cfg.shots_per_point,
            seed: cfg.seed,
        });
    }
    Ok(records)
}

/// Mean and sample standard deviation of ŵ over independent replicas of
/// the same point.
pub fn replicate_statistics(
    s: &StrategyStar,
    shots: u64,
    replicas: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    let mut values = Vec::with_capacity(replicas as usize);
    for r in 0..replicas {
        let (w_hat, _) = run_point(s, shots, seed, 0, r, false)?;
        values.push(w_hat);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    Ok((mean, var.sqrt()))
}
