//! Discrete-event simulation of the modulated M/M/∞ queue.
//!
//! Used as a brute-force oracle for the analytic moments. Replications run
//! in parallel, each on its own ChaCha stream `(seed, replication index)`,
//! and are reduced in index order, so estimates do not depend on scheduling.

mod path;
mod queue;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use path::{
    sample_residual_sojourn, sample_sojourn, simulate_environment, EnvironmentPath, Segment,
};
pub use queue::simulate_queue;

use crate::environment::{ChainStatics, EnvironmentModel};
use crate::error::{Error, Result};

pub const MAX_ESTIMATED_ORDER: usize = 6;
pub const DEFAULT_REPLICATIONS: usize = 32;
pub const DEFAULT_SEED: u64 = 20_260_101;
/// Default horizon after warmup, in mean environment cycles.
pub const DEFAULT_CYCLES: f64 = 2000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub warmup: f64,
    /// End of each replication, warmup included.
    pub horizon: f64,
    pub sampling_interval: f64,
    pub replications: usize,
    pub seed: u64,
    pub max_order: usize,
}

impl SimulationConfig {
    /// Defaults scaled to the model: warmup `20 / (mu min beta)` (at least
    /// ten cycles), sampling every mean cycle, 2000 cycles after warmup.
    pub fn for_model(model: &EnvironmentModel, statics: &ChainStatics) -> Self {
        let cycle = statics.mean_cycle(model);
        let slowest = model
            .states
            .iter()
            .map(|s| s.speed)
            .filter(|b| *b > 0.0)
            .fold(f64::INFINITY, f64::min);
        let warmup = (20.0 / (model.service_rate * slowest)).max(10.0 * cycle);
        Self {
            warmup,
            horizon: warmup + DEFAULT_CYCLES * cycle,
            sampling_interval: cycle,
            replications: DEFAULT_REPLICATIONS,
            seed: DEFAULT_SEED,
            max_order: 4,
        }
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.warmup >= 0.0 && self.warmup.is_finite()) {
            return bad("warmup must be finite and nonnegative");
        }
        if !(self.horizon > self.warmup && self.horizon.is_finite()) {
            return bad("warmup must be shorter than the horizon");
        }
        if !(self.sampling_interval > 0.0) {
            return bad("sampling interval must be positive");
        }
        if self.max_order == 0 || self.max_order > MAX_ESTIMATED_ORDER {
            return Err(Error::Config(format!(
                "estimated order must lie in 1..={MAX_ESTIMATED_ORDER}"
            )));
        }
        if self.sample_times().is_empty() {
            return bad("no sampling time falls inside (warmup, horizon)");
        }
        Ok(())
    }

    /// Grid `warmup, warmup + dt, ...` strictly below the horizon.
    pub fn sample_times(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut i = 0u64;
        loop {
            let t = self.warmup + self.sampling_interval * i as f64;
            if t >= self.horizon {
                break;
            }
            out.push(t);
            i += 1;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderEstimate {
    pub order: usize,
    /// Average of `N(N-1)...(N-n+1)` over samples and replications.
    pub estimate: f64,
    /// Across-replication standard error.
    pub std_error: f64,
}

/// First-order estimates from the two halves of the post-warmup window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfSplit {
    pub first: OrderEstimate,
    pub second: OrderEstimate,
    /// `|first - second| / sqrt(se1^2 + se2^2)`.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationEstimate {
    pub config: SimulationConfig,
    pub orders: Vec<OrderEstimate>,
    pub samples_per_replication: usize,
    /// ChaCha stream used by each replication (all share `config.seed`).
    pub streams: Vec<u64>,
    /// Fraction of post-warmup time spent in each state.
    pub occupancy: Vec<f64>,
    pub occupancy_std_error: Vec<f64>,
    pub half_split: HalfSplit,
}

impl SimulationEstimate {
    /// The factorial-moment estimate of order `n` (`n = 0` is exactly 1).
    pub fn factorial(&self, n: usize) -> Option<&OrderEstimate> {
        self.orders.get(n.checked_sub(1)?)
    }
}

struct Replication {
    /// Mean falling factorials, orders `1..=max_order`.
    factorial: Vec<f64>,
    first_half_mean: f64,
    second_half_mean: f64,
    occupancy: Vec<f64>,
}

fn falling_factorial_means(counts: &[u64], max_order: usize) -> Vec<f64> {
    let mut sums = vec![0.0; max_order];
    for &n in counts {
        let mut ff = 1.0;
        for (j, sum) in sums.iter_mut().enumerate() {
            ff *= n as f64 - j as f64;
            if ff == 0.0 {
                break;
            }
            *sum += ff;
        }
    }
    sums.into_iter().map(|s| s / counts.len() as f64).collect()
}

fn run_replication(
    model: &EnvironmentModel,
    statics: &ChainStatics,
    config: &SimulationConfig,
    grid: &[f64],
    stream: u64,
) -> Result<Replication> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream);
    let path = simulate_environment(model, statics, config.horizon, &mut rng)?;
    let counts = simulate_queue(model, &path, grid, &mut rng)?;
    let half = counts.len() / 2;
    let mean = |c: &[u64]| c.iter().sum::<u64>() as f64 / c.len().max(1) as f64;
    let window = config.horizon - config.warmup;
    let occupancy = path
        .occupation(model.state_count(), config.warmup, config.horizon)
        .into_iter()
        .map(|t| t / window)
        .collect();
    Ok(Replication {
        factorial: falling_factorial_means(&counts, config.max_order),
        first_half_mean: mean(&counts[..half]),
        second_half_mean: mean(&counts[half..]),
        occupancy,
    })
}

fn mean_and_se(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs `config.replications` independent replications and estimates the
/// factorial moments of the stationary customer count.
pub fn estimate_factorial_moments(
    model: &EnvironmentModel,
    config: &SimulationConfig,
) -> Result<SimulationEstimate> {
    config.check()?;
    if config.replications < 2 {
        return Err(Error::Estimation(format!(
            "{} replication(s): standard errors need at least 2",
            config.replications
        )));
    }
    let statics = ChainStatics::compute(model)?;
    let grid = config.sample_times();
    let streams: Vec<u64> = (0..config.replications as u64).collect();
    let reps = streams
        .par_iter()
        .map(|&s| run_replication(model, &statics, config, &grid, s))
        .collect::<Result<Vec<_>>>()?;

    let orders = (0..config.max_order)
        .map(|j| {
            let (estimate, std_error) = mean_and_se(reps.iter().map(|r| r.factorial[j]));
            OrderEstimate {
                order: j + 1,
                estimate,
                std_error,
            }
        })
        .collect::<Vec<_>>();
    if orders
        .iter()
        .any(|o| !o.estimate.is_finite() || !o.std_error.is_finite())
    {
        return Err(Error::Estimation("non-finite estimate".into()));
    }
    let (first, first_se) = mean_and_se(reps.iter().map(|r| r.first_half_mean));
    let (second, second_se) = mean_and_se(reps.iter().map(|r| r.second_half_mean));
    let combined = first_se.hypot(second_se);
    let z = if combined > 0.0 {
        (first - second).abs() / combined
    } else {
        0.0
    };
    let half_split = HalfSplit {
        first: OrderEstimate {
            order: 1,
            estimate: first,
            std_error: first_se,
        },
        second: OrderEstimate {
            order: 1,
            estimate: second,
            std_error: second_se,
        },
        z,
    };
    let (occupancy, occupancy_std_error) = (0..model.state_count())
        .map(|k| mean_and_se(reps.iter().map(|r| r.occupancy[k])))
        .unzip();
    Ok(SimulationEstimate {
        config: config.clone(),
        orders,
        samples_per_replication: grid.len(),
        streams,
        occupancy,
        occupancy_std_error,
        half_split,
    })
}
