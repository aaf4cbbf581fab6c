use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};

use crate::environment::{ChainStatics, EnvironmentModel, SojournDistribution};
use crate::error::{Error, Result};

/// One constant stretch of the environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub state: usize,
    pub start: f64,
    pub duration: f64,
}

impl Segment {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }
}

/// Piecewise-constant environment trajectory starting at time 0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnvironmentPath {
    pub segments: Vec<Segment>,
}

impl EnvironmentPath {
    /// A path frozen in one state over `[0, horizon)`.
    pub fn frozen(state: usize, horizon: f64) -> Self {
        Self {
            segments: vec![Segment {
                state,
                start: 0.0,
                duration: horizon,
            }],
        }
    }

    pub fn end(&self) -> f64 {
        self.segments.last().map_or(0.0, Segment::end)
    }

    /// Time spent in each state within `[from, to)`.
    pub fn occupation(&self, states: usize, from: f64, to: f64) -> Vec<f64> {
        let mut out = vec![0.0; states];
        for s in &self.segments {
            let lo = s.start.max(from);
            let hi = s.end().min(to);
            if hi > lo {
                out[s.state] += hi - lo;
            }
        }
        out
    }
}

fn unsupported(d: &SojournDistribution) -> Error {
    Error::Unsupported(format!("cannot sample sojourn law {d:?}"))
}

/// Draws one sojourn time.
pub fn sample_sojourn<R: Rng + ?Sized>(d: &SojournDistribution, rng: &mut R) -> Result<f64> {
    Ok(match d {
        SojournDistribution::Exponential { rate } => {
            Exp::new(*rate).expect("validated").sample(rng)
        }
        SojournDistribution::Gamma { shape, rate } => Gamma::new(*shape, 1.0 / rate)
            .expect("validated")
            .sample(rng),
        SojournDistribution::Deterministic { value } => *value,
        SojournDistribution::HyperExponential { probs, rates } => {
            let branch = pick(probs.iter().copied(), rng);
            Exp::new(rates[branch]).expect("validated").sample(rng)
        }
        SojournDistribution::Tabulated { .. } => return Err(unsupported(d)),
    })
}

/// Draws from the equilibrium law with density `P(T > x) / E[T]`, as a
/// uniform fraction of a length-biased sojourn.
pub fn sample_residual_sojourn<R: Rng + ?Sized>(
    d: &SojournDistribution,
    rng: &mut R,
) -> Result<f64> {
    Ok(match d {
        SojournDistribution::Exponential { rate } => {
            Exp::new(*rate).expect("validated").sample(rng)
        }
        SojournDistribution::Gamma { shape, rate } => {
            let biased = Gamma::new(shape + 1.0, 1.0 / rate)
                .expect("validated")
                .sample(rng);
            rng.random::<f64>() * biased
        }
        SojournDistribution::Deterministic { value } => rng.random::<f64>() * value,
        SojournDistribution::HyperExponential { probs, rates } => {
            let branch = pick(probs.iter().zip(rates).map(|(p, r)| p / r), rng);
            Exp::new(rates[branch]).expect("validated").sample(rng)
        }
        SojournDistribution::Tabulated { .. } => return Err(unsupported(d)),
    })
}

/// Index drawn with probability proportional to `weights`.
fn pick<R: Rng + ?Sized>(weights: impl Iterator<Item = f64> + Clone, rng: &mut R) -> usize {
    let total: f64 = weights.clone().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        if w > 0.0 {
            last = i;
            if u < w {
                return i;
            }
            u -= w;
        }
    }
    last
}

/// Simulates the environment over `[0, horizon)` from its time-stationary
/// law: the first state follows the occupancy distribution with an
/// equilibrium first sojourn, after which states follow the routing matrix.
pub fn simulate_environment<R: Rng + ?Sized>(
    model: &EnvironmentModel,
    statics: &ChainStatics,
    horizon: f64,
    rng: &mut R,
) -> Result<EnvironmentPath> {
    let mut state = pick(statics.occupancy.iter().copied(), rng);
    let mut duration = sample_residual_sojourn(&model.states[state].sojourn, rng)?;
    let mut start = 0.0;
    let mut segments = Vec::new();
    loop {
        segments.push(Segment {
            state,
            start,
            duration,
        });
        start += duration;
        if start >= horizon {
            break;
        }
        state = pick(model.routing.row(state).iter().copied(), rng);
        duration = sample_sojourn(&model.states[state].sojourn, rng)?;
    }
    Ok(EnvironmentPath { segments })
}
