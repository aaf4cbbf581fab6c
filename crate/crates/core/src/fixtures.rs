//! Model builders shared by tests, the acceptance suite and the FFI crate.

use nalgebra::DMatrix;
use rand::Rng;

use crate::environment::{EnvironmentModel, SojournDistribution, StateParams};

/// Two states alternating deterministically (`P = [[0,1],[1,0]]`).
pub fn two_state(
    lambdas: [f64; 2],
    betas: [f64; 2],
    mu: f64,
    sojourn1: SojournDistribution,
    sojourn2: SojournDistribution,
) -> EnvironmentModel {
    EnvironmentModel {
        service_rate: mu,
        states: vec![
            StateParams {
                arrival_rate: lambdas[0],
                speed: betas[0],
                sojourn: sojourn1,
            },
            StateParams {
                arrival_rate: lambdas[1],
                speed: betas[1],
                sojourn: sojourn2,
            },
        ],
        routing: DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
    }
}

/// Uniform routing over the other `k - 1` states.
pub fn uniform_routing(k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(k, k, |i, j| if i == j { 0.0 } else { 1.0 / (k - 1) as f64 })
}

/// `k` states sharing arrival rate and speed, with exponential sojourns of
/// distinct rates and uniform routing.
pub fn identical_states(k: usize, lambda: f64, beta: f64, mu: f64) -> EnvironmentModel {
    let sojourns = (0..k)
        .map(|i| SojournDistribution::Exponential {
            rate: 1.0 + i as f64,
        })
        .collect();
    identical_states_with(lambda, beta, mu, sojourns, uniform_routing(k))
}

pub fn identical_states_with(
    lambda: f64,
    beta: f64,
    mu: f64,
    sojourns: Vec<SojournDistribution>,
    routing: DMatrix<f64>,
) -> EnvironmentModel {
    EnvironmentModel {
        service_rate: mu,
        states: sojourns
            .into_iter()
            .map(|sojourn| StateParams {
                arrival_rate: lambda,
                speed: beta,
                sojourn,
            })
            .collect(),
        routing,
    }
}

/// A random irreducible routing matrix with zero diagonal. The cycle
/// `0 -> 1 -> ... -> k-1 -> 0` is always present; other entries are dropped
/// at random.
pub fn random_irreducible_routing<R: Rng + ?Sized>(k: usize, rng: &mut R) -> DMatrix<f64> {
    let mut p = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            0.0
        } else if j == (i + 1) % k {
            rng.random_range(0.2..1.0)
        } else if rng.random_bool(0.7) {
            rng.random_range(0.05..1.0)
        } else {
            0.0
        }
    });
    for mut row in p.row_iter_mut() {
        let s = row.sum();
        row /= s;
    }
    p
}

pub fn random_exponential<R: Rng + ?Sized>(rng: &mut R) -> SojournDistribution {
    SojournDistribution::Exponential {
        rate: rng.random_range(0.3..3.0),
    }
}

/// One of Gamma, Deterministic or HyperExponential with mean of order one.
pub fn random_general_sojourn<R: Rng + ?Sized>(rng: &mut R) -> SojournDistribution {
    match rng.random_range(0..3) {
        0 => {
            let shape = rng.random_range(0.5..4.0);
            SojournDistribution::Gamma {
                shape,
                rate: shape / rng.random_range(0.3..2.0),
            }
        }
        1 => SojournDistribution::Deterministic {
            value: rng.random_range(0.2..2.0),
        },
        _ => {
            let p = rng.random_range(0.1..0.9);
            SojournDistribution::HyperExponential {
                probs: vec![p, 1.0 - p],
                rates: vec![rng.random_range(0.3..1.0), rng.random_range(1.0..5.0)],
            }
        }
    }
}

fn random_states<R: Rng + ?Sized>(
    k: usize,
    rng: &mut R,
    sojourn: impl Fn(&mut R) -> SojournDistribution,
) -> Vec<StateParams> {
    (0..k)
        .map(|_| StateParams {
            arrival_rate: rng.random_range(0.0..3.0),
            speed: rng.random_range(0.2..1.0),
            sojourn: sojourn(rng),
        })
        .collect()
}

pub fn random_exponential_model<R: Rng + ?Sized>(k: usize, rng: &mut R) -> EnvironmentModel {
    let states = random_states(k, rng, |r| random_exponential(r));
    EnvironmentModel {
        service_rate: rng.random_range(0.5..2.0),
        states,
        routing: random_irreducible_routing(k, rng),
    }
}

/// Random model mixing every closed-form family.
pub fn random_mixed_model<R: Rng + ?Sized>(k: usize, rng: &mut R) -> EnvironmentModel {
    let states = random_states(k, rng, |r| {
        if r.random_bool(0.25) {
            random_exponential(r)
        } else {
            random_general_sojourn(r)
        }
    });
    EnvironmentModel {
        service_rate: rng.random_range(0.5..2.0),
        states,
        routing: random_irreducible_routing(k, rng),
    }
}

/// Fixed three-state reference model for simulation comparisons: a Gamma(2)
/// state, a deterministic state and an exponential state, with heterogeneous
/// arrival rates and speeds.
pub fn reference_model() -> EnvironmentModel {
    EnvironmentModel {
        service_rate: 1.0,
        states: vec![
            StateParams {
                arrival_rate: 4.0,
                speed: 1.0,
                sojourn: SojournDistribution::Gamma {
                    shape: 2.0,
                    rate: 0.5,
                },
            },
            StateParams {
                arrival_rate: 0.5,
                speed: 0.4,
                sojourn: SojournDistribution::Deterministic { value: 0.5 },
            },
            StateParams {
                arrival_rate: 1.5,
                speed: 0.8,
                sojourn: SojournDistribution::Exponential { rate: 1.0 },
            },
        ],
        routing: DMatrix::from_row_slice(3, 3, &[0.0, 0.6, 0.4, 0.5, 0.0, 0.5, 0.7, 0.3, 0.0]),
    }
}
