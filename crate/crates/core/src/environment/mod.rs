//! The semi-Markov environment: per-state arrival rates, server speeds and
//! sojourn laws, the routing matrix, and the chain quantities derived from it.

mod sojourn;
mod validate;

use nalgebra::{DMatrix, DVector};

pub use sojourn::SojournDistribution;
pub use validate::{ValidationReport, Violation};

use crate::error::{Error, Result};
use crate::linalg::Factored;

/// Parameters attached to one environment state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateParams {
    /// Poisson arrival rate while the environment sits in this state.
    pub arrival_rate: f64,
    /// Server speed in `[0, 1]`; the state's service rate is `speed * mu`.
    pub speed: f64,
    pub sojourn: SojournDistribution,
}

/// An M/M/∞ queue modulated by a finite semi-Markov environment.
///
/// Plain data: construct freely, then call [`EnvironmentModel::validate`]
/// (or let a downstream computation do it via [`EnvironmentModel::ensure_valid`]).
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentModel {
    /// Base service rate `mu` of the exponential service requirements.
    pub service_rate: f64,
    pub states: Vec<StateParams>,
    /// Row-stochastic routing matrix with zero diagonal.
    pub routing: DMatrix<f64>,
}

impl EnvironmentModel {
    pub fn new(service_rate: f64, states: Vec<StateParams>, routing: DMatrix<f64>) -> Result<Self> {
        let model = Self {
            service_rate,
            states,
            routing,
        };
        model.ensure_valid()?;
        Ok(model)
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    /// Per-state service rates `mu_k = beta_k * mu`.
    pub fn service_rates(&self) -> Vec<f64> {
        self.states
            .iter()
            .map(|s| s.speed * self.service_rate)
            .collect()
    }

    pub fn arrival_rates(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.arrival_rate).collect()
    }

    pub fn all_exponential(&self) -> bool {
        self.states.iter().all(|s| s.sojourn.is_exponential())
    }

    pub fn validate(&self) -> ValidationReport {
        validate::validate(self)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel(report))
        }
    }
}

/// Quantities of the embedded routing chain shared by all computations.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainStatics {
    /// Stationary vector of the embedded chain, `pi P = pi`.
    pub pi: DVector<f64>,
    /// Reversed routing matrix `diag(pi)^-1 P^T diag(pi)`.
    pub reversed: DMatrix<f64>,
    /// Time-stationary state law, proportional to `pi_k E[T_k]`.
    pub occupancy: DVector<f64>,
    /// Condition estimate of the balance system used for `pi`.
    pub condition: f64,
}

const MAX_BALANCE_CONDITION: f64 = 1e12;

impl ChainStatics {
    pub fn compute(model: &EnvironmentModel) -> Result<Self> {
        model.ensure_valid()?;
        let (pi, condition) = stationary_vector(&model.routing)?;
        let reversed = reverse_routing(&model.routing, &pi);
        let mut occupancy = DVector::from_iterator(
            pi.len(),
            pi.iter()
                .zip(&model.states)
                .map(|(p, s)| p * s.sojourn.mean()),
        );
        let total = occupancy.sum();
        occupancy /= total;
        Ok(Self {
            pi,
            reversed,
            occupancy,
            condition,
        })
    }

    /// Mean time between `K` consecutive jumps of the environment, used as the
    /// default time scale for simulation sampling.
    pub fn mean_cycle(&self, model: &EnvironmentModel) -> f64 {
        let per_jump: f64 = self
            .pi
            .iter()
            .zip(&model.states)
            .map(|(p, s)| p * s.sojourn.mean())
            .sum();
        per_jump * model.state_count() as f64
    }
}

pub fn chain_statics(model: &EnvironmentModel) -> Result<ChainStatics> {
    ChainStatics::compute(model)
}

/// Solves `pi (I - P) = 0`, `sum(pi) = 1` with the last balance equation
/// replaced by the normalization row. Returns `(pi, condition)`.
pub fn stationary_vector(routing: &DMatrix<f64>) -> Result<(DVector<f64>, f64)> {
    let k = routing.nrows();
    let mut system = (DMatrix::identity(k, k) - routing).transpose();
    system.row_mut(k - 1).fill(1.0);
    let mut rhs = DVector::zeros(k);
    rhs[k - 1] = 1.0;
    let factored = Factored::new(system);
    let condition = factored.condition();
    if !(condition <= MAX_BALANCE_CONDITION) {
        return Err(Error::SingularChain { condition });
    }
    let (pi, _) = factored
        .solve(&rhs)
        .ok_or(Error::SingularChain { condition })?;
    Ok((pi, condition))
}

/// `diag(pi)^-1 M^T diag(pi)`.
pub fn reverse_routing(matrix: &DMatrix<f64>, pi: &DVector<f64>) -> DMatrix<f64> {
    let k = matrix.nrows();
    DMatrix::from_fn(k, k, |i, j| pi[j] * matrix[(j, i)] / pi[i])
}
