//! Moments of the stationary number of customers.
//!
//! The customer count is mixed Poisson, so its factorial moments are the raw
//! moments of the random intensity it mixes over. Those raw moments are built
//! order by order: first per-state vectors for the Palm environment (a jump
//! at time 0), then per-state vectors for the time-stationary environment,
//! and finally a contraction with state weights.

mod checks;
mod stirling;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use checks::{
    check_forward_relation, check_markovian_identity, markovian_identity_residuals,
    MarkovianIdentity,
};
pub use stirling::StirlingTables;

use crate::environment::{ChainStatics, EnvironmentModel};
use crate::error::{Error, Result};
use crate::linalg::Factored;

pub const DEFAULT_ORDER: usize = 10;
pub const MAX_ORDER: usize = 20;

/// Largest tolerated back-substitution residual of a `B_n` solve.
pub const MAX_SOLVE_RESIDUAL: f64 = 1e-8;

/// Negative entries smaller than this fraction of the largest entry of the
/// same order are attributed to rounding.
const NEGATIVE_TOLERANCE: f64 = 1e-9;

/// State weights used to contract per-state moment vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Stationary vector of the embedded jump chain.
    Embedded,
    /// Time-stationary state law, `pi_k E[T_k]` normalized.
    Occupancy,
}

impl Weighting {
    pub const ALL: [Weighting; 2] = [Weighting::Embedded, Weighting::Occupancy];

    pub fn weights<'a>(&self, statics: &'a ChainStatics) -> &'a DVector<f64> {
        match self {
            Weighting::Embedded => &statics.pi,
            Weighting::Occupancy => &statics.occupancy,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Weighting::Embedded => "embedded",
            Weighting::Occupancy => "occupancy",
        }
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as f64
}

fn sign(exponent: usize) -> f64 {
    if exponent.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn check_order(n_max: usize) -> Result<()> {
    if n_max > MAX_ORDER {
        Err(Error::OrderTooLarge {
            requested: n_max,
            max: MAX_ORDER,
        })
    } else {
        Ok(())
    }
}

/// Offered loads `rho_k = lambda_k / mu_k` (the diagonal of `R`).
pub fn build_r(model: &EnvironmentModel) -> Result<DVector<f64>> {
    let rates = model.service_rates();
    let loads = model
        .states
        .iter()
        .zip(rates)
        .enumerate()
        .map(|(k, (s, mu_k))| {
            if s.arrival_rate == 0.0 {
                Ok(0.0)
            } else if mu_k > 0.0 {
                Ok(s.arrival_rate / mu_k)
            } else {
                Err(Error::InfiniteLoad { state: k })
            }
        });
    Ok(DVector::from_vec(loads.collect::<Result<Vec<_>>>()?))
}

fn transform_reciprocals(model: &EnvironmentModel, order: usize) -> Result<Vec<f64>> {
    model
        .service_rates()
        .into_iter()
        .zip(&model.states)
        .enumerate()
        .map(|(k, (mu_k, s))| {
            let argument = order as f64 * mu_k;
            let v = s.sojourn.laplace_reciprocal(argument)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::TransformOverflow {
                    state: k,
                    order,
                    argument,
                })
            }
        })
        .collect()
}

/// `diag(1 / tau_k(n mu_k)) - transition`, factored.
fn shifted_system(
    model: &EnvironmentModel,
    transition: &DMatrix<f64>,
    order: usize,
) -> Result<Factored> {
    let diag = transform_reciprocals(model, order)?;
    let mut b = -transition.clone();
    for (k, d) in diag.into_iter().enumerate() {
        b[(k, k)] += d;
    }
    Ok(Factored::new(b))
}

/// `B_n = diag(1 / tau_k(n mu_k)) - Q`, factored, with its condition estimate.
pub fn build_b(model: &EnvironmentModel, statics: &ChainStatics, order: usize) -> Result<Factored> {
    shifted_system(model, &statics.reversed, order)
}

/// Forward-chain counterpart `B'_n = diag(1 / tau_k(n mu_k)) - P`.
pub fn build_b_forward(model: &EnvironmentModel, order: usize) -> Result<Factored> {
    shifted_system(model, &model.routing, order)
}

/// Per-order numerical diagnostics of the Palm recursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderDiagnostics {
    pub order: usize,
    /// 1-norm condition estimate of `B_n`.
    pub condition: f64,
    /// Relative back-substitution residual of the `B_n` solve.
    pub solve_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PalmMoments {
    /// `vectors[n][k]`: n-th moment of the intensity seen from a jump out of state `k`.
    pub vectors: Vec<DVector<f64>>,
    /// `shifted[n][k]`: the same moments centred at the state's own load,
    /// `E[(A0_k - rho_k)^n]`.
    pub shifted: Vec<DVector<f64>>,
    /// One entry per order `n >= 1`.
    pub diagnostics: Vec<OrderDiagnostics>,
}

fn ensure_nonnegative(order: usize, v: &DVector<f64>) -> Result<()> {
    let scale = v.amax();
    for (state, &value) in v.iter().enumerate() {
        if !value.is_finite() || value < -NEGATIVE_TOLERANCE * scale {
            return Err(Error::NegativeMoment {
                order,
                state,
                value,
            });
        }
    }
    Ok(())
}

/// Moments about zero from moments about `rho_k`, state by state.
fn unshift_vectors(shifted: &[DVector<f64>], rho: &DVector<f64>) -> DVector<f64> {
    let n = shifted.len() - 1;
    DVector::from_fn(rho.len(), |s, _| {
        (0..=n)
            .map(|j| binomial(n, j) * rho[s].powi((n - j) as i32) * shifted[j][s])
            .sum()
    })
}

/// Palm moment vectors `m0^(0..=n_max)`.
///
/// Solves `B_n m0^(n) = Σ_{j<n} (-1)^(n-1-j) C(n,j) R^(n-j) B_n m0^(j)` in
/// its centred form: with `x_k^(n) = E[(A0_k - rho_k)^n]`,
/// `B_n x^(n) = h^(n)`, `h_s^(n) = Σ_t Q_st Σ_{j<n} C(n,j) (rho_t - rho_s)^(n-j) x_t^(j)`.
/// The two are algebraically identical, but the centred right-hand side
/// avoids the alternating binomial sums, which cancel badly when `B_n` has
/// large diagonal entries and loads are similar.
pub fn palm_moment_vectors(
    model: &EnvironmentModel,
    statics: &ChainStatics,
    n_max: usize,
) -> Result<PalmMoments> {
    check_order(n_max)?;
    let rho = build_r(model)?;
    let k = model.state_count();
    let q = &statics.reversed;
    let ones = DVector::from_element(k, 1.0);
    let mut shifted = vec![ones.clone()];
    let mut vectors = vec![ones];
    let mut diagnostics = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let b = build_b(model, statics, n)?;
        let rhs = DVector::from_fn(k, |s, _| {
            (0..k)
                .filter(|&t| q[(s, t)] != 0.0)
                .map(|t| {
                    let gap = rho[t] - rho[s];
                    let centred: f64 = (0..n)
                        .map(|j| binomial(n, j) * gap.powi((n - j) as i32) * shifted[j][t])
                        .sum();
                    q[(s, t)] * centred
                })
                .sum()
        });
        let condition = b.condition();
        let (x, residual) = b.solve(&rhs).ok_or(Error::IllConditioned {
            order: n,
            residual: f64::INFINITY,
            condition,
        })?;
        if !(residual <= MAX_SOLVE_RESIDUAL) {
            return Err(Error::IllConditioned {
                order: n,
                residual,
                condition,
            });
        }
        shifted.push(x);
        let m = unshift_vectors(&shifted, &rho);
        ensure_nonnegative(n, &m)?;
        diagnostics.push(OrderDiagnostics {
            order: n,
            condition,
            solve_residual: residual,
        });
        vectors.push(m);
    }
    Ok(PalmMoments {
        vectors,
        shifted,
        diagnostics,
    })
}

/// `E_n = diag(tau*_k(n mu_k) / tau_k(n mu_k))`.
fn residual_ratio(model: &EnvironmentModel, order: usize) -> Result<Vec<f64>> {
    transform_reciprocals(model, order)?;
    model
        .service_rates()
        .into_iter()
        .zip(&model.states)
        .map(|(mu_k, s)| {
            let x = order as f64 * mu_k;
            // a ratio, so exponential sojourns give exactly 1
            Ok(s.sojourn.residual_laplace(x)? / s.sojourn.laplace(x)?)
        })
        .collect()
}

/// Time-stationary moment vectors `m^(0..=n_max)` from the Palm moments.
///
/// Equivalent to `m^(n) = E_n m0^(n) + Σ_{j<n} (-1)^(n-1-j) C(n,j) R^(n-j) [m^(j) - E_n m0^(j)]`,
/// which in centred form reads `E[(A_k - rho_k)^n] = (E_n)_k E[(A0_k - rho_k)^n]`.
pub fn stationary_moment_vectors(
    model: &EnvironmentModel,
    palm: &PalmMoments,
) -> Result<Vec<DVector<f64>>> {
    let rho = build_r(model)?;
    let k = model.state_count();
    let mut centred = vec![DVector::from_element(k, 1.0)];
    let mut out = centred.clone();
    for n in 1..palm.shifted.len() {
        let e = residual_ratio(model, n)?;
        centred.push(DVector::from_fn(k, |s, _| e[s] * palm.shifted[n][s]));
        let v = unshift_vectors(&centred, &rho);
        ensure_nonnegative(n, &v)?;
        out.push(v);
    }
    Ok(out)
}

/// Moments of the customer count under one state weighting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NMoments {
    pub weighting: Weighting,
    /// `factorial[n] = E[N(N-1)...(N-n+1)]`, equal to the aggregated
    /// n-th raw moment of the mixing intensity.
    pub factorial: Vec<f64>,
    /// `raw[n] = E[N^n]`.
    pub raw: Vec<f64>,
}

pub fn assemble_n_moments(
    statics: &ChainStatics,
    stationary: &[DVector<f64>],
    weighting: Weighting,
    tables: &StirlingTables,
) -> NMoments {
    let w = weighting.weights(statics);
    let mut factorial: Vec<f64> = stationary.iter().map(|m| m.dot(w)).collect();
    // the weights sum to 1 only up to rounding
    factorial[0] = 1.0;
    let raw = tables.factorial_to_raw(&factorial);
    NMoments {
        weighting,
        factorial,
        raw,
    }
}

/// Every moment quantity up to `order`, under both weightings.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub order: usize,
    pub palm: Vec<DVector<f64>>,
    pub stationary: Vec<DVector<f64>>,
    pub embedded: NMoments,
    pub occupancy: NMoments,
    pub diagnostics: Vec<OrderDiagnostics>,
}

impl MomentTable {
    pub fn compute(model: &EnvironmentModel, statics: &ChainStatics, order: usize) -> Result<Self> {
        let tables = StirlingTables::new(order)?;
        let palm_moments = palm_moment_vectors(model, statics, order)?;
        let stationary = stationary_moment_vectors(model, &palm_moments)?;
        let PalmMoments {
            vectors: palm,
            diagnostics,
            ..
        } = palm_moments;
        let embedded = assemble_n_moments(statics, &stationary, Weighting::Embedded, &tables);
        let occupancy = assemble_n_moments(statics, &stationary, Weighting::Occupancy, &tables);
        Ok(Self {
            order,
            palm,
            stationary,
            embedded,
            occupancy,
            diagnostics,
        })
    }

    pub fn weighted(&self, weighting: Weighting) -> &NMoments {
        match weighting {
            Weighting::Embedded => &self.embedded,
            Weighting::Occupancy => &self.occupancy,
        }
    }
}
