//! Structural identities that the computed moment vectors must satisfy.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{binomial, build_b_forward, build_r, sign, MomentTable, Weighting};
use crate::environment::{ChainStatics, EnvironmentModel, SojournDistribution};
use crate::error::Result;

fn scaled(residual: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        residual / scale
    } else {
        residual
    }
}

/// Forward-chain form of the Palm relation: for every order `n`,
/// `Σ_j (-1)^j C(n,j) m0^(j)ᵀ Π B'_n R^(n-j) = 0` with `B'_n` built from `P`.
///
/// Returns one scaled max-norm residual per order `0..=n_max`.
pub fn check_forward_relation(
    model: &EnvironmentModel,
    statics: &ChainStatics,
    palm: &[DVector<f64>],
) -> Result<Vec<f64>> {
    let rho = build_r(model)?;
    let k = model.state_count();
    let mut out = Vec::with_capacity(palm.len());
    for n in 0..palm.len() {
        let b = build_b_forward(model, n)?;
        let b = b.matrix();
        let abs_b = b.abs();
        let mut row = DVector::<f64>::zeros(k);
        let mut scale = DVector::<f64>::zeros(k);
        for (j, m) in palm.iter().take(n + 1).enumerate() {
            let coeff = sign(j) * binomial(n, j);
            let weighted = m.component_mul(&statics.pi);
            let left = b.tr_mul(&weighted);
            let left_abs = abs_b.tr_mul(&weighted.abs());
            for c in 0..k {
                let r = rho[c].powi((n - j) as i32);
                row[c] += coeff * left[c] * r;
                scale[c] += coeff.abs() * left_abs[c] * r;
            }
        }
        out.push(scaled(row.amax(), scale.amax()));
    }
    Ok(out)
}

/// Residuals of `(mᵀ_n W)(n M - G) = n (mᵀ_{n-1} W) Λ` for `n = 1..`, where
/// `G = diag(1/E[T_k]) (P - I)` is the generator of the environment and
/// `W = diag(weights)`. `None` unless every sojourn is exponential.
pub fn markovian_identity_residuals(
    model: &EnvironmentModel,
    vectors: &[DVector<f64>],
    weights: &DVector<f64>,
) -> Option<Vec<f64>> {
    if !model.all_exponential() {
        return None;
    }
    let k = model.state_count();
    let exit_rates: Vec<f64> = model
        .states
        .iter()
        .map(|s| match s.sojourn {
            SojournDistribution::Exponential { rate } => rate,
            _ => unreachable!("checked above"),
        })
        .collect();
    let generator = DMatrix::from_fn(k, k, |i, j| {
        exit_rates[i] * (model.routing[(i, j)] - f64::from(u8::from(i == j)))
    });
    let abs_g = generator.abs();
    let mu = model.service_rates();
    let lambda = model.arrival_rates();
    let out = (1..vectors.len())
        .map(|n| {
            let cur = vectors[n].component_mul(weights);
            let prev = vectors[n - 1].component_mul(weights);
            let cur_g = generator.tr_mul(&cur);
            let cur_abs_g = abs_g.tr_mul(&cur.abs());
            let nf = n as f64;
            let (mut res, mut scale) = (0.0f64, 0.0f64);
            for c in 0..k {
                let lhs = nf * mu[c] * cur[c] - cur_g[c];
                let rhs = nf * prev[c] * lambda[c];
                res = res.max((lhs - rhs).abs());
                scale = scale.max(nf * mu[c] * cur[c].abs() + cur_abs_g[c] + rhs.abs());
            }
            scaled(res, scale)
        })
        .collect();
    Some(out)
}

/// The Markovian-environment identity evaluated under both weightings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovianIdentity {
    /// Residuals with time-stationary weights; these vanish.
    pub occupancy: Vec<f64>,
    /// Residuals with embedded-chain weights; nonzero unless all mean
    /// sojourns coincide.
    pub embedded: Vec<f64>,
}

pub fn check_markovian_identity(
    model: &EnvironmentModel,
    statics: &ChainStatics,
    table: &MomentTable,
) -> Option<MarkovianIdentity> {
    let residuals =
        |w: Weighting| markovian_identity_residuals(model, &table.stationary, w.weights(statics));
    Some(MarkovianIdentity {
        occupancy: residuals(Weighting::Occupancy)?,
        embedded: residuals(Weighting::Embedded)?,
    })
}
