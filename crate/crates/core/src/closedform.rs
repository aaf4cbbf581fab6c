//! Explicit moment formulas for two-state environments in which one state
//! has exponential sojourns. They are independent of the matrix recursion in
//! [`crate::moments`] and serve as its cross-check.

use crate::environment::{EnvironmentModel, SojournDistribution, StateParams};
use crate::error::{Error, Result};
use crate::moments::{binomial, MAX_ORDER};

/// Below this the product denominators are treated as zero.
const MIN_DENOMINATOR: f64 = 1e-14;

/// Orders above this accumulate the products in log space.
const LOG_SPACE_ORDER: usize = 12;

/// Two-state environment alternating between its states; state 2 sojourns
/// are exponential.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStateModel {
    arrival: [f64; 2],
    service: [f64; 2],
    sojourn1: SojournDistribution,
    exit_rate2: f64,
}

impl TwoStateModel {
    /// `service` holds the per-state service rates `beta_k * mu`, both positive.
    pub fn new(
        arrival: [f64; 2],
        service: [f64; 2],
        sojourn1: SojournDistribution,
        exit_rate2: f64,
    ) -> Result<Self> {
        if arrival.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(Error::Degenerate(format!(
                "arrival rates {arrival:?} must be nonnegative"
            )));
        }
        if service.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::Degenerate(format!(
                "service rates {service:?} must be positive"
            )));
        }
        if !(exit_rate2.is_finite() && exit_rate2 > 0.0) {
            return Err(Error::Degenerate(format!(
                "state 2 exit rate {exit_rate2} must be positive"
            )));
        }
        if let Some(reason) = sojourn1.check() {
            return Err(Error::Degenerate(format!("state 1: {reason}")));
        }
        Ok(Self {
            arrival,
            service,
            sojourn1,
            exit_rate2,
        })
    }

    /// Extracts the two-state form of a general model. When only state 1 is
    /// exponential the labels are swapped and `true` is returned alongside.
    pub fn from_environment(model: &EnvironmentModel) -> Result<(Self, bool)> {
        model.ensure_valid()?;
        if model.state_count() != 2 {
            return Err(Error::Unsupported(format!(
                "closed form needs 2 states, model has {}",
                model.state_count()
            )));
        }
        let mu = model.service_rates();
        let (first, second, swapped) = match (&model.states[0].sojourn, &model.states[1].sojourn) {
            (_, SojournDistribution::Exponential { .. }) => (0, 1, false),
            (SojournDistribution::Exponential { .. }, _) => (1, 0, true),
            _ => {
                return Err(Error::Unsupported(
                    "closed form needs an exponential sojourn in one of the states".into(),
                ))
            }
        };
        let SojournDistribution::Exponential { rate } = model.states[second].sojourn else {
            unreachable!()
        };
        let m = Self::new(
            [
                model.states[first].arrival_rate,
                model.states[second].arrival_rate,
            ],
            [mu[first], mu[second]],
            model.states[first].sojourn.clone(),
            rate,
        )?;
        Ok((m, swapped))
    }

    /// The same system as a general environment with `mu = max(mu_1, mu_2)`.
    pub fn to_environment(&self) -> EnvironmentModel {
        let mu = self.service[0].max(self.service[1]);
        EnvironmentModel {
            service_rate: mu,
            states: vec![
                StateParams {
                    arrival_rate: self.arrival[0],
                    speed: self.service[0] / mu,
                    sojourn: self.sojourn1.clone(),
                },
                StateParams {
                    arrival_rate: self.arrival[1],
                    speed: self.service[1] / mu,
                    sojourn: SojournDistribution::Exponential {
                        rate: self.exit_rate2,
                    },
                },
            ],
            routing: nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        }
    }

    pub fn rho(&self) -> [f64; 2] {
        [
            self.arrival[0] / self.service[0],
            self.arrival[1] / self.service[1],
        ]
    }

    /// `rho_2 - rho_1`; may be negative.
    pub fn rho_star(&self) -> f64 {
        let [r1, r2] = self.rho();
        r2 - r1
    }

    pub fn sojourn1(&self) -> &SojournDistribution {
        &self.sojourn1
    }

    pub fn exit_rate2(&self) -> f64 {
        self.exit_rate2
    }

    pub fn service(&self) -> [f64; 2] {
        self.service
    }

    fn sojourn1_reciprocal(&self, order: usize) -> Result<f64> {
        let argument = order as f64 * self.service[0];
        let v = self.sojourn1.laplace_reciprocal(argument)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::TransformOverflow {
                state: 0,
                order,
                argument,
            })
        }
    }
}

/// Moments of the Palm intensities shifted by `rho_1`:
/// `state1[n] = E[(|A_01| - rho_1)^n]`, likewise for state 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedPalmMoments {
    pub state1: Vec<f64>,
    pub state2: Vec<f64>,
}

/// `m~01^(n) = c^n Π_{j=1..n} j τ1⁻¹((j-1)μ1) / (τ1⁻¹(jμ1) τ2⁻¹(jμ2) - 1)`
/// with `c = μ2 ρ★ / τ̄2`, and `m~02^(n) = τ1⁻¹(nμ1) m~01^(n)`.
pub fn k2_shifted_palm_moments(model: &TwoStateModel, n_max: usize) -> Result<ShiftedPalmMoments> {
    if n_max > MAX_ORDER {
        return Err(Error::OrderTooLarge {
            requested: n_max,
            max: MAX_ORDER,
        });
    }
    let [mu1, mu2] = model.service;
    let c = mu2 * model.rho_star() / model.exit_rate2;
    let mut factors = Vec::with_capacity(n_max);
    for j in 1..=n_max {
        let s1 = j as f64 * mu1;
        // τ1⁻¹(s1) - 1, kept accurate for small arguments
        let excess1 = model.sojourn1.laplace_complement(s1)? / model.sojourn1.laplace(s1)?;
        let x2 = j as f64 * mu2 / model.exit_rate2;
        let denominator = excess1 * (1.0 + x2) + x2;
        if !denominator.is_finite() {
            return Err(Error::TransformOverflow {
                state: 0,
                order: j,
                argument: s1,
            });
        }
        if denominator <= MIN_DENOMINATOR {
            return Err(Error::Degenerate(format!(
                "product denominator {denominator:e} at order {j}"
            )));
        }
        factors.push(j as f64 * model.sojourn1_reciprocal(j - 1)? / denominator);
    }

    let mut state1 = vec![1.0];
    if n_max > LOG_SPACE_ORDER {
        let log_c = c.abs().ln();
        let mut log_acc = 0.0;
        for (i, f) in factors.iter().enumerate() {
            let n = i + 1;
            log_acc += f.ln();
            let magnitude = if c == 0.0 {
                0.0
            } else {
                (n as f64 * log_c + log_acc).exp()
            };
            let sign = if c < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
            state1.push(sign * magnitude);
        }
    } else {
        let mut acc = 1.0;
        for f in &factors {
            acc *= c * f;
            state1.push(acc);
        }
    }
    let state2 = state1
        .iter()
        .enumerate()
        .map(|(n, v)| Ok(v * model.sojourn1_reciprocal(n)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(ShiftedPalmMoments { state1, state2 })
}

/// Unshifted Palm moments `m0_k^(n) = Σ_j C(n,j) ρ1^(n-j) m~0k^(j)`.
pub fn k2_palm_moments(model: &TwoStateModel, n_max: usize) -> Result<[Vec<f64>; 2]> {
    let shifted = k2_shifted_palm_moments(model, n_max)?;
    let rho1 = model.rho()[0];
    Ok([
        unshift(&shifted.state1, rho1),
        unshift(&shifted.state2, rho1),
    ])
}

/// Moments of `X + shift` from the moments of `X`.
pub fn unshift(moments: &[f64], shift: f64) -> Vec<f64> {
    (0..moments.len())
        .map(|n| {
            (0..=n)
                .map(|j| binomial(n, j) * shift.powi((n - j) as i32) * moments[j])
                .sum()
        })
        .collect()
}

/// Taylor coefficients `ρ★^n (a)_n / (a+b+1)_n` of the Kummer function
/// `M(a, a+b+1, ρ★ s)`, the shifted moments when both sojourns are exponential.
pub fn kummer_reference(a: f64, b: f64, rho_star: f64, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut acc = 1.0;
    out.push(acc);
    for i in 0..n_max {
        let i = i as f64;
        acc *= rho_star * (a + i) / (a + b + 1.0 + i);
        out.push(acc);
    }
    out
}

fn rising(x: f64, n: usize) -> f64 {
    (0..n).map(|i| x + i as f64).product()
}

/// Direct evaluation of the shifted state-1 moments for Gamma(κ, rate) sojourns
/// in state 1:
/// `n! ρ★^n [(a)_n]^κ / Π_{j=1..n} [(a+j)^κ (b+j) - a^κ b]`
/// with `a = rate/μ1`, `b = τ̄2/μ2`.
pub fn gamma_reference(model: &TwoStateModel, n_max: usize) -> Result<Vec<f64>> {
    let SojournDistribution::Gamma { shape, rate } = model.sojourn1 else {
        return Err(Error::Unsupported("state 1 sojourn is not Gamma".into()));
    };
    let [mu1, mu2] = model.service;
    let a = rate / mu1;
    let b = model.exit_rate2 / mu2;
    let rho_star = model.rho_star();
    Ok((0..=n_max)
        .map(|n| {
            let factorial: f64 = (1..=n).map(|j| j as f64).product();
            let numerator = factorial * rho_star.powi(n as i32) * rising(a, n).powf(shape);
            let denominator: f64 = (1..=n)
                .map(|j| {
                    let j = j as f64;
                    (a + j).powf(shape) * (b + j) - a.powf(shape) * b
                })
                .product();
            numerator / denominator
        })
        .collect())
}
