//! Sojourn-time laws of the environment states.
//!
//! Only the Laplace transform at nonnegative real arguments and the mean are
//! needed by the analytic recursions; the simulator additionally samples from
//! the law and from its equilibrium (residual) law.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A positive sojourn-time distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SojournDistribution {
    Exponential {
        rate: f64,
    },
    /// Shape/rate parameterization: mean `shape / rate`.
    Gamma {
        shape: f64,
        rate: f64,
    },
    Deterministic {
        value: f64,
    },
    #[serde(rename = "hyperexponential")]
    HyperExponential {
        probs: Vec<f64>,
        rates: Vec<f64>,
    },
    /// User-supplied transform: `(s, E[exp(-sT)])` pairs starting at `(0, 1)`,
    /// interpolated log-linearly. Analytic use only.
    Tabulated {
        points: Vec<(f64, f64)>,
        mean: f64,
    },
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

impl SojournDistribution {
    /// Returns a description of the first broken parameter constraint, if any.
    pub fn check(&self) -> Option<String> {
        match self {
            Self::Exponential { rate } if !positive(*rate) => {
                Some(format!("exponential rate must be positive, got {rate}"))
            }
            Self::Gamma { shape, rate } if !positive(*shape) || !positive(*rate) => Some(format!(
                "gamma shape and rate must be positive, got shape {shape}, rate {rate}"
            )),
            Self::Deterministic { value } if !positive(*value) => {
                Some(format!("deterministic value must be positive, got {value}"))
            }
            Self::HyperExponential { probs, rates } => {
                if probs.is_empty() || probs.len() != rates.len() {
                    return Some(format!(
                        "hyperexponential needs equally many probabilities and rates ({} vs {})",
                        probs.len(),
                        rates.len()
                    ));
                }
                if let Some(r) = rates.iter().find(|r| !positive(**r)) {
                    return Some(format!("hyperexponential rates must be positive, got {r}"));
                }
                if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                    return Some("hyperexponential probabilities must be nonnegative".into());
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Some(format!(
                        "hyperexponential probabilities sum to {total}, expected 1"
                    ));
                }
                None
            }
            Self::Tabulated { points, mean } => {
                if !positive(*mean) {
                    return Some(format!("tabulated mean must be positive, got {mean}"));
                }
                match points.first() {
                    Some(&(s, v)) if s == 0.0 && v == 1.0 => {}
                    _ => return Some("tabulated transform must start at (0, 1)".into()),
                }
                if points.len() < 2 {
                    return Some("tabulated transform needs at least two points".into());
                }
                for w in points.windows(2) {
                    let ((s0, v0), (s1, v1)) = (w[0], w[1]);
                    if !(s1 > s0) || !s1.is_finite() {
                        return Some("tabulated arguments must be strictly increasing".into());
                    }
                    if !(v1 < v0 && v1 > 0.0) {
                        return Some(format!(
                            "tabulated transform must be strictly decreasing and positive (at s = {s1})"
                        ));
                    }
                }
                None
            }
            _ => None,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::Gamma { shape, rate } => shape / rate,
            Self::Deterministic { value } => *value,
            Self::HyperExponential { probs, rates } => {
                probs.iter().zip(rates).map(|(p, r)| p / r).sum()
            }
            Self::Tabulated { mean, .. } => *mean,
        }
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self, Self::Exponential { .. })
    }

    /// `E[exp(-sT)]`.
    pub fn laplace(&self, s: f64) -> Result<f64> {
        check_argument(s)?;
        Ok(match self {
            Self::Exponential { rate } => rate / (rate + s),
            Self::Gamma { shape, rate } => (-shape * (s / rate).ln_1p()).exp(),
            Self::Deterministic { value } => (-s * value).exp(),
            // normalized so that tau(0) is exactly 1 even when the
            // probabilities sum to 1 only up to rounding
            Self::HyperExponential { probs, rates } => {
                probs
                    .iter()
                    .zip(rates)
                    .map(|(p, r)| p / (1.0 + s / r))
                    .sum::<f64>()
                    / probs.iter().sum::<f64>()
            }
            Self::Tabulated { points, .. } => tabulated_value(points, s)?,
        })
    }

    /// `1 - E[exp(-sT)]`, evaluated without cancellation for small `s`.
    pub fn laplace_complement(&self, s: f64) -> Result<f64> {
        check_argument(s)?;
        Ok(match self {
            Self::Exponential { rate } => s / (rate + s),
            Self::Gamma { shape, rate } => -(-shape * (s / rate).ln_1p()).exp_m1(),
            Self::Deterministic { value } => -(-s * value).exp_m1(),
            Self::HyperExponential { probs, rates } => {
                probs
                    .iter()
                    .zip(rates)
                    .map(|(p, r)| p * s / (r + s))
                    .sum::<f64>()
                    / probs.iter().sum::<f64>()
            }
            Self::Tabulated { points, .. } => 1.0 - tabulated_value(points, s)?,
        })
    }

    /// `1 / E[exp(-sT)]`. May be `+inf` when the transform underflows.
    pub fn laplace_reciprocal(&self, s: f64) -> Result<f64> {
        check_argument(s)?;
        Ok(match self {
            Self::Exponential { rate } => 1.0 + s / rate,
            Self::Gamma { shape, rate } => (shape * (s / rate).ln_1p()).exp(),
            Self::Deterministic { value } => (s * value).exp(),
            _ => 1.0 / self.laplace(s)?,
        })
    }

    /// Transform of the equilibrium (residual) sojourn,
    /// `(1 - E[exp(-sT)]) / (s E[T])`, continuous at `s = 0`.
    pub fn residual_laplace(&self, s: f64) -> Result<f64> {
        check_argument(s)?;
        if s == 0.0 {
            return Ok(1.0);
        }
        Ok(match self {
            Self::Exponential { rate } => rate / (rate + s),
            Self::HyperExponential { probs, rates } => {
                probs
                    .iter()
                    .zip(rates)
                    .map(|(p, r)| p / (r + s))
                    .sum::<f64>()
                    / self.mean()
            }
            _ => self.laplace_complement(s)? / (s * self.mean()),
        })
    }
}

fn check_argument(s: f64) -> Result<()> {
    if s >= 0.0 && !s.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "Laplace transform argument must be nonnegative, got {s}"
        )))
    }
}

fn tabulated_value(points: &[(f64, f64)], s: f64) -> Result<f64> {
    let idx = points.partition_point(|&(x, _)| x <= s);
    if idx == points.len() {
        let &(last, v) = points.last().expect("validated table is nonempty");
        if s == last {
            return Ok(v);
        }
        return Err(Error::Domain(format!(
            "argument {s} lies beyond the tabulated range (max {last})"
        )));
    }
    let (s0, v0) = points[idx - 1];
    let (s1, v1) = points[idx];
    let t = (s - s0) / (s1 - s0);
    Ok((v0.ln() * (1.0 - t) + v1.ln() * t).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn families() -> Vec<SojournDistribution> {
        vec![
            SojournDistribution::Exponential { rate: 2.0 },
            SojournDistribution::Gamma {
                shape: 2.5,
                rate: 1.5,
            },
            SojournDistribution::Gamma {
                shape: 0.5,
                rate: 3.0,
            },
            SojournDistribution::Deterministic { value: 0.7 },
            SojournDistribution::HyperExponential {
                probs: vec![0.3, 0.7],
                rates: vec![0.5, 4.0],
            },
        ]
    }

    #[test]
    fn transform_examples() {
        let exp = SojournDistribution::Exponential { rate: 2.0 };
        assert_eq!(exp.laplace(0.0).unwrap(), 1.0);
        let gamma = SojournDistribution::Gamma {
            shape: 2.0,
            rate: 3.0,
        };
        assert_relative_eq!(gamma.laplace(3.0).unwrap(), 0.25, max_relative = 1e-15);
        let det = SojournDistribution::Deterministic { value: 1.0 };
        assert_relative_eq!(det.laplace(2f64.ln()).unwrap(), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn negative_argument_is_a_domain_error() {
        for d in families() {
            assert!(matches!(d.laplace(-1e-3), Err(Error::Domain(_))));
            assert!(matches!(d.residual_laplace(-1.0), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn means() {
        let m: Vec<f64> = families().iter().map(|d| d.mean()).collect();
        assert_relative_eq!(m[0], 0.5);
        assert_relative_eq!(m[1], 2.5 / 1.5);
        assert_relative_eq!(m[3], 0.7);
        assert_relative_eq!(m[4], 0.3 / 0.5 + 0.7 / 4.0);
    }

    #[test]
    fn transforms_are_bounded_and_decreasing_on_a_grid() {
        for d in families() {
            assert_eq!(d.laplace(0.0).unwrap(), 1.0);
            let mut prev = 1.0;
            for i in 1..400 {
                let s = 0.05 * i as f64;
                let v = d.laplace(s).unwrap();
                assert!(v > 0.0 && v <= 1.0, "{d:?} at {s}: {v}");
                assert!(v < prev, "{d:?} not decreasing at {s}");
                assert_relative_eq!(v + d.laplace_complement(s).unwrap(), 1.0, epsilon = 1e-14);
                assert_relative_eq!(v * d.laplace_reciprocal(s).unwrap(), 1.0, epsilon = 1e-13);
                prev = v;
            }
        }
    }

    #[test]
    fn residual_of_exponential_is_itself() {
        let d = SojournDistribution::Exponential { rate: 1.7 };
        for i in 0..100 {
            let s = 0.1 * i as f64;
            assert_eq!(d.residual_laplace(s).unwrap(), d.laplace(s).unwrap());
            // the generic formula agrees with the closed form
            if s > 0.0 {
                let generic = d.laplace_complement(s).unwrap() / (s * d.mean());
                assert_relative_eq!(generic, d.laplace(s).unwrap(), max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn residual_at_zero_is_one() {
        for d in families() {
            assert_eq!(d.residual_laplace(0.0).unwrap(), 1.0);
            // approaches 1 continuously
            assert_relative_eq!(d.residual_laplace(1e-9).unwrap(), 1.0, epsilon = 1e-7);
        }
    }

    /// Residual of Deterministic(d) is Uniform(0, d); integrate its transform
    /// with composite Simpson as an independent check.
    #[test]
    fn deterministic_residual_matches_quadrature() {
        let (d, s) = (2.0_f64, 1.0_f64);
        let n = 2000;
        let h = d / n as f64;
        let f = |x: f64| (-s * x).exp() / d;
        let mut acc = f(0.0) + f(d);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        let quad = acc * h / 3.0;
        let dist = SojournDistribution::Deterministic { value: d };
        let got = dist.residual_laplace(s).unwrap();
        assert_relative_eq!(got, quad, max_relative = 1e-12);
        assert_relative_eq!(got, 0.432_332_358_381_693_6, max_relative = 1e-12);
    }

    #[test]
    fn tabulated_matches_source_on_nodes_and_rejects_bad_tables() {
        let src = SojournDistribution::Gamma {
            shape: 2.0,
            rate: 1.0,
        };
        let points: Vec<(f64, f64)> = (0..=40)
            .map(|i| (0.25 * i as f64, src.laplace(0.25 * i as f64).unwrap()))
            .collect();
        let tab = SojournDistribution::Tabulated { points, mean: 2.0 };
        assert!(tab.check().is_none());
        assert_relative_eq!(
            tab.laplace(2.0).unwrap(),
            src.laplace(2.0).unwrap(),
            max_relative = 1e-14
        );
        assert!(tab.laplace(2.1).unwrap() < tab.laplace(2.0).unwrap());
        assert!(matches!(tab.laplace(11.0), Err(Error::Domain(_))));

        let flat = SojournDistribution::Tabulated {
            points: vec![(0.0, 1.0), (1.0, 0.5), (2.0, 0.5)],
            mean: 1.0,
        };
        assert!(flat.check().unwrap().contains("decreasing"));
        let unanchored = SojournDistribution::Tabulated {
            points: vec![(0.0, 0.9), (1.0, 0.5)],
            mean: 1.0,
        };
        assert!(unanchored.check().is_some());
    }

    #[test]
    fn parameter_checks() {
        assert!(SojournDistribution::Exponential { rate: 0.0 }
            .check()
            .is_some());
        assert!(SojournDistribution::Gamma {
            shape: -1.0,
            rate: 1.0
        }
        .check()
        .is_some());
        assert!(SojournDistribution::Deterministic { value: f64::NAN }
            .check()
            .is_some());
        assert!(SojournDistribution::HyperExponential {
            probs: vec![0.5, 0.4],
            rates: vec![1.0, 2.0]
        }
        .check()
        .is_some());
        for d in families() {
            assert!(d.check().is_none());
        }
    }
}
