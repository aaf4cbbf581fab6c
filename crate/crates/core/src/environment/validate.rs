use std::fmt;

use serde::Serialize;

use super::EnvironmentModel;

const ROW_SUM_TOL: f64 = 1e-12;

/// One broken model invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    TooFewStates {
        count: usize,
    },
    RoutingShape {
        rows: usize,
        cols: usize,
        states: usize,
    },
    RoutingEntry {
        row: usize,
        col: usize,
        value: f64,
    },
    RowSum {
        row: usize,
        sum: f64,
    },
    NonzeroDiagonal {
        state: usize,
        value: f64,
    },
    Reducible,
    ServiceRate {
        value: f64,
    },
    ArrivalRate {
        state: usize,
        value: f64,
    },
    Speed {
        state: usize,
        value: f64,
    },
    NoPositiveArrival,
    NoPositiveSpeed,
    InfiniteLoad {
        state: usize,
    },
    Sojourn {
        state: usize,
        reason: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TooFewStates { count } => write!(f, "need at least 2 states, got {count}"),
            Self::RoutingShape { rows, cols, states } => {
                write!(
                    f,
                    "routing is {rows}x{cols} but the model has {states} states"
                )
            }
            Self::RoutingEntry { row, col, value } => {
                write!(f, "routing[{row}][{col}] = {value} is outside [0, 1]")
            }
            Self::RowSum { row, sum } => write!(f, "routing row {row} sums to {sum}, expected 1"),
            Self::NonzeroDiagonal { state, value } => {
                write!(
                    f,
                    "routing[{state}][{state}] = {value}: self-transitions are not allowed"
                )
            }
            Self::Reducible => write!(f, "routing matrix is not irreducible"),
            Self::ServiceRate { value } => write!(f, "service rate mu = {value} must be positive"),
            Self::ArrivalRate { state, value } => {
                write!(f, "state {state}: arrival rate {value} must be nonnegative")
            }
            Self::Speed { state, value } => {
                write!(f, "state {state}: speed {value} must lie in [0, 1]")
            }
            Self::NoPositiveArrival => write!(f, "all arrival rates are zero; need max lambda > 0"),
            Self::NoPositiveSpeed => write!(f, "all speeds are zero; need max beta > 0"),
            Self::InfiniteLoad { state } => {
                write!(
                    f,
                    "state {state}: positive arrival rate with zero speed (infinite load)"
                )
            }
            Self::Sojourn { state, reason } => write!(f, "state {state}: {reason}"),
        }
    }
}

/// The list of violated invariants; empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ValidationReport(pub Vec<Violation>);

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.0
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.0 {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

pub(super) fn validate(model: &EnvironmentModel) -> ValidationReport {
    let mut out = Vec::new();
    let k = model.states.len();
    if k < 2 {
        out.push(Violation::TooFewStates { count: k });
    }
    if !(model.service_rate.is_finite() && model.service_rate > 0.0) {
        out.push(Violation::ServiceRate {
            value: model.service_rate,
        });
    }
    for (i, s) in model.states.iter().enumerate() {
        if !(s.arrival_rate.is_finite() && s.arrival_rate >= 0.0) {
            out.push(Violation::ArrivalRate {
                state: i,
                value: s.arrival_rate,
            });
        }
        if !(0.0..=1.0).contains(&s.speed) {
            out.push(Violation::Speed {
                state: i,
                value: s.speed,
            });
        }
        if s.arrival_rate > 0.0 && s.speed == 0.0 {
            out.push(Violation::InfiniteLoad { state: i });
        }
        if let Some(reason) = s.sojourn.check() {
            out.push(Violation::Sojourn { state: i, reason });
        }
    }
    if k > 0 {
        if !model.states.iter().any(|s| s.arrival_rate > 0.0) {
            out.push(Violation::NoPositiveArrival);
        }
        if !model.states.iter().any(|s| s.speed > 0.0) {
            out.push(Violation::NoPositiveSpeed);
        }
    }

    let p = &model.routing;
    if p.nrows() != k || p.ncols() != k {
        out.push(Violation::RoutingShape {
            rows: p.nrows(),
            cols: p.ncols(),
            states: k,
        });
        return ValidationReport(out);
    }
    let mut entries_ok = true;
    for i in 0..k {
        for j in 0..k {
            let v = p[(i, j)];
            if !(0.0..=1.0).contains(&v) {
                out.push(Violation::RoutingEntry {
                    row: i,
                    col: j,
                    value: v,
                });
                entries_ok = false;
            }
        }
        if p[(i, i)] != 0.0 {
            out.push(Violation::NonzeroDiagonal {
                state: i,
                value: p[(i, i)],
            });
        }
        let sum = p.row(i).sum();
        if !((sum - 1.0).abs() <= ROW_SUM_TOL) {
            out.push(Violation::RowSum { row: i, sum });
        }
    }
    if entries_ok && k > 0 && !irreducible(p) {
        out.push(Violation::Reducible);
    }
    ValidationReport(out)
}

/// Single communicating class: every state reaches state 0 and is reached from it.
fn irreducible(p: &nalgebra::DMatrix<f64>) -> bool {
    let k = p.nrows();
    let reach = |forward: bool| {
        let mut seen = vec![false; k];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..k {
                let w = if forward { p[(i, j)] } else { p[(j, i)] };
                if w > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}
