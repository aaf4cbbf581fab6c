//! The check battery behind `mminf validate`.

use clap::Args;
use serde::Serialize;

use super::report::CheckVerdict;
use crate::closedform::{
    gamma_reference, k2_palm_moments, k2_shifted_palm_moments, kummer_reference, unshift,
    TwoStateModel,
};
use crate::environment::{ChainStatics, EnvironmentModel, SojournDistribution};
use crate::error::Result;
use crate::moments::{
    check_forward_relation, check_markovian_identity, MomentTable, StirlingTables, Weighting,
};

#[derive(Debug, Clone, Copy, PartialEq, Args, Serialize)]
pub struct Tolerances {
    /// Forward relation, Markovian identity, mean load and Poisson reduction.
    #[arg(long, default_value_t = 1e-9)]
    pub tol_identity: f64,
    /// Stationary against Palm vectors when every sojourn is exponential.
    #[arg(long, default_value_t = 1e-12)]
    pub tol_exponential: f64,
    /// Relative residual of every linear solve.
    #[arg(long, default_value_t = 1e-10)]
    pub tol_solve: f64,
    /// Two-state recursion against the explicit product formula.
    #[arg(long, default_value_t = 1e-8)]
    pub tol_closed_form: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol_kummer: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol_gamma: f64,
    /// Factorial/raw round trips, relative to the absolute terms summed.
    #[arg(long, default_value_t = 1e-10)]
    pub tol_stirling: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_identity: 1e-9,
            tol_exponential: 1e-12,
            tol_solve: 1e-10,
            tol_closed_form: 1e-8,
            tol_kummer: 1e-9,
            tol_gamma: 1e-10,
            tol_stirling: 1e-10,
        }
    }
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_difference(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if a == b {
        0.0
    } else if scale > 0.0 {
        (a - b).abs() / scale
    } else {
        f64::NAN
    }
}

fn worst<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    // NaN must surface as a failure, so it wins over everything
    xs.into_iter().fold(0.0, |acc, x| {
        if x.is_nan() || acc.is_nan() {
            f64::NAN
        } else {
            acc.max(x)
        }
    })
}

fn worst_relative(a: &[f64], b: &[f64]) -> f64 {
    worst(a.iter().zip(b).map(|(x, y)| relative_difference(*x, *y)))
}

pub fn run_checks(
    model: &EnvironmentModel,
    statics: &ChainStatics,
    table: &MomentTable,
    tol: &Tolerances,
) -> Result<Vec<CheckVerdict>> {
    let mut out = Vec::new();
    let tables = StirlingTables::new(table.order)?;
    out.push(CheckVerdict::new(
        "stirling_inverse",
        if tables.are_mutual_inverses() {
            0.0
        } else {
            1.0
        },
        0.0,
    ));
    for w in Weighting::ALL {
        let m = table.weighted(w);
        out.push(CheckVerdict::new(
            format!("stirling_round_trip[{}]", w.name()),
            tables.round_trip_error(&m.factorial, &m.raw),
            tol.tol_stirling,
        ));
    }

    let solve = worst(table.diagnostics.iter().map(|d| {
        if d.condition.is_finite() {
            d.solve_residual
        } else {
            f64::INFINITY
        }
    }));
    out.push(CheckVerdict::new("solve_residual", solve, tol.tol_solve));

    let forward = check_forward_relation(model, statics, &table.palm)?;
    out.push(CheckVerdict::new(
        "forward_relation",
        worst(forward),
        tol.tol_identity,
    ));

    if let Some(identity) = check_markovian_identity(model, statics, table) {
        out.push(CheckVerdict::new(
            "markovian_identity",
            worst(identity.occupancy),
            tol.tol_identity,
        ));
        out.push(
            CheckVerdict::new(
                "markovian_identity[embedded]",
                worst(identity.embedded),
                tol.tol_identity,
            )
            .informational(),
        );
        let gap = worst(table.palm.iter().zip(&table.stationary).flat_map(|(p, s)| {
            p.iter()
                .zip(s.iter())
                .map(|(a, b)| relative_difference(*a, *b))
                .collect::<Vec<_>>()
        }));
        out.push(CheckVerdict::new(
            "stationary_equals_palm",
            gap,
            tol.tol_exponential,
        ));
    }

    let speeds_equal = model
        .states
        .iter()
        .all(|s| s.speed == model.states[0].speed);
    if speeds_equal {
        let mu = model.service_rates()[0];
        let load: f64 = statics
            .occupancy
            .iter()
            .zip(&model.states)
            .map(|(o, s)| o * s.arrival_rate / mu)
            .sum();
        out.push(CheckVerdict::new(
            "mean_load",
            relative_difference(table.occupancy.factorial[1], load),
            tol.tol_identity,
        ));
        if model
            .states
            .iter()
            .all(|s| s.arrival_rate == model.states[0].arrival_rate)
        {
            let rho = model.states[0].arrival_rate / mu;
            let poisson: Vec<f64> = (0..=table.order).map(|n| rho.powi(n as i32)).collect();
            for w in Weighting::ALL {
                out.push(CheckVerdict::new(
                    format!("poisson_reduction[{}]", w.name()),
                    worst_relative(&table.weighted(w).factorial, &poisson),
                    tol.tol_identity,
                ));
            }
        }
    }

    if let Ok((two, swapped)) = TwoStateModel::from_environment(model) {
        two_state_checks(&two, swapped, table, tol, &mut out)?;
    }
    Ok(out)
}

fn two_state_checks(
    two: &TwoStateModel,
    swapped: bool,
    table: &MomentTable,
    tol: &Tolerances,
    out: &mut Vec<CheckVerdict>,
) -> Result<()> {
    let n = table.order;
    let (first, second) = if swapped { (1, 0) } else { (0, 1) };
    let recursion = |k: usize| -> Vec<f64> { table.palm.iter().map(|v| v[k]).collect() };
    let (rec1, rec2) = (recursion(first), recursion(second));
    let closed = k2_palm_moments(two, n)?;
    out.push(CheckVerdict::new(
        "closed_form",
        worst_relative(&rec1, &closed[0]).max(worst_relative(&rec2, &closed[1])),
        tol.tol_closed_form,
    ));

    let [mu1, mu2] = two.service();
    let rho1 = two.rho()[0];
    let b = two.exit_rate2() / mu2;
    match *two.sojourn1() {
        SojournDistribution::Exponential { rate } => {
            let kummer = unshift(&kummer_reference(rate / mu1, b, two.rho_star(), n), rho1);
            out.push(CheckVerdict::new(
                "kummer",
                worst_relative(&rec1, &kummer),
                tol.tol_kummer,
            ));
        }
        SojournDistribution::Gamma { .. } => {
            let direct = gamma_reference(two, n)?;
            let shifted = k2_shifted_palm_moments(two, n)?;
            out.push(CheckVerdict::new(
                "gamma_reference",
                worst_relative(&shifted.state1, &direct),
                tol.tol_gamma,
            ));
        }
        _ => {}
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::chain_statics;
    use crate::fixtures::{identical_states, reference_model, two_state};

    fn checks(model: &EnvironmentModel, order: usize) -> Vec<CheckVerdict> {
        let st = chain_statics(model).unwrap();
        let table = MomentTable::compute(model, &st, order).unwrap();
        run_checks(model, &st, &table, &Tolerances::default()).unwrap()
    }

    fn names(v: &[CheckVerdict]) -> Vec<&str> {
        v.iter().map(|c| c.name.as_str()).collect()
    }

    #[test]
    fn relative_difference_edges() {
        assert_eq!(relative_difference(0.0, 0.0), 0.0);
        assert_eq!(relative_difference(2.0, 1.0), 0.5);
        assert!(worst([1.0, f64::NAN, 0.0]).is_nan());
    }

    #[test]
    fn identical_states_trigger_poisson_checks() {
        let v = checks(&identical_states(3, 2.0, 0.5, 1.0), 8);
        assert!(names(&v).contains(&"poisson_reduction[embedded]"));
        assert!(v.iter().all(|c| !c.fails_run()), "{v:#?}");
        // rates 1, 2, 3 give unequal mean sojourns
        let embedded = v
            .iter()
            .find(|c| c.name == "markovian_identity[embedded]")
            .unwrap();
        assert!(!embedded.passed);
    }

    #[test]
    fn two_state_gamma_runs_gamma_reference() {
        let m = two_state(
            [3.0, 0.5],
            [1.0, 0.6],
            1.0,
            SojournDistribution::Gamma {
                shape: 2.0,
                rate: 1.5,
            },
            SojournDistribution::Exponential { rate: 0.7 },
        );
        let v = checks(&m, 8);
        let n = names(&v);
        assert!(n.contains(&"closed_form") && n.contains(&"gamma_reference"));
        assert!(!n.contains(&"markovian_identity"));
        assert!(v.iter().all(|c| !c.fails_run()), "{v:#?}");
    }

    #[test]
    fn swapped_labels_still_match() {
        let m = two_state(
            [0.5, 3.0],
            [0.6, 1.0],
            1.0,
            SojournDistribution::Exponential { rate: 0.7 },
            SojournDistribution::Deterministic { value: 1.3 },
        );
        let v = checks(&m, 8);
        let cf = v.iter().find(|c| c.name == "closed_form").unwrap();
        assert!(cf.passed, "{cf:?}");
    }

    #[test]
    fn reference_model_passes() {
        let v = checks(&reference_model(), 10);
        assert!(v.iter().all(|c| !c.fails_run()), "{v:#?}");
    }
}
