//! Structured run reports and their plain-text rendering.

use std::fmt::Write as _;

use serde::Serialize;

use super::schema::ModelFile;
use crate::environment::ChainStatics;
use crate::moments::{MomentTable, NMoments, OrderDiagnostics, Weighting};
use crate::sim::SimulationEstimate;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckVerdict {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Informational checks are reported but never fail a run.
    pub required: bool,
}

impl CheckVerdict {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            residual,
            tolerance,
            passed: residual <= tolerance,
            required: true,
        }
    }

    pub fn informational(mut self) -> Self {
        self.required = false;
        self
    }

    pub fn fails_run(&self) -> bool {
        self.required && !self.passed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub pi: Vec<f64>,
    pub occupancy: Vec<f64>,
    pub balance_condition: f64,
}

impl From<&ChainStatics> for ChainReport {
    fn from(st: &ChainStatics) -> Self {
        Self {
            pi: st.pi.iter().copied().collect(),
            occupancy: st.occupancy.iter().copied().collect(),
            balance_condition: st.condition,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticReport {
    pub order: usize,
    /// `palm[n][k]`
    pub palm: Vec<Vec<f64>>,
    /// `stationary[n][k]`
    pub stationary: Vec<Vec<f64>>,
    pub moments: Vec<NMoments>,
    pub diagnostics: Vec<OrderDiagnostics>,
}

impl AnalyticReport {
    pub fn new(table: &MomentTable, weightings: &[Weighting]) -> Self {
        let rows = |vs: &[nalgebra::DVector<f64>]| {
            vs.iter().map(|v| v.iter().copied().collect()).collect()
        };
        Self {
            order: table.order,
            palm: rows(&table.palm),
            stationary: rows(&table.stationary),
            moments: weightings
                .iter()
                .map(|w| table.weighted(*w).clone())
                .collect(),
            diagnostics: table.diagnostics.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub order: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub analytic: Vec<f64>,
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub weightings: Vec<Weighting>,
    pub z_max: f64,
    pub rows: Vec<ComparisonRow>,
    /// Weightings whose every z-score stays within `z_max`.
    pub consistent: Vec<Weighting>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub model: ModelFile,
    pub chain: ChainReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic: Option<AnalyticReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Comparison>,
    pub checks: Vec<CheckVerdict>,
    pub passed: bool,
}

impl RunReport {
    pub fn new(command: &str, model: ModelFile, statics: &ChainStatics) -> Self {
        Self {
            command: command.to_string(),
            model,
            chain: statics.into(),
            analytic: None,
            simulation: None,
            comparison: None,
            checks: Vec::new(),
            passed: true,
        }
    }

    pub fn finish(mut self) -> Self {
        self.passed = !self.checks.iter().any(CheckVerdict::fails_run);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        render_chain(&mut out, &self.chain);
        if let Some(a) = &self.analytic {
            render_analytic(&mut out, a);
        }
        if let Some(s) = &self.simulation {
            render_simulation(&mut out, s, &self.chain);
        }
        if let Some(c) = &self.comparison {
            render_comparison(&mut out, c);
        }
        if !self.checks.is_empty() {
            render_checks(&mut out, &self.checks);
        }
        out
    }
}

fn num(x: f64) -> String {
    format!("{x:.10e}")
}

fn render_chain(out: &mut String, chain: &ChainReport) {
    let _ = writeln!(
        out,
        "{:>5} {:>18} {:>18}",
        "state", "pi (embedded)", "occupancy"
    );
    for (k, (p, o)) in chain.pi.iter().zip(&chain.occupancy).enumerate() {
        let _ = writeln!(out, "{:>5} {:>18} {:>18}", k, num(*p), num(*o));
    }
    out.push('\n');
}

fn render_analytic(out: &mut String, a: &AnalyticReport) {
    let _ = write!(out, "{:>3}", "n");
    for m in &a.moments {
        let w = m.weighting.name();
        let _ = write!(
            out,
            " {:>22} {:>22}",
            format!("factorial[{w}]"),
            format!("raw[{w}]")
        );
    }
    out.push('\n');
    for n in 0..=a.order {
        let _ = write!(out, "{n:>3}");
        for m in &a.moments {
            let _ = write!(out, " {:>22} {:>22}", num(m.factorial[n]), num(m.raw[n]));
        }
        out.push('\n');
    }
    let worst = a
        .diagnostics
        .iter()
        .map(|d| d.solve_residual)
        .fold(0.0, f64::max);
    let cond = a
        .diagnostics
        .iter()
        .map(|d| d.condition)
        .fold(0.0, f64::max);
    let _ = writeln!(
        out,
        "max solve residual {worst:.3e}, max condition estimate {cond:.3e}\n"
    );
}

fn render_simulation(out: &mut String, s: &SimulationEstimate, chain: &ChainReport) {
    let c = &s.config;
    let _ = writeln!(
        out,
        "simulation: {} replications x {} samples, warmup {}, horizon {}, seed {}",
        c.replications,
        s.samples_per_replication,
        num(c.warmup),
        num(c.horizon),
        c.seed
    );
    let _ = writeln!(
        out,
        "{:>3} {:>22} {:>18}",
        "n", "factorial estimate", "std error"
    );
    for o in &s.orders {
        let _ = writeln!(
            out,
            "{:>3} {:>22} {:>18}",
            o.order,
            num(o.estimate),
            num(o.std_error)
        );
    }
    let _ = writeln!(
        out,
        "{:>5} {:>18} {:>18} {:>18}",
        "state", "time fraction", "std error", "occupancy"
    );
    for k in 0..s.occupancy.len() {
        let _ = writeln!(
            out,
            "{:>5} {:>18} {:>18} {:>18}",
            k,
            num(s.occupancy[k]),
            num(s.occupancy_std_error[k]),
            num(chain.occupancy[k])
        );
    }
    let _ = writeln!(out, "half-split z for the mean: {:.3}\n", s.half_split.z);
}

fn render_comparison(out: &mut String, c: &Comparison) {
    let _ = write!(out, "{:>3} {:>18} {:>14}", "n", "simulated", "std error");
    for w in &c.weightings {
        let _ = write!(out, " {:>22} {:>8}", format!("analytic[{}]", w.name()), "z");
    }
    out.push('\n');
    for r in &c.rows {
        let _ = write!(
            out,
            "{:>3} {:>18} {:>14}",
            r.order,
            num(r.estimate),
            format!("{:.4e}", r.std_error)
        );
        for (a, z) in r.analytic.iter().zip(&r.z) {
            let _ = write!(out, " {:>22} {:>8.3}", num(*a), z);
        }
        out.push('\n');
    }
    let names: Vec<&str> = c.consistent.iter().map(Weighting::name).collect();
    let _ = writeln!(
        out,
        "consistent within {} SE: {}\n",
        c.z_max,
        if names.is_empty() {
            "none".to_string()
        } else {
            names.join(", ")
        }
    );
}

fn render_checks(out: &mut String, checks: &[CheckVerdict]) {
    let width = checks
        .iter()
        .map(|c| c.name.len())
        .max()
        .unwrap_or(5)
        .max(5);
    let _ = writeln!(
        out,
        "{:<width$} {:>12} {:>12}  verdict",
        "check", "residual", "tolerance"
    );
    for c in checks {
        let verdict = match (c.passed, c.required) {
            (true, _) => "pass",
            (false, true) => "FAIL",
            (false, false) => "info",
        };
        let _ = writeln!(
            out,
            "{:<width$} {:>12} {:>12}  {verdict}",
            c.name,
            format!("{:.3e}", c.residual),
            format!("{:.1e}", c.tolerance)
        );
    }
}
