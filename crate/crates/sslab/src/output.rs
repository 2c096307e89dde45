//! CSV and JSON writers.

use std::fmt::Write;

use serde::Serialize;
use sslab_core::dressing_solver::EvaluationGrid;
use sslab_core::numerics::C64;

use crate::experiments::{Check, Outcome};
use crate::{Experiment, RunConfig, VERSION};

/// Field values on a grid, stored t-major like the grid itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub grid: EvaluationGrid,
    pub values: Vec<C64>,
}

/// `x,t,re_q,im_q` with t outer and x inner, 17 significant digits.
pub fn csv(series: &Series) -> String {
    let g = &series.grid;
    let mut out = String::with_capacity(80 * (g.len() + 1));
    out.push_str("x,t,re_q,im_q\n");
    for (k, q) in series.values.iter().enumerate() {
        let x = g.x[k % g.x.len()];
        let t = g.t[k / g.x.len()];
        writeln!(out, "{x:.16e},{t:.16e},{:.16e},{:.16e}", q.re, q.im).unwrap();
    }
    out
}

#[derive(Serialize)]
struct Report<'a> {
    version: &'static str,
    experiment: Experiment,
    pass: bool,
    config: &'a RunConfig,
    checks: &'a [Check],
    details: &'a serde_json::Value,
}

pub fn json_report(experiment: Experiment, outcome: &Outcome) -> String {
    let report = Report {
        version: VERSION,
        experiment,
        pass: outcome.passed(),
        config: &outcome.config,
        checks: &outcome.checks,
        details: &outcome.details,
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
    s.push('\n');
    s
}
