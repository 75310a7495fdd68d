//! JSON views of the solver reports.
//!
//! Vertex functions serialize as id -> value maps in canonical order
//! (BTreeMap keys are sorted); struct fields keep declaration order, so
//! identical inputs produce byte-identical output.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::critical::{CriticalLambdaResult, SweepResult};
use crate::graph::FiniteGraph;
use crate::monotone::SolveReport;
use crate::variational::MultiplicityResult;

#[derive(Debug, Serialize)]
pub struct SolveReportJson {
    pub status: &'static str,
    pub iterations: usize,
    pub final_residual_sup: f64,
    pub monotone_violations: usize,
    pub max_monotone_violation: f64,
    pub min_u0_plus_v: f64,
    pub max_u0_plus_v: f64,
    pub mean_v: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<BTreeMap<String, f64>>,
}

pub fn solve_report_json(g: &FiniteGraph, report: &SolveReport) -> SolveReportJson {
    SolveReportJson {
        status: report.status.as_str(),
        iterations: report.iterations,
        final_residual_sup: report.final_residual_sup,
        monotone_violations: report.monotone_violations,
        max_monotone_violation: report.max_monotone_violation,
        min_u0_plus_v: report.min_u0_plus_v,
        max_u0_plus_v: report.max_u0_plus_v,
        mean_v: report.mean_v,
        solution: report.v.as_ref().map(|v| v.to_id_map(g)),
    }
}

#[derive(Debug, Serialize)]
pub struct OracleRecordJson {
    pub lambda: f64,
    pub status: &'static str,
    pub iterations: usize,
}

#[derive(Debug, Serialize)]
pub struct CriticalLambdaJson {
    pub lambda_c: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub tolerance: f64,
    pub oracle_calls: usize,
    pub inconclusive_count: usize,
    pub lower_bound_derived: f64,
    pub lower_bound_paper: f64,
    pub transcript: Vec<OracleRecordJson>,
}

pub fn critical_lambda_json(result: &CriticalLambdaResult) -> CriticalLambdaJson {
    CriticalLambdaJson {
        lambda_c: result.lambda_c,
        bracket_lo: result.bracket.0,
        bracket_hi: result.bracket.1,
        tolerance: result.tolerance,
        oracle_calls: result.oracle_calls,
        inconclusive_count: result.inconclusive_count,
        lower_bound_derived: result.lower_bound_derived,
        lower_bound_paper: result.lower_bound_paper,
        transcript: result
            .transcript
            .iter()
            .map(|r| OracleRecordJson {
                lambda: r.lambda,
                status: r.status.as_str(),
                iterations: r.iterations,
            })
            .collect(),
    }
}

#[derive(Debug, Serialize)]
pub struct MultiplicityJson {
    pub route: &'static str,
    pub j_min: f64,
    pub j_second: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    pub separation_sup: f64,
    pub minimizer_residual_sup: f64,
    pub second_residual_sup: f64,
    pub minimizer: BTreeMap<String, f64>,
    pub second: BTreeMap<String, f64>,
}

pub fn multiplicity_json(g: &FiniteGraph, result: &MultiplicityResult) -> MultiplicityJson {
    MultiplicityJson {
        route: result.route.as_str(),
        j_min: result.j_min,
        j_second: result.j_second,
        c0: result.c0,
        separation_sup: result.separation_sup,
        minimizer_residual_sup: result.minimizer_residual_sup,
        second_residual_sup: result.second_residual_sup,
        minimizer: result.minimizer.to_id_map(g),
        second: result.second.to_id_map(g),
    }
}

/// TSV rows for a coupling sweep, ending with a comment line carrying the
/// empirical maximum of the gradient scaling ratio.
pub fn sweep_tsv(sweep: &SweepResult) -> String {
    let mut out = String::from("lambda\tstatus\titerations\tmean_v\tJ\tgrad_norm_ratio\n");
    for row in &sweep.rows {
        let fmt = |v: f64| {
            if v.is_finite() {
                format!("{v}")
            } else {
                "nan".to_string()
            }
        };
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            row.lambda,
            row.status.as_str(),
            row.iterations,
            fmt(row.mean_v),
            fmt(row.j),
            fmt(row.grad_norm_ratio),
        ));
    }
    out.push_str(&format!(
        "# max_grad_norm_ratio\t{}\n",
        sweep.max_grad_norm_ratio
    ));
    out
}

#[derive(Debug, Serialize)]
pub struct SweepRowJson {
    pub lambda: f64,
    pub status: &'static str,
    pub iterations: usize,
    pub mean_v: Option<f64>,
    pub j: Option<f64>,
    pub grad_norm_ratio: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct SweepJson {
    pub rows: Vec<SweepRowJson>,
    pub max_grad_norm_ratio: f64,
}

pub fn sweep_json(sweep: &SweepResult) -> SweepJson {
    let opt = |v: f64| if v.is_finite() { Some(v) } else { None };
    SweepJson {
        rows: sweep
            .rows
            .iter()
            .map(|r| SweepRowJson {
                lambda: r.lambda,
                status: r.status.as_str(),
                iterations: r.iterations,
                mean_v: opt(r.mean_v),
                j: opt(r.j),
                grad_norm_ratio: opt(r.grad_norm_ratio),
            })
            .collect(),
        max_grad_norm_ratio: sweep.max_grad_norm_ratio,
    }
}
