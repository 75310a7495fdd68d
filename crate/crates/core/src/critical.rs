//! Bracketing and bisection of the critical coupling.
//!
//! The solvable couplings form an up-set: a solution at `lambda'` is a
//! lower solution at every `lambda > lambda'`, so solvability propagates
//! upward and bisection against the monotone solver is valid. The lower
//! end of the initial bracket is the necessary integral bound; the upper
//! end comes from the constant-lower-solution construction.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{grad_norm, integrate, FiniteGraph, VertexFunction, VortexSet};
use crate::linalg::LinearSolveOptions;
use crate::monotone::{compute_u0, iterate_scheme, MonotoneOptions, SolveStatus};
use crate::nonlinearity::{
    classify_sub_super, f_eval, lambda_lower_bound, lambda_lower_bound_classic, BackgroundField,
    Problem, SubSuperClass,
};
use crate::variational::functional_j;

/// One oracle invocation in a bisection run.
#[derive(Debug, Clone)]
pub struct OracleRecord {
    pub lambda: f64,
    pub status: SolveStatus,
    pub iterations: usize,
}

/// Result of a critical-coupling search.
#[derive(Debug, Clone)]
pub struct CriticalLambdaResult {
    /// Smallest coupling certified solvable (the high end of the bracket).
    pub lambda_c: f64,
    pub bracket: (f64, f64),
    /// Absolute bracket-width tolerance actually used.
    pub tolerance: f64,
    pub oracle_calls: usize,
    pub lower_bound_derived: f64,
    /// Bound computed with the classic minimum constant; differs from the
    /// derived bound for `b != 1` and is reported, not asserted.
    pub lower_bound_paper: f64,
    /// Oracle runs that ended inconclusive (treated as unsolvable).
    pub inconclusive_count: usize,
    pub transcript: Vec<OracleRecord>,
}

/// Default relative margin applied to the constructive upper bracket.
pub const UPPER_BRACKET_MARGIN: f64 = 0.1;
const UPPER_BRACKET_RETRIES: usize = 6;

/// Constant shift for the lower-solution construction: the `c > max(u0)`
/// maximizing `min_x [-f(u0(x) - c)]`, found on a grid. Returns the shift
/// and the maximized minimum.
pub fn best_constant_shift(bg: &BackgroundField, b: f64) -> (f64, f64) {
    let worst_case = |c: f64| {
        bg.u0
            .values()
            .iter()
            .map(|&u| -f_eval(b, u - c))
            .fold(f64::INFINITY, f64::min)
    };
    let spread = bg.u0.max() - bg.u0.min();
    let mut best_c = bg.u0.max() + 1.0;
    let mut best = worst_case(best_c);
    let steps = 400;
    for i in 0..=steps {
        let c = bg.u0.max() + 0.01 + (spread + 10.0) * i as f64 / steps as f64;
        let w = worst_case(c);
        if w > best {
            best = w;
            best_c = c;
        }
    }
    (best_c, best)
}

/// Constructive coupling at which a solution certainly exists.
///
/// For any `c > max(u0)` the constant `v = -c` keeps `u0 + v < 0`, and
/// `lambda(c) = (4*pi*N/|V|) / min_x [e^{u0-c} (1 - e^{b(u0-c)})]`
/// makes it a strict lower solution, so the monotone scheme converges at
/// any coupling above `lambda(c)`. The shift `c` is optimized over a grid
/// (when the background field has a wide spread, a fixed shift just above
/// `max(u0)` inflates the bracket by orders of magnitude), a 10% margin
/// is applied, and the result is verified by one oracle call, doubling
/// the margin on failure (bounded retries).
pub fn upper_bracket(
    g: &FiniteGraph,
    vortices: &VortexSet,
    b: f64,
    bg: &BackgroundField,
    opts: &MonotoneOptions,
) -> Result<f64> {
    upper_bracket_verified(g, vortices, b, bg, opts).map(|(lambda, _)| lambda)
}

fn upper_bracket_verified(
    g: &FiniteGraph,
    vortices: &VortexSet,
    b: f64,
    bg: &BackgroundField,
    opts: &MonotoneOptions,
) -> Result<(f64, usize)> {
    let source = vortices.source_constant(g);
    let (_, best) = best_constant_shift(bg, b);
    if !(best > 0.0) {
        return Err(Error::UpperBracketFailed {
            retries: 0,
            lambda: f64::NAN,
        });
    }
    let base = source / best;
    let mut margin = UPPER_BRACKET_MARGIN;
    for retry in 0..=UPPER_BRACKET_RETRIES {
        let lambda_hi = base * (1.0 + margin);
        let problem = Problem::new(
            std::sync::Arc::new(g.clone()),
            vortices.clone(),
            lambda_hi,
            b,
        )?;
        let report = iterate_scheme(&problem, bg, opts)?;
        if report.status == SolveStatus::Converged {
            return Ok((lambda_hi, report.iterations));
        }
        if retry == UPPER_BRACKET_RETRIES {
            return Err(Error::UpperBracketFailed {
                retries: retry,
                lambda: lambda_hi,
            });
        }
        margin *= 2.0;
    }
    unreachable!()
}

/// Bisection options; `tol_rel` is relative to the verified upper bracket.
#[derive(Debug, Clone)]
pub struct BisectOptions {
    pub tol_rel: f64,
    pub monotone: MonotoneOptions,
}

impl Default for BisectOptions {
    fn default() -> Self {
        Self {
            tol_rel: 1e-4,
            monotone: MonotoneOptions::default(),
        }
    }
}

/// Bisects the critical coupling between the necessary lower bound and the
/// constructive upper bracket.
///
/// The constructive bracket can sit orders of magnitude above the
/// critical coupling on graphs whose background field has a wide spread,
/// so it is first tightened by geometric halving (each step certified by
/// the oracle) before bisection starts; the width tolerance is relative
/// to the tightened bracket.
///
/// The oracle is the monotone scheme: converged moves the bracket down,
/// diverged moves it up; inconclusive runs are treated as unsolvable
/// (conservative) and counted so callers can flag the result. The
/// reported `lambda_c` is the certified-solvable high end.
pub fn bisect(
    g: &FiniteGraph,
    vortices: &VortexSet,
    b: f64,
    opts: &BisectOptions,
) -> Result<CriticalLambdaResult> {
    if !(opts.tol_rel > 0.0 && opts.tol_rel.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "tol_rel",
            value: opts.tol_rel,
        });
    }
    let bg = compute_u0(g, vortices, &opts.monotone.linear)?;
    let graph = std::sync::Arc::new(g.clone());
    let lower_derived = lambda_lower_bound(g, vortices.n(), b);
    let lower_paper = lambda_lower_bound_classic(g, vortices.n(), b);

    let mut transcript: Vec<OracleRecord> = Vec::new();
    let mut inconclusive = 0usize;

    let probe = |lambda: f64, transcript: &mut Vec<OracleRecord>| -> Result<SolveStatus> {
        let problem = Problem::new(std::sync::Arc::clone(&graph), vortices.clone(), lambda, b)?;
        let report = iterate_scheme(&problem, &bg, &opts.monotone)?;
        transcript.push(OracleRecord {
            lambda,
            status: report.status,
            iterations: report.iterations,
        });
        // Solvability propagates upward; a transcript that contradicts
        // that is a solver bug, not a property of the equation.
        for a in transcript.iter() {
            for bb in transcript.iter() {
                if a.status == SolveStatus::Converged
                    && bb.status == SolveStatus::Diverged
                    && bb.lambda > a.lambda
                {
                    return Err(Error::UpSetViolation {
                        solvable: a.lambda,
                        unsolvable: bb.lambda,
                    });
                }
            }
        }
        Ok(report.status)
    };

    // Endpoint states: the lower bound must be unsolvable ...
    let lo_status = probe(lower_derived, &mut transcript)?;
    if lo_status == SolveStatus::Converged {
        return Err(Error::BracketInvalid(lower_derived));
    }
    if lo_status == SolveStatus::Inconclusive {
        inconclusive += 1;
    }
    // ... and the constructive upper bracket is verified solvable inside.
    let (hi0, hi0_iterations) = upper_bracket_verified(g, vortices, b, &bg, &opts.monotone)?;
    transcript.push(OracleRecord {
        lambda: hi0,
        status: SolveStatus::Converged,
        iterations: hi0_iterations,
    });

    // Tighten the certified-solvable end geometrically.
    let mut lo = lower_derived;
    let mut hi = hi0;
    loop {
        let cand = 0.5 * hi;
        if cand <= lo {
            break;
        }
        match probe(cand, &mut transcript)? {
            SolveStatus::Converged => hi = cand,
            SolveStatus::Diverged => {
                lo = cand;
                break;
            }
            SolveStatus::Inconclusive => {
                inconclusive += 1;
                lo = cand;
                break;
            }
        }
    }

    let tolerance = opts.tol_rel * hi;
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        match probe(mid, &mut transcript)? {
            SolveStatus::Converged => hi = mid,
            SolveStatus::Diverged => lo = mid,
            SolveStatus::Inconclusive => {
                inconclusive += 1;
                lo = mid;
            }
        }
    }

    Ok(CriticalLambdaResult {
        lambda_c: hi,
        bracket: (lo, hi),
        tolerance,
        oracle_calls: transcript.len(),
        lower_bound_derived: lower_derived,
        lower_bound_paper: lower_paper,
        inconclusive_count: inconclusive,
        transcript,
    })
}

/// One row of a coupling sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub lambda: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub mean_v: f64,
    pub j: f64,
    /// `||grad(v - mean v)||_2 / lambda`, the scaling ratio of the a
    /// priori gradient bound.
    pub grad_norm_ratio: f64,
}

/// Sweep summary: rows plus the empirical maximum of the scaling ratio.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub max_grad_norm_ratio: f64,
}

/// Evaluates the oracle on a grid of couplings (in parallel) and reports
/// per-coupling diagnostics for phase-diagram plots.
pub fn lambda_sweep(
    g: &FiniteGraph,
    vortices: &VortexSet,
    b: f64,
    lambdas: &[f64],
    opts: &MonotoneOptions,
) -> Result<SweepResult> {
    let bg = compute_u0(g, vortices, &opts.linear)?;
    let graph = std::sync::Arc::new(g.clone());
    let rows: Result<Vec<SweepRow>> = lambdas
        .par_iter()
        .map(|&lambda| {
            let problem =
                Problem::new(std::sync::Arc::clone(&graph), vortices.clone(), lambda, b)?;
            let report = iterate_scheme(&problem, &bg, opts)?;
            let (j, ratio) = match (&report.status, &report.v) {
                (SolveStatus::Converged, Some(v)) => {
                    let j = functional_j(&problem, &bg, v)?;
                    let gn = grad_norm(g, v)?;
                    let sq = gn.map(|t| t * t);
                    let norm2 = integrate(g, &sq)?.sqrt();
                    (j, norm2 / lambda)
                }
                _ => (f64::NAN, f64::NAN),
            };
            Ok(SweepRow {
                lambda,
                status: report.status,
                iterations: report.iterations,
                mean_v: report.mean_v,
                j,
                grad_norm_ratio: ratio,
            })
        })
        .collect();
    let rows = rows?;
    let max_ratio = rows
        .iter()
        .filter(|r| r.grad_norm_ratio.is_finite())
        .fold(0.0f64, |m, r| m.max(r.grad_norm_ratio));
    Ok(SweepResult {
        rows,
        max_grad_norm_ratio: max_ratio,
    })
}

/// Convenience check used in tests and examples: the constant `v = -c`
/// with the optimized shift classifies as a lower solution at the
/// constructive bracket coupling.
pub fn constant_is_lower_solution_at(
    g: &FiniteGraph,
    vortices: &VortexSet,
    b: f64,
    bg: &BackgroundField,
    lambda: f64,
) -> Result<bool> {
    let (c, _) = best_constant_shift(bg, b);
    let problem = Problem::new(std::sync::Arc::new(g.clone()), vortices.clone(), lambda, b)?;
    let v = VertexFunction::constant(g, -c);
    Ok(classify_sub_super(&problem, bg, &v)? == SubSuperClass::Lower)
}

/// Computes `u0` with default linear options; small helper for callers
/// that only have the raw pieces.
pub fn background_for(g: &FiniteGraph, vortices: &VortexSet) -> Result<BackgroundField> {
    compute_u0(g, vortices, &LinearSolveOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn k2() -> FiniteGraph {
        FiniteGraph::new(
            vec![("x1".into(), 1.0), ("x2".into(), 1.0)],
            vec![("x1".into(), "x2".into(), 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn upper_bracket_is_above_lower_bound_and_solvable() {
        let g = k2();
        let vort = VortexSet::new(&g, &["x1".into()]).unwrap();
        let bg = background_for(&g, &vort).unwrap();
        let opts = MonotoneOptions::default();
        let hi = upper_bracket(&g, &vort, 1.0, &bg, &opts).unwrap();
        let lb = lambda_lower_bound(&g, 1, 1.0);
        assert!(hi > lb);
        assert!(constant_is_lower_solution_at(&g, &vort, 1.0, &bg, hi).unwrap());
    }

    #[test]
    fn bisect_k2_brackets_critical_coupling() {
        let g = k2();
        let vort = VortexSet::new(&g, &["x1".into()]).unwrap();
        let result = bisect(&g, &vort, 1.0, &BisectOptions::default()).unwrap();
        let lb = 8.0 * PI;
        assert!(result.lambda_c >= lb);
        assert!(result.bracket.0 <= result.lambda_c);
        assert!(result.bracket.1 - result.bracket.0 <= result.tolerance);
        assert_eq!(result.lambda_c, result.bracket.1);
        assert!(result.inconclusive_count == 0, "oracle should be decisive on K2");
        // Post-hoc verification at a comfortable distance from the edge.
        let bg = background_for(&g, &vort).unwrap();
        let above = Problem::new(
            std::sync::Arc::new(g.clone()),
            vort.clone(),
            result.lambda_c + 10.0 * result.tolerance,
            1.0,
        )
        .unwrap();
        let below = above
            .with_lambda(result.lambda_c - 10.0 * result.tolerance)
            .unwrap();
        let opts = MonotoneOptions::default();
        assert_eq!(
            iterate_scheme(&above, &bg, &opts).unwrap().status,
            SolveStatus::Converged
        );
        assert_eq!(
            iterate_scheme(&below, &bg, &opts).unwrap().status,
            SolveStatus::Diverged
        );
    }

    #[test]
    fn bisect_is_stable_under_tolerance_halving() {
        let g = k2();
        let vort = VortexSet::new(&g, &["x1".into()]).unwrap();
        let coarse = bisect(&g, &vort, 1.0, &BisectOptions::default()).unwrap();
        let fine = bisect(
            &g,
            &vort,
            1.0,
            &BisectOptions {
                tol_rel: 0.5e-4,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((coarse.lambda_c - fine.lambda_c).abs() < coarse.tolerance);
    }

    #[test]
    fn sweep_reports_rows_in_order() {
        let g = k2();
        let vort = VortexSet::new(&g, &["x1".into()]).unwrap();
        let lambdas: Vec<f64> = vec![4.0 * PI, 16.0 * PI, 32.0 * PI];
        let sweep = lambda_sweep(&g, &vort, 1.0, &lambdas, &MonotoneOptions::default()).unwrap();
        assert_eq!(sweep.rows.len(), 3);
        assert_eq!(sweep.rows[0].status, SolveStatus::Diverged);
        assert_eq!(sweep.rows[1].status, SolveStatus::Converged);
        assert_eq!(sweep.rows[2].status, SolveStatus::Converged);
        assert!(sweep.rows[1].j.is_finite());
        assert!(sweep.max_grad_norm_ratio > 0.0);
    }
}
