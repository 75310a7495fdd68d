//! Variational route to the second solution.
//!
//! The functional
//!
//! ```text
//! J(v) = 1/2 integral(|grad v|^2)
//!      + lambda/(b+1) * integral(e^{(b+1)(u0+v)})
//!      - lambda * integral(e^{u0+v})
//!      + (4*pi*N/|V|) * integral(v)
//! ```
//!
//! has the reduced vortex equation as its Euler-Lagrange equation: the
//! mu-weighted gradient of `J` is exactly the negated equation residual,
//! so critical points and solutions coincide.
//!
//! Above the critical coupling, `J` restricted to the obstacle set
//! `{v >= v_star}` (with `v_star` the solution at the critical coupling)
//! attains an interior local minimum, found here by projected gradient
//! descent. When the minimizer coincides with the maximal solution, a
//! discretized min-max over paths from the minimizer to a far downhill
//! point locates a mountain-pass critical point, giving the second
//! solution either way.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{gradient_form, inner_product, integrate, VertexFunction};
use crate::linalg::combinatorial_laplacian;
use crate::monotone::{
    iterate_scheme, solve_at_critical, MonotoneOptions, SolveReport, SolveStatus,
    CRITICAL_RESIDUAL_TOL,
};
use crate::nonlinearity::{f_prime, residual, BackgroundField, Problem};

/// Armijo sufficient-decrease constant for all backtracking searches here.
const ARMIJO: f64 = 1e-4;
/// Smallest step the backtracking searches will try.
const MIN_STEP: f64 = 1e-18;

/// Rounding floor of a functional comparison: decreases smaller than this
/// cannot be resolved in f64, so the sufficient-decrease test must not
/// demand them (near a critical point the Armijo decrease `s*||g||^2`
/// drops below the noise of `J` long before the gradient tolerance is
/// reached).
fn j_noise(j: f64) -> f64 {
    1e-14 * (1.0 + j.abs())
}
/// Sup-norm separation below which two solutions are declared identical.
pub const DISTINCT_TOL: f64 = 1e-6;

/// Options for the constrained minimization and the mountain-pass search.
#[derive(Debug, Clone)]
pub struct MountainPassOptions {
    /// Number of states along the discretized path (>= 3).
    pub path_points: usize,
    /// Gradient sup-norm at which a point counts as critical.
    pub descent_tolerance: f64,
    /// Cap on descent/deformation steps.
    pub max_deformations: usize,
    /// Growth factor while searching for the far endpoint offset.
    pub tau_growth: f64,
}

impl Default for MountainPassOptions {
    fn default() -> Self {
        Self {
            path_points: 64,
            descent_tolerance: 1e-8,
            max_deformations: 50_000,
            tau_growth: 2.0,
        }
    }
}

impl MountainPassOptions {
    fn validate(&self) -> Result<()> {
        if self.path_points < 3 {
            return Err(Error::InvalidParameter {
                name: "path_points",
                value: self.path_points as f64,
            });
        }
        if !(self.tau_growth > 1.0) {
            return Err(Error::InvalidParameter {
                name: "tau_growth",
                value: self.tau_growth,
            });
        }
        if !(self.descent_tolerance > 0.0) {
            return Err(Error::InvalidParameter {
                name: "descent_tolerance",
                value: self.descent_tolerance,
            });
        }
        Ok(())
    }
}

/// Obstacle for the constrained minimization: the solution at the
/// critical coupling.
#[derive(Debug, Clone)]
pub struct ObstacleSet {
    pub v_star: VertexFunction,
}

impl ObstacleSet {
    /// Wraps a candidate after verifying it solves the equation at the
    /// supplied (critical) coupling.
    pub fn verified(
        problem_at_critical: &Problem,
        bg: &BackgroundField,
        v_star: VertexFunction,
    ) -> Result<Self> {
        let r = residual(problem_at_critical, bg, &v_star)?.sup_norm();
        if r > CRITICAL_RESIDUAL_TOL {
            return Err(Error::MinimizationFailed(format!(
                "obstacle candidate has residual {r:.3e} at lambda = {}",
                problem_at_critical.lambda
            )));
        }
        Ok(Self { v_star })
    }

    pub fn new_unchecked(v_star: VertexFunction) -> Self {
        Self { v_star }
    }
}

/// Evaluates the functional `J`.
///
/// Errors instead of silently saturating when `u0 + v` is large enough to
/// overflow the exponentials.
pub fn functional_j(problem: &Problem, bg: &BackgroundField, v: &VertexFunction) -> Result<f64> {
    let g = problem.graph.as_ref();
    let u = bg.u0.add(v);
    let b = problem.b;
    for x in 0..g.vertex_count() {
        if (b + 1.0) * u.get(x) >= 709.0 {
            return Err(Error::FunctionalOverflow {
                id: g.id(x).to_string(),
                max: u.get(x),
            });
        }
    }
    let gamma = gradient_form(g, v, v)?;
    let dirichlet = 0.5 * integrate(g, &gamma)?;
    let exp_high = integrate(g, &u.map(|t| ((b + 1.0) * t).exp()))?;
    let exp_low = integrate(g, &u.map(f64::exp))?;
    let linear = problem.source_constant() * integrate(g, v)?;
    Ok(dirichlet + problem.lambda / (b + 1.0) * exp_high - problem.lambda * exp_low + linear)
}

/// mu-weighted gradient of `J`:
/// `g = -Laplacian(v) + lambda * f(u0+v) + 4*pi*N/|V|`.
///
/// This is the negated equation residual, sharing its code path so the
/// identity is exact, not merely within rounding.
pub fn grad_j(
    problem: &Problem,
    bg: &BackgroundField,
    v: &VertexFunction,
) -> Result<VertexFunction> {
    Ok(residual(problem, bg, v)?.scale(-1.0))
}

fn project_above(v: &VertexFunction, floor: &VertexFunction) -> VertexFunction {
    v.zip_map(floor, f64::max)
}

/// Gradient sup-norm below which descent hands over to Newton.
const NEWTON_SWITCH: f64 = 1e-2;

/// Damped Newton iteration on `grad J = 0`.
///
/// Energy-based descent bottoms out once the Armijo decrease falls under
/// the rounding noise of `J`; Newton needs no functional comparisons and
/// converges quadratically near any nondegenerate critical point (minima
/// and saddles alike). Steps are halved while they fail to shrink the
/// gradient; the polish stops early if no damping helps.
fn newton_polish(
    problem: &Problem,
    bg: &BackgroundField,
    start: VertexFunction,
    target: f64,
    max_iterations: usize,
) -> Result<VertexFunction> {
    let g = problem.graph.as_ref();
    let n = g.vertex_count();
    let mut v = start;
    let mut grad = grad_j(problem, bg, &v)?;
    for _ in 0..max_iterations {
        let g_sup = grad.sup_norm();
        if g_sup < target {
            break;
        }
        // mu-weighted Hessian action: H d = -Laplacian(d) + lambda f'(u) d,
        // i.e. (L + M diag(lambda f'(u))) d = M grad.
        let a = hessian_matrix(problem, bg, &v);
        let mut rhs = DVector::zeros(n);
        for x in 0..n {
            rhs[x] = g.mu(x) * grad.get(x);
        }
        let lu = a.lu();
        let Some(delta) = lu.solve(&rhs) else { break };
        if !delta.iter().all(|d| d.is_finite()) {
            break;
        }
        let mut accepted = false;
        let mut t = 1.0f64;
        for _ in 0..12 {
            let trial = VertexFunction::from_raw(
                (0..n).map(|x| v.get(x) - t * delta[x]).collect(),
            );
            let trial_grad = grad_j(problem, bg, &trial)?;
            if trial_grad.sup_norm() < g_sup {
                v = trial;
                grad = trial_grad;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(v)
}

fn hessian_matrix(problem: &Problem, bg: &BackgroundField, v: &VertexFunction) -> DMatrix<f64> {
    let g = problem.graph.as_ref();
    let u = bg.u0.add(v);
    let mut a = combinatorial_laplacian(g);
    for x in 0..g.vertex_count() {
        a[(x, x)] += g.mu(x) * problem.lambda * f_prime(problem.b, u.get(x));
    }
    a
}

/// Minimizes `J` over the obstacle set `{v >= v_star}` by projected
/// gradient descent started on the obstacle.
///
/// Converges when the unconstrained gradient sup-norm drops below
/// `descent_tolerance` with an empty active set; an active obstacle at
/// stationarity is reported as an error (it signals the coupling does not
/// exceed the critical one).
pub fn minimize_over_sigma(
    problem: &Problem,
    bg: &BackgroundField,
    obstacle: &ObstacleSet,
    opts: &MountainPassOptions,
) -> Result<SolveReport> {
    opts.validate()?;
    let g = problem.graph.as_ref();
    let floor = &obstacle.v_star;
    if floor.len() != g.vertex_count() {
        return Err(Error::DimensionMismatch {
            expected: g.vertex_count(),
            got: floor.len(),
        });
    }

    let mut v = floor.clone();
    let mut j_v = functional_j(problem, bg, &v)?;
    let mut step = 1.0f64;

    for iter in 1..=opts.max_deformations {
        let mut grad = grad_j(problem, bg, &v)?;
        let mut g_sup = grad.sup_norm();
        if g_sup < NEWTON_SWITCH && g_sup >= opts.descent_tolerance {
            // Descent has localized the minimum; Newton finishes it off
            // (the Armijo test cannot resolve decreases below the
            // rounding noise of J near a critical point).
            v = newton_polish(problem, bg, v, opts.descent_tolerance, 100)?;
            j_v = functional_j(problem, bg, &v)?;
            grad = grad_j(problem, bg, &v)?;
            g_sup = grad.sup_norm();
        }
        if g_sup < opts.descent_tolerance {
            let active = v
                .values()
                .iter()
                .zip(floor.values())
                .filter(|(a, b)| a <= b)
                .count();
            if active > 0 {
                return Err(Error::ObstacleActive { active });
            }
            let u = bg.u0.add(&v);
            let mean_v = integrate(g, &v)? / g.total_measure();
            return Ok(SolveReport {
                status: SolveStatus::Converged,
                final_residual_sup: g_sup,
                min_u0_plus_v: u.min(),
                max_u0_plus_v: u.max(),
                v: Some(v),
                iterations: iter,
                monotone_violations: 0,
                max_monotone_violation: 0.0,
                mean_v,
                divergence_floor_used: f64::NEG_INFINITY,
            });
        }

        // Projected backtracking step with Armijo decrease measured
        // against the actual (projected) displacement.
        loop {
            let trial = project_above(&v.zip_map(&grad, |vi, gi| vi - step * gi), floor);
            let displacement = v.sub(&trial);
            let m = inner_product(g, &grad, &displacement)?;
            if m > 0.0 {
                let j_trial = functional_j(problem, bg, &trial)?;
                if j_trial <= j_v - ARMIJO * m + j_noise(j_v) {
                    v = trial;
                    j_v = j_trial;
                    step = (step * 2.0).min(1e3);
                    break;
                }
            }
            step *= 0.5;
            if step < MIN_STEP {
                return Err(Error::LineSearchFailed(step));
            }
        }
    }
    Err(Error::MinimizationFailed(format!(
        "gradient still above tolerance after {} steps",
        opts.max_deformations
    )))
}

/// Unconstrained descent of a single state; used to relax the path's
/// maximal point.
fn descend_point(
    problem: &Problem,
    bg: &BackgroundField,
    point: &VertexFunction,
    j_point: f64,
    grad: &VertexFunction,
    step: &mut f64,
) -> Result<(VertexFunction, f64)> {
    let g = problem.graph.as_ref();
    let g_norm_sq = inner_product(g, grad, grad)?;
    loop {
        let trial = point.zip_map(grad, |vi, gi| vi - *step * gi);
        let j_trial = functional_j(problem, bg, &trial)?;
        if j_trial <= j_point - ARMIJO * *step * g_norm_sq + j_noise(j_point) {
            let accepted = *step;
            *step = (accepted * 2.0).min(1e3);
            return Ok((trial, j_trial));
        }
        *step *= 0.5;
        if *step < MIN_STEP {
            return Err(Error::LineSearchFailed(*step));
        }
    }
}

/// Mountain-pass search between a verified local minimizer and a far
/// downhill point.
///
/// The far endpoint is `minimizer - tau0` with `tau0` grown geometrically
/// until `J` drops by more than one below the minimizer level. The path
/// is discretized with `path_points` states; each sweep relaxes the state
/// of maximal `J` one backtracking gradient step and then re-distributes
/// the points to uniform arclength. Without the re-distribution the
/// polyline tears across the ridge -- every point slides into one of the
/// two basins and the discrete maximum collapses onto the minimizer
/// instead of the saddle. Once the maximum is cornered (small gradient),
/// Newton finishes the critical point. Returns the saddle and its level.
pub fn mountain_pass(
    problem: &Problem,
    bg: &BackgroundField,
    minimizer: &VertexFunction,
    opts: &MountainPassOptions,
) -> Result<(VertexFunction, f64)> {
    opts.validate()?;
    let g = problem.graph.as_ref();
    let j_min = functional_j(problem, bg, minimizer)?;

    let mut tau = 1.0f64;
    loop {
        let j_far = functional_j(problem, bg, &minimizer.shift(-tau))?;
        if j_far < j_min - 1.0 {
            break;
        }
        tau *= opts.tau_growth;
        if tau > 1e12 {
            return Err(Error::MinimizationFailed(
                "no downhill endpoint found while growing tau".into(),
            ));
        }
    }

    let m = opts.path_points;
    let mut path: Vec<VertexFunction> = (0..m)
        .map(|i| minimizer.shift(-tau * i as f64 / (m - 1) as f64))
        .collect();
    let mut j_vals: Vec<f64> = Vec::with_capacity(m);
    for p in &path {
        j_vals.push(functional_j(problem, bg, p)?);
    }

    let mut step = 1.0f64;
    for _sweep in 0..opts.max_deformations {
        let k = j_vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        if k == m - 1 {
            return Err(Error::DegeneratePath);
        }
        if k == 0 {
            // All interior values sit below J(minimizer). A point below
            // the minimizer level cannot belong to the minimizer's basin,
            // so the ridge crossing hides inside the first segment: zoom
            // the whole path into it and keep relaxing.
            let gap = path[1].sub(&path[0]).sup_norm();
            if gap < 1e-12 {
                return Err(Error::DegeneratePath);
            }
            let a = path[0].clone();
            let far = path[1].clone();
            for (i, p) in path.iter_mut().enumerate() {
                let t = i as f64 / (m - 1) as f64;
                *p = a.zip_map(&far, |x, y| x + t * (y - x));
            }
            for (i, p) in path.iter().enumerate() {
                j_vals[i] = functional_j(problem, bg, p)?;
            }
            continue;
        }
        let grad = grad_j(problem, bg, &path[k])?;
        let g_sup = grad.sup_norm();
        let distinct_from_ends = |p: &VertexFunction| {
            p.sub(&path[0]).sup_norm() > DISTINCT_TOL
                && p.sub(&path[m - 1]).sup_norm() > DISTINCT_TOL
        };
        if g_sup < opts.descent_tolerance && distinct_from_ends(&path[k]) {
            return Ok((path[k].clone(), j_vals[k]));
        }
        if g_sup < NEWTON_SWITCH {
            // The relaxation has cornered the saddle; Newton homes in on
            // the nearby critical point. A polish that falls back onto an
            // endpoint basin is discarded.
            let polished =
                newton_polish(problem, bg, path[k].clone(), opts.descent_tolerance, 100)?;
            if grad_j(problem, bg, &polished)?.sup_norm() < opts.descent_tolerance
                && distinct_from_ends(&polished)
            {
                let c0 = functional_j(problem, bg, &polished)?;
                return Ok((polished, c0));
            }
        }
        let (moved, j_moved) = descend_point(problem, bg, &path[k], j_vals[k], &grad, &mut step)?;
        path[k] = moved;
        j_vals[k] = j_moved;

        // Re-distribute to uniform arclength so the polyline stays a
        // connected crossing of the ridge.
        let mut lengths = Vec::with_capacity(m - 1);
        for i in 0..m - 1 {
            let d = path[i + 1].sub(&path[i]);
            lengths.push(inner_product(g, &d, &d)?.sqrt());
        }
        let total: f64 = lengths.iter().sum();
        if total > 0.0 {
            let mut cumulative = vec![0.0; m];
            for i in 0..m - 1 {
                cumulative[i + 1] = cumulative[i] + lengths[i];
            }
            let mut new_path = Vec::with_capacity(m);
            new_path.push(path[0].clone());
            let mut seg = 0usize;
            for i in 1..m - 1 {
                let target = total * i as f64 / (m - 1) as f64;
                while seg + 2 < m && cumulative[seg + 1] < target {
                    seg += 1;
                }
                let span = (cumulative[seg + 1] - cumulative[seg]).max(f64::MIN_POSITIVE);
                let t = ((target - cumulative[seg]) / span).clamp(0.0, 1.0);
                new_path.push(path[seg].zip_map(&path[seg + 1], |a, b| a + t * (b - a)));
            }
            new_path.push(path[m - 1].clone());
            path = new_path;
            for (i, p) in path.iter().enumerate() {
                j_vals[i] = functional_j(problem, bg, p)?;
            }
        }
    }
    Err(Error::DeformationCapReached(opts.max_deformations))
}

/// Which construction produced the second solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoSolutionRoute {
    /// Maximal solution and constrained minimizer already differ.
    DistinctMaximal,
    /// They coincide; the mountain pass supplied the second solution.
    MountainPass,
}

impl TwoSolutionRoute {
    pub fn as_str(&self) -> &'static str {
        match self {
            TwoSolutionRoute::DistinctMaximal => "distinct_maximal",
            TwoSolutionRoute::MountainPass => "mountain_pass",
        }
    }
}

/// Two verified solutions above the critical coupling.
#[derive(Debug, Clone)]
pub struct MultiplicityResult {
    pub minimizer: VertexFunction,
    pub second: VertexFunction,
    pub j_min: f64,
    pub j_second: f64,
    /// Mountain-pass level; present only on that route.
    pub c0: Option<f64>,
    pub route: TwoSolutionRoute,
    pub separation_sup: f64,
    pub minimizer_residual_sup: f64,
    pub second_residual_sup: f64,
}

/// Orchestrates the two-solution construction at `lambda > lambda_c`.
///
/// Computes the maximal solution and the constrained minimizer over the
/// obstacle set built from the critical-coupling solution; if they are
/// separated the pair is returned directly, otherwise the mountain pass
/// runs from the shared minimum. Both outputs are verified against the
/// equation before returning.
pub fn find_two_solutions(
    problem: &Problem,
    bg: &BackgroundField,
    lambda_c: f64,
    monotone_opts: &MonotoneOptions,
    mp_opts: &MountainPassOptions,
) -> Result<MultiplicityResult> {
    if !(problem.lambda > lambda_c) {
        return Err(Error::InvalidParameter {
            name: "lambda (must exceed lambda_c)",
            value: problem.lambda,
        });
    }

    // Obstacle: limit of maximal solutions from above at the critical
    // coupling estimate.
    let critical_problem = problem.with_lambda(lambda_c)?;
    let crit = solve_at_critical(&critical_problem, bg, monotone_opts)?;
    let v_star = crit
        .report
        .solution(lambda_c)?
        .clone();
    let obstacle = ObstacleSet::verified(&critical_problem, bg, v_star)?;

    // Maximal solution at the working coupling.
    let maximal_report = iterate_scheme(problem, bg, monotone_opts)?;
    let v_max = maximal_report.solution(problem.lambda)?.clone();

    // Constrained minimizer.
    let min_report = minimize_over_sigma(problem, bg, &obstacle, mp_opts)?;
    let w = min_report.solution(problem.lambda)?.clone();
    let j_w = functional_j(problem, bg, &w)?;

    let separation = v_max.sub(&w).sup_norm();
    let (second, j_second, c0, route) = if separation > DISTINCT_TOL {
        let j2 = functional_j(problem, bg, &v_max)?;
        (v_max, j2, None, TwoSolutionRoute::DistinctMaximal)
    } else {
        let (saddle, c0) = mountain_pass(problem, bg, &w, mp_opts)?;
        (saddle, c0, Some(c0), TwoSolutionRoute::MountainPass)
    };

    let r_min = residual(problem, bg, &w)?.sup_norm();
    let r_second = residual(problem, bg, &second)?.sup_norm();
    if r_min > CRITICAL_RESIDUAL_TOL || r_second > CRITICAL_RESIDUAL_TOL {
        return Err(Error::MinimizationFailed(format!(
            "returned candidates fail verification: residuals {r_min:.3e}, {r_second:.3e}"
        )));
    }
    let separation_sup = second.sub(&w).sup_norm();

    Ok(MultiplicityResult {
        minimizer: w,
        second,
        j_min: j_w,
        j_second,
        c0,
        route,
        separation_sup,
        minimizer_residual_sup: r_min,
        second_residual_sup: r_second,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{FiniteGraph, VortexSet};
    use crate::linalg::LinearSolveOptions;
    use crate::monotone::compute_u0;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn k2_setup(lambda: f64, b: f64) -> (Problem, BackgroundField) {
        let g = Arc::new(
            FiniteGraph::new(
                vec![("x1".into(), 1.0), ("x2".into(), 1.0)],
                vec![("x1".into(), "x2".into(), 1.0)],
            )
            .unwrap(),
        );
        let vort = VortexSet::new(&g, &["x1".into()]).unwrap();
        let bg = compute_u0(&g, &vort, &LinearSolveOptions::default()).unwrap();
        let problem = Problem::new(g, vort, lambda, b).unwrap();
        (problem, bg)
    }

    #[test]
    fn functional_value_at_minus_u0() {
        // With v = -u0: J = 2*pi^2 - lambda on K2 (b = 1, one vortex).
        for lambda in [10.0, 25.0, 60.0] {
            let (problem, bg) = k2_setup(lambda, 1.0);
            let v = bg.u0.scale(-1.0);
            let j = functional_j(&problem, &bg, &v).unwrap();
            assert_relative_eq!(j, 2.0 * PI * PI - lambda, max_relative = 1e-10);
        }
    }

    #[test]
    fn functional_young_lower_bound() {
        let (problem, bg) = k2_setup(40.0, 1.0);
        let g = problem.graph.as_ref();
        for vals in [
            vec![0.0, 0.0],
            vec![-1.0, 2.0],
            vec![3.0, -4.0],
            vec![-6.0, -6.0],
        ] {
            let v = VertexFunction::new(g, vals).unwrap();
            let j = functional_j(&problem, &bg, &v).unwrap();
            let gamma = gradient_form(g, &v, &v).unwrap();
            let quad = 0.5 * integrate(g, &gamma).unwrap();
            let lin = problem.source_constant() * integrate(g, &v).unwrap();
            let bound = quad - problem.b * problem.lambda * g.total_measure() / (problem.b + 1.0)
                + lin;
            assert!(j >= bound - 1e-9, "J = {j}, bound = {bound}");
        }
    }

    #[test]
    fn functional_sinks_along_negative_constants() {
        let (problem, bg) = k2_setup(40.0, 1.0);
        let v = bg.u0.scale(-1.0);
        let j0 = functional_j(&problem, &bg, &v).unwrap();
        let j1 = functional_j(&problem, &bg, &v.shift(-50.0)).unwrap();
        let j2 = functional_j(&problem, &bg, &v.shift(-500.0)).unwrap();
        assert!(j1 < j0 && j2 < j1);
    }

    #[test]
    fn functional_overflow_is_an_error() {
        let (problem, bg) = k2_setup(40.0, 1.0);
        let v = VertexFunction::new(problem.graph.as_ref(), vec![500.0, 500.0]).unwrap();
        assert!(matches!(
            functional_j(&problem, &bg, &v),
            Err(Error::FunctionalOverflow { .. })
        ));
    }

    #[test]
    fn gradient_is_negated_residual_exactly() {
        let (problem, bg) = k2_setup(33.0, 1.5);
        let v = VertexFunction::new(problem.graph.as_ref(), vec![0.37, -2.11]).unwrap();
        let r = residual(&problem, &bg, &v).unwrap();
        let g = grad_j(&problem, &bg, &v).unwrap();
        for x in 0..2 {
            assert_eq!(g.get(x), -r.get(x));
        }
    }

    #[test]
    fn gradient_matches_directional_differences() {
        let (problem, bg) = k2_setup(28.0, 1.0);
        let g = problem.graph.as_ref();
        let v = bg.u0.scale(-1.0).shift(-0.3);
        let grad = grad_j(&problem, &bg, &v).unwrap();
        let eps = 1e-5;
        for phi_vals in [vec![1.0, 0.0], vec![0.0, 1.0], vec![0.7, -1.3]] {
            let phi = VertexFunction::new(g, phi_vals).unwrap();
            let plus = functional_j(&problem, &bg, &v.add(&phi.scale(eps))).unwrap();
            let minus = functional_j(&problem, &bg, &v.sub(&phi.scale(eps))).unwrap();
            let fd = (plus - minus) / (2.0 * eps);
            let exact = inner_product(g, &grad, &phi).unwrap();
            assert_relative_eq!(fd, exact, max_relative = 1e-6, epsilon = 1e-9);
        }
    }

    #[test]
    fn gradient_vanishes_at_solutions() {
        let (problem, bg) = k2_setup(2.0 * 8.0 * PI, 1.0);
        let report = iterate_scheme(&problem, &bg, &MonotoneOptions::default()).unwrap();
        let v = report.solution(problem.lambda).unwrap();
        assert!(grad_j(&problem, &bg, v).unwrap().sup_norm() < 1e-9);
    }
}
