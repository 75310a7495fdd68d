//! Linear solves against the mu-Laplacian.
//!
//! Both solve routines reduce to symmetric positive definite systems in
//! the combinatorial Laplacian `L` (with `L = -M * Laplacian`, `M = diag(mu)`):
//!
//! * shifted system `(Laplacian - K) w = f`  <=>  `(L + K M) w = -M f`
//! * mean-zero Poisson `Laplacian w = f`     <=>  `(L + m m^T / |V|) w = -M f`
//!
//! where `m` is the measure vector. The rank-one term removes the constant
//! kernel and pins the mu-mean of the solution to zero in the same solve.
//! Dense Cholesky is used below a size threshold, conjugate gradients above
//! it; the residual contract is checked either way so callers never see the
//! difference.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::graph::{integrate, FiniteGraph, VertexFunction};

/// Options for the linear solvers.
#[derive(Debug, Clone)]
pub struct LinearSolveOptions {
    /// Relative residual bound on the returned solution.
    pub tolerance: f64,
    /// Iteration cap for the conjugate-gradient path.
    pub max_iterations: usize,
    /// Vertex count at or below which a dense factorization is used.
    pub dense_threshold: usize,
}

impl Default for LinearSolveOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 10_000,
            dense_threshold: 512,
        }
    }
}

impl LinearSolveOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "tolerance",
                value: self.tolerance,
            });
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iterations",
                value: 0.0,
            });
        }
        Ok(())
    }
}

/// Combinatorial Laplacian `L = D - A` as a dense matrix:
/// `L[x][x] = sum_y w_xy`, `L[x][y] = -w_xy`.
pub(crate) fn combinatorial_laplacian(g: &FiniteGraph) -> DMatrix<f64> {
    let n = g.vertex_count();
    let mut l = DMatrix::zeros(n, n);
    for x in 0..n {
        let mut deg = 0.0;
        for &(y, w) in g.neighbors(x) {
            deg += w;
            l[(x, y)] = -w;
        }
        l[(x, x)] = deg;
    }
    l
}

fn apply_combinatorial_laplacian(g: &FiniteGraph, v: &[f64], out: &mut [f64]) {
    for x in 0..g.vertex_count() {
        let mut acc = 0.0;
        for &(y, w) in g.neighbors(x) {
            acc += w * (v[x] - v[y]);
        }
        out[x] = acc;
    }
}

enum Backend {
    Dense {
        a: DMatrix<f64>,
        chol: Cholesky<f64, Dyn>,
    },
    /// Matrix-free conjugate gradients on the SPD operator.
    Iterative,
}

/// Cached solver for the shifted system `(Laplacian - K) w = f`.
///
/// The factorization is computed once and reused across solves; the handle
/// is immutable and safe to share between threads.
pub struct ShiftedOperator<'g> {
    g: &'g FiniteGraph,
    k: f64,
    backend: Backend,
    opts: LinearSolveOptions,
}

impl<'g> ShiftedOperator<'g> {
    pub fn new(g: &'g FiniteGraph, k: f64, opts: &LinearSolveOptions) -> Result<Self> {
        opts.validate()?;
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "K",
                value: k,
            });
        }
        let n = g.vertex_count();
        let backend = if n <= opts.dense_threshold {
            let mut a = combinatorial_laplacian(g);
            for x in 0..n {
                a[(x, x)] += k * g.mu(x);
            }
            let chol = Cholesky::new(a.clone()).ok_or(Error::FactorizationFailed)?;
            Backend::Dense { a, chol }
        } else {
            Backend::Iterative
        };
        Ok(Self {
            g: g,
            k,
            backend,
            opts: opts.clone(),
        })
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        apply_combinatorial_laplacian(self.g, v, out);
        for x in 0..self.g.vertex_count() {
            out[x] += self.k * self.g.mu(x) * v[x];
        }
    }

    /// Solves `(Laplacian - K) w = f` to the residual contract
    /// `||(Laplacian - K) w - f||_inf <= tolerance * max(1, ||f||_inf)`.
    pub fn solve(&self, f: &VertexFunction) -> Result<VertexFunction> {
        let n = self.g.vertex_count();
        if f.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: f.len(),
            });
        }
        // b = -M f
        let b: Vec<f64> = (0..n).map(|x| -self.g.mu(x) * f.get(x)).collect();
        let target = self.residual_target(f);
        let x = match &self.backend {
            Backend::Dense { a, chol } => {
                let bv = DVector::from_column_slice(&b);
                let mut x = chol.solve(&bv);
                // One or two refinement passes with the cached factorization.
                for _ in 0..2 {
                    let r = &bv - a * &x;
                    if r.amax() <= target {
                        break;
                    }
                    x += chol.solve(&r);
                }
                x.as_slice().to_vec()
            }
            Backend::Iterative => conjugate_gradient(
                |v, out| self.apply(v, out),
                &b,
                target,
                self.opts.max_iterations,
            )?,
        };
        let w = VertexFunction::from_raw(x);
        self.check_contract(f, &w)?;
        Ok(w)
    }

    /// Inf-norm target on the SPD-system residual that guarantees the
    /// contract on the original system (they differ by `M^{-1}`).
    fn residual_target(&self, f: &VertexFunction) -> f64 {
        let mu_min = self
            .g
            .measures()
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v));
        0.5 * self.opts.tolerance * f.sup_norm().max(1.0) * mu_min
    }

    fn check_contract(&self, f: &VertexFunction, w: &VertexFunction) -> Result<()> {
        let lap = crate::graph::laplacian(self.g, w)?;
        let mut worst = 0.0f64;
        for x in 0..self.g.vertex_count() {
            let r = lap.get(x) - self.k * w.get(x) - f.get(x);
            worst = worst.max(r.abs());
        }
        let allowed = self.opts.tolerance * f.sup_norm().max(1.0);
        if worst > allowed {
            return Err(Error::SolveDidNotConverge {
                iterations: 0,
                residual: worst,
            });
        }
        Ok(())
    }
}

/// One-shot shifted solve; see [`ShiftedOperator`] for the cached form.
pub fn solve_shifted(
    g: &FiniteGraph,
    k: f64,
    f: &VertexFunction,
    opts: &LinearSolveOptions,
) -> Result<VertexFunction> {
    ShiftedOperator::new(g, k, opts)?.solve(f)
}

/// Solves `Laplacian w = f` with `integral(w) = 0`.
///
/// The data must be compatible: on a connected graph the kernel of the
/// Laplacian is the constants, so `integral(f)` has to vanish up to
/// rounding (tolerance `1e-9 * ||f||_inf * |V|`). The data is projected
/// onto the mean-zero subspace before solving so only rounding noise is
/// removed.
pub fn solve_poisson_mean_zero(
    g: &FiniteGraph,
    f: &VertexFunction,
    opts: &LinearSolveOptions,
) -> Result<VertexFunction> {
    opts.validate()?;
    let n = g.vertex_count();
    if f.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: f.len(),
        });
    }
    let total = g.total_measure();
    let integral = integrate(g, f)?;
    let compat_tol = 1e-9 * f.sup_norm().max(f64::MIN_POSITIVE) * total;
    if integral.abs() > compat_tol {
        return Err(Error::IncompatibleData {
            integral,
            tolerance: compat_tol,
        });
    }
    let f_mean = integral / total;
    // b = -M (f - mean(f))
    let b: Vec<f64> = (0..n)
        .map(|x| -g.mu(x) * (f.get(x) - f_mean))
        .collect();
    let mu_min = g.measures().iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let target = 0.5 * opts.tolerance * f.sup_norm().max(1.0) * mu_min;

    let x = if n <= opts.dense_threshold {
        let mut a = combinatorial_laplacian(g);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] += g.mu(i) * g.mu(j) / total;
            }
        }
        let chol = Cholesky::new(a.clone()).ok_or(Error::FactorizationFailed)?;
        let bv = DVector::from_column_slice(&b);
        let mut x = chol.solve(&bv);
        for _ in 0..2 {
            let r = &bv - &a * &x;
            if r.amax() <= target {
                break;
            }
            x += chol.solve(&r);
        }
        x.as_slice().to_vec()
    } else {
        let apply = |v: &[f64], out: &mut [f64]| {
            apply_combinatorial_laplacian(g, v, out);
            let vmu: f64 = v
                .iter()
                .zip(g.measures())
                .map(|(&vi, &mi)| vi * mi)
                .sum();
            for i in 0..n {
                out[i] += g.mu(i) * vmu / total;
            }
        };
        conjugate_gradient(apply, &b, target, opts.max_iterations)?
    };

    // Remove the rounding-level mean left by the augmented solve.
    let mut w = VertexFunction::from_raw(x);
    let w_mean = integrate(g, &w)? / total;
    w = w.shift(-w_mean);

    // Contract check against the projected data.
    let lap = crate::graph::laplacian(g, &w)?;
    let mut worst = 0.0f64;
    for i in 0..n {
        worst = worst.max((lap.get(i) - (f.get(i) - f_mean)).abs());
    }
    if worst > opts.tolerance * f.sup_norm().max(1.0) {
        return Err(Error::SolveDidNotConverge {
            iterations: 0,
            residual: worst,
        });
    }
    Ok(w)
}

/// Smallest nonzero eigenvalue of `-Laplacian` in the mu-weighted inner
/// product (the spectral gap). The Poincare constant is its reciprocal.
///
/// Computed from the similarity-transformed symmetric matrix
/// `S = M^{-1/2} L M^{-1/2}`.
pub fn spectral_gap(g: &FiniteGraph, opts: &LinearSolveOptions) -> Result<f64> {
    opts.validate()?;
    let n = g.vertex_count();
    if n == 1 {
        // No nonzero eigenvalues exist; treat the gap as infinite is not
        // useful downstream, so report failure explicitly.
        return Err(Error::EigenSolverFailed);
    }
    let l = combinatorial_laplacian(g);
    let mut s = l;
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] /= (g.mu(i) * g.mu(j)).sqrt();
        }
    }
    let eig = nalgebra::SymmetricEigen::try_new(s, f64::EPSILON, 100_000)
        .ok_or(Error::EigenSolverFailed)?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let scale = vals.last().copied().unwrap_or(1.0).max(1.0);
    let cut = 1e-10 * scale;
    // Exactly one eigenvalue sits at zero on a connected graph.
    let near_zero = vals.iter().filter(|&&v| v.abs() <= cut).count();
    if near_zero != 1 {
        return Err(Error::EigenSolverFailed);
    }
    vals.into_iter()
        .find(|&v| v > cut)
        .ok_or(Error::EigenSolverFailed)
}

/// Poincare constant `C = 1 / spectral_gap`, the best constant in
/// `integral(u^2) <= C * integral(|grad u|^2)` over mean-zero `u`.
pub fn poincare_constant(g: &FiniteGraph, opts: &LinearSolveOptions) -> Result<f64> {
    Ok(1.0 / spectral_gap(g, opts)?)
}

fn conjugate_gradient(
    apply: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    target_inf: f64,
    max_iterations: usize,
) -> Result<Vec<f64>> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, &t| m.max(t.abs()));
    if inf(&r) <= target_inf {
        return Ok(x);
    }
    for iter in 1..=max_iterations {
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(&a, &b)| a * b).sum();
        if pap <= 0.0 {
            return Err(Error::FactorizationFailed);
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if inf(&r) <= target_inf {
            return Ok(x);
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        if iter == max_iterations {
            return Err(Error::SolveDidNotConverge {
                iterations: iter,
                residual: inf(&r),
            });
        }
    }
    unreachable!("loop returns or errors before falling through")
}
