//! Primal-dual interior-point method with Nesterov-Todd scaling and a
//! Mehrotra predictor-corrector step.
//!
//! The scaling point is formed from Cholesky factors `X = L L'`, `S = R R'`
//! and the SVD `R' L = U diag(lambda) V'`. With `G = L V diag(lambda)^-1/2`
//! the scaled iterates `G^-1 X G^-T` and `G' S G` both equal `diag(lambda)`,
//! so the linearized complementarity equation is a diagonal Lyapunov
//! equation in the scaled frame.

use nalgebra::{DMatrix, DVector};

use crate::{SdpError, SdpProblem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpOptions {
    /// Absolute target for the duality gap and both feasibility residuals.
    pub tol: f64,
    pub max_iter: usize,
    /// Dual objective beyond this bound reports the primal as infeasible.
    pub divergence_bound: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 200,
            divergence_bound: 1e8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    /// Either objective diverged past the configured bound.
    Infeasible,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub s: DMatrix<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `|<C, X> - b'y|`.
    pub gap: f64,
    /// `<X, S>`.
    pub complementarity: f64,
    /// `max_i |b_i - <A_i, X>|`.
    pub primal_residual: f64,
    /// Largest entry of `|C - A'y - S|`.
    pub dual_residual: f64,
    pub min_eig_x: f64,
    pub min_eig_s: f64,
    pub iterations: usize,
    pub gap_history: Vec<f64>,
    /// Human-readable reason when the status is not optimal.
    pub message: Option<String>,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }

    pub fn diagnostics(&self) -> String {
        format!(
            "status={:?} iterations={} pobj={:.12e} dobj={:.12e} gap={:.3e} \
             compl={:.3e} rp={:.3e} rd={:.3e}{}",
            self.status,
            self.iterations,
            self.primal_objective,
            self.dual_objective,
            self.gap,
            self.complementarity,
            self.primal_residual,
            self.dual_residual,
            self.message
                .as_deref()
                .map(|m| format!(" ({m})"))
                .unwrap_or_default()
        )
    }

    /// True when every certificate quantity is within `tol`.
    pub fn certifies(&self, tol: f64) -> bool {
        self.is_optimal()
            && self.gap <= tol
            && self.complementarity <= tol
            && self.primal_residual <= tol
            && self.dual_residual <= tol
            && self.min_eig_x >= -tol
            && self.min_eig_s >= -tol
    }
}

struct Scaling {
    g: DMatrix<f64>,
    g_inv: DMatrix<f64>,
    w: DMatrix<f64>,
    lambda: DVector<f64>,
}

fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for j in 0..n {
        for i in 0..j {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    let mut sym = a.clone();
    symmetrize(&mut sym);
    sym.symmetric_eigenvalues().min()
}

fn nt_scaling(x: &DMatrix<f64>, s: &DMatrix<f64>) -> Option<Scaling> {
    let l = x.clone().cholesky()?.unpack();
    let r = s.clone().cholesky()?.unpack();
    let svd = (r.transpose() * &l).svd(true, true);
    let u = svd.u?;
    let v_t = svd.v_t?;
    let lambda = svd.singular_values;
    if lambda.iter().any(|&v| v.is_nan() || v <= 0.0 || !v.is_finite()) {
        return None;
    }
    let inv_sqrt = lambda.map(|v| 1.0 / v.sqrt());
    let g = &l * v_t.transpose() * DMatrix::from_diagonal(&inv_sqrt);
    let g_inv = DMatrix::from_diagonal(&inv_sqrt) * u.transpose() * r.transpose();
    let w = &g * g.transpose();
    Some(Scaling {
        g,
        g_inv,
        w,
        lambda,
    })
}

/// Largest step in `(0, inf]` keeping `base + step * dir` positive semidefinite.
fn max_step(base: &DMatrix<f64>, dir: &DMatrix<f64>) -> Option<f64> {
    let chol = base.clone().cholesky()?;
    let l = chol.l();
    let half = l.solve_lower_triangular(dir)?;
    let full = l.solve_lower_triangular(&half.transpose())?;
    let lmin = min_eigenvalue(&full);
    Some(if lmin >= 0.0 { f64::INFINITY } else { -1.0 / lmin })
}

struct Workspace<'a> {
    problem: &'a SdpProblem,
    entries: Vec<Vec<(usize, usize, f64)>>,
}

impl<'a> Workspace<'a> {
    fn new(problem: &'a SdpProblem) -> Self {
        let entries = problem
            .constraints()
            .iter()
            .map(|c| c.a.full_entries())
            .collect();
        Self { problem, entries }
    }

    fn a_map(&self, z: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_vec(self.problem.constraint_map(z))
    }

    fn a_adjoint(&self, y: &DVector<f64>) -> DMatrix<f64> {
        self.problem.adjoint_map(y.as_slice())
    }

    /// Schur complement `M_ij = <A_i, W A_j W>`.
    fn schur(&self, w: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.problem.dim();
        let m = self.entries.len();
        let mut out = DMatrix::zeros(m, m);
        let mut waw = DMatrix::zeros(n, n);
        for j in 0..m {
            let ej = &self.entries[j];
            if ej.len() < n {
                waw.fill(0.0);
                for &(c, d, u) in ej {
                    // W A W += u * W[:, c] W[d, :]
                    for col in 0..n {
                        let f = u * w[(d, col)];
                        if f != 0.0 {
                            for row in 0..n {
                                waw[(row, col)] += f * w[(row, c)];
                            }
                        }
                    }
                }
            } else {
                let aj = self.problem.constraints()[j].a.to_dense();
                waw = w * aj * w;
            }
            for i in 0..=j {
                let v: f64 = self.entries[i]
                    .iter()
                    .map(|&(a, b, val)| val * waw[(a, b)])
                    .sum();
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }
}

enum SchurFactor {
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SchurFactor {
    fn new(m: DMatrix<f64>) -> Option<Self> {
        if let Some(c) = m.clone().cholesky() {
            return Some(Self::Cholesky(c));
        }
        let scale = m.diagonal().amax().max(1.0);
        let mut reg = m.clone();
        for i in 0..reg.nrows() {
            reg[(i, i)] += 1e-13 * scale;
        }
        if let Some(c) = reg.cholesky() {
            return Some(Self::Cholesky(c));
        }
        let lu = m.lu();
        lu.is_invertible().then_some(Self::Lu(lu))
    }

    fn solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        match self {
            Self::Cholesky(c) => Some(c.solve(rhs)),
            Self::Lu(lu) => lu.solve(rhs),
        }
    }
}

struct Direction {
    dx: DMatrix<f64>,
    dy: DVector<f64>,
    ds: DMatrix<f64>,
}

struct Residuals {
    rp: DVector<f64>,
    rd: DMatrix<f64>,
}

fn direction(
    ws: &Workspace<'_>,
    factor: &SchurFactor,
    w: &DMatrix<f64>,
    res: &Residuals,
    rc: &DMatrix<f64>,
) -> Option<Direction> {
    let wrdw = w * &res.rd * w;
    let rhs = &res.rp - ws.a_map(&(rc - &wrdw));
    let dy = factor.solve(&rhs)?;
    let ds = &res.rd - ws.a_adjoint(&dy);
    let mut dx = rc - w * &ds * w;
    symmetrize(&mut dx);
    Some(Direction { dx, dy, ds })
}

/// Scaled-frame right-hand side `G D G'` where `D` solves
/// `Lambda D + D Lambda = 2 R`.
fn lyapunov_rhs(sc: &Scaling, r: &DMatrix<f64>) -> DMatrix<f64> {
    let n = r.nrows();
    let d = DMatrix::from_fn(n, n, |i, j| 2.0 * r[(i, j)] / (sc.lambda[i] + sc.lambda[j]));
    let mut out = &sc.g * d * sc.g.transpose();
    symmetrize(&mut out);
    out
}

pub fn solve(problem: &SdpProblem, options: &SdpOptions) -> Result<SdpSolution, SdpError> {
    if options.tol.is_nan() || options.tol <= 0.0 {
        return Err(SdpError::InvalidOptions("tol must be positive".into()));
    }
    if options.max_iter == 0 {
        return Err(SdpError::InvalidOptions("max_iter must be positive".into()));
    }
    let n = problem.dim();
    let nf = n as f64;
    let ws = Workspace::new(problem);
    let c = problem.objective().to_dense();
    let b = DVector::from_iterator(
        problem.constraints().len(),
        problem.constraints().iter().map(|k| k.b),
    );

    let a_norms: Vec<f64> = problem
        .constraints()
        .iter()
        .map(|k| k.a.frobenius_norm())
        .collect();
    let max_ratio = problem
        .constraints()
        .iter()
        .zip(&a_norms)
        .map(|(k, &an)| (1.0 + k.b.abs()) / (1.0 + an))
        .fold(0.0, f64::max);
    let x_scale = 10f64.max(nf.sqrt()).max(nf * max_ratio);
    let s_scale = 10f64
        .max(nf.sqrt())
        .max(a_norms.iter().copied().fold(c.norm(), f64::max));

    let mut x = DMatrix::identity(n, n) * x_scale;
    let mut s = DMatrix::identity(n, n) * s_scale;
    let mut y = DVector::zeros(b.len());
    let mut history = Vec::new();

    let finish = |status: SdpStatus,
                  x: DMatrix<f64>,
                  y: DVector<f64>,
                  s: DMatrix<f64>,
                  iterations: usize,
                  history: Vec<f64>,
                  message: Option<String>| {
        let rp = &b - ws.a_map(&x);
        let rd = &c - ws.a_adjoint(&y) - &s;
        let pobj = inner(&c, &x);
        let dobj = b.dot(&y);
        SdpSolution {
            status,
            primal_objective: pobj,
            dual_objective: dobj,
            gap: (pobj - dobj).abs(),
            complementarity: inner(&x, &s),
            primal_residual: rp.amax(),
            dual_residual: rd.amax(),
            min_eig_x: min_eigenvalue(&x),
            min_eig_s: min_eigenvalue(&s),
            x,
            y,
            s,
            iterations,
            gap_history: history,
            message,
        }
    };

    for iter in 0..options.max_iter {
        let res = Residuals {
            rp: &b - ws.a_map(&x),
            rd: &c - ws.a_adjoint(&y) - &s,
        };
        let pobj = inner(&c, &x);
        let dobj = b.dot(&y);
        let compl = inner(&x, &s);
        let gap = (pobj - dobj).abs();
        history.push(gap);
        log::debug!(
            "iter {iter}: pobj={pobj:.10e} dobj={dobj:.10e} gap={gap:.3e} compl={compl:.3e} \
             rp={:.3e} rd={:.3e}",
            res.rp.amax(),
            res.rd.amax()
        );

        if compl <= options.tol
            && gap <= options.tol
            && res.rp.amax() <= options.tol
            && res.rd.amax() <= options.tol
        {
            return Ok(finish(SdpStatus::Optimal, x, y, s, iter, history, None));
        }
        if dobj > options.divergence_bound {
            return Ok(finish(
                SdpStatus::Infeasible,
                x,
                y,
                s,
                iter,
                history,
                Some("dual objective diverged; primal infeasible".into()),
            ));
        }
        if pobj < -options.divergence_bound {
            return Ok(finish(
                SdpStatus::Infeasible,
                x,
                y,
                s,
                iter,
                history,
                Some("primal objective diverged; dual infeasible".into()),
            ));
        }

        let fail = |why: &str, x, y, s, history| {
            Ok(finish(
                SdpStatus::NumericalFailure,
                x,
                y,
                s,
                iter,
                history,
                Some(why.to_string()),
            ))
        };

        let Some(sc) = nt_scaling(&x, &s) else {
            return fail("iterate left the cone", x, y, s, history);
        };
        let Some(factor) = SchurFactor::new(ws.schur(&sc.w)) else {
            return fail("singular Schur complement", x, y, s, history);
        };
        let mu = compl / nf;

        // Predictor: D = -Lambda, i.e. G D G' = -X.
        let rc_aff = -&x;
        let Some(aff) = direction(&ws, &factor, &sc.w, &res, &rc_aff) else {
            return fail("predictor solve failed", x, y, s, history);
        };
        let (Some(ap), Some(ad)) = (max_step(&x, &aff.dx), max_step(&s, &aff.ds)) else {
            return fail("step length computation failed", x, y, s, history);
        };
        let ap = ap.min(1.0);
        let ad = ad.min(1.0);
        let mu_aff = inner(&(&x + &aff.dx * ap), &(&s + &aff.ds * ad)) / nf;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector with the second-order term in the scaled frame.
        let dxt = &sc.g_inv * &aff.dx * sc.g_inv.transpose();
        let dst = sc.g.transpose() * &aff.ds * &sc.g;
        let cross = (&dxt * &dst + &dst * &dxt) * 0.5;
        let mut r = -cross;
        for i in 0..n {
            r[(i, i)] += sigma * mu - sc.lambda[i] * sc.lambda[i];
        }
        let rc = lyapunov_rhs(&sc, &r);
        let Some(dir) = direction(&ws, &factor, &sc.w, &res, &rc) else {
            return fail("corrector solve failed", x, y, s, history);
        };
        let (Some(mp), Some(md)) = (max_step(&x, &dir.dx), max_step(&s, &dir.ds)) else {
            return fail("step length computation failed", x, y, s, history);
        };
        let tau = (0.9 + 0.09 * ap.min(ad)).min(0.99);
        let alpha_p = (tau * mp).min(1.0);
        let alpha_d = (tau * md).min(1.0);

        x += &dir.dx * alpha_p;
        y += &dir.dy * alpha_d;
        s += &dir.ds * alpha_d;
        symmetrize(&mut x);
        symmetrize(&mut s);
    }

    let iters = options.max_iter;
    Ok(finish(
        SdpStatus::NumericalFailure,
        x,
        y,
        s,
        iters,
        history,
        Some(format!("no convergence after {iters} iterations")),
    ))
}
