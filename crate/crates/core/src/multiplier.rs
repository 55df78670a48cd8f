//! Herz-Schur multiplier norms on finite groups.
//!
//! `||phi||_{B2}` is the optimal value of
//!
//! ```text
//! minimize t  subject to  [[S, A], [A*, T]] >= 0,  diag(S) <= t,  diag(T) <= t,
//! A_{s,t} = phi(t^-1 s),
//! ```
//!
//! and `||psi||_Q` is the support function of the unit ball of that norm.
//! Both programs are invariant under simultaneous left translation
//! `(s, t) -> (g s, g t)`, so averaging any feasible point over the group keeps
//! it feasible with the same value. The solver therefore searches over block
//! matrices whose blocks are convolution matrices `L(f)_{s,s'} = f(s'^-1 s)`,
//! which keeps the number of scalar unknowns linear in `|G|`.

use std::sync::OnceLock;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use vne_sdp::realify::{hermitian_part, push_hermitian};
use vne_sdp::{solve, Constraint, SdpOptions, SdpProblem, SdpSolution, SdpStatus, SymMatrix};

use crate::error::{GroupError, MultiplierError};
use crate::group::{character_table, Element, FiniteGroup, GroupFunction};
use crate::vna::CMatrix;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Certificate quantities of one SDP solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub status: SdpStatus,
    pub iterations: usize,
    pub gap: f64,
    pub complementarity: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub min_eig_x: f64,
    pub min_eig_s: f64,
}

impl SolveStats {
    fn from_solution(sol: &SdpSolution) -> Self {
        Self {
            status: sol.status,
            iterations: sol.iterations,
            gap: sol.gap,
            complementarity: sol.complementarity,
            primal_residual: sol.primal_residual,
            dual_residual: sol.dual_residual,
            min_eig_x: sol.min_eig_x,
            min_eig_s: sol.min_eig_s,
        }
    }

    /// Gap and both feasibility residuals within `tol`.
    pub fn certified(&self, tol: f64) -> bool {
        self.status == SdpStatus::Optimal
            && self.gap <= tol
            && self.primal_residual <= tol
            && self.dual_residual <= tol
    }
}

#[derive(Debug, Clone)]
pub struct NormCertificate {
    pub value: f64,
    pub stats: SolveStats,
}

/// `n x n` matrix `L(f)_{s,s'} = f(s'^-1 s)`.
pub fn convolution_matrix(f: &GroupFunction) -> CMatrix {
    let g = f.group();
    CMatrix::from_fn(g.order(), g.order(), |s, sp| f.at(g.mul(g.inv(sp), s)))
}

/// Gram matrix `G_{s,t} = phi(t^-1 s)`.
pub fn gram_matrix(phi: &GroupFunction) -> CMatrix {
    convolution_matrix(phi)
}

pub fn min_gram_eigenvalue(phi: &GroupFunction) -> f64 {
    gram_matrix(phi).symmetric_eigenvalues().min()
}

pub fn is_positive_definite(phi: &GroupFunction, tol: f64) -> bool {
    min_gram_eigenvalue(phi) >= -tol
}

/// Real coordinates of a Hermitian function `w(g^-1) = conj(w(g))` vanishing at `e`.
fn hermitian_directions(group: &FiniteGroup) -> Vec<(Element, Complex64)> {
    let mut out = Vec::new();
    for g in group.elements().skip(1) {
        let gi = group.inv(g);
        if gi == g {
            out.push((g, ONE));
        } else if g < gi {
            out.push((g, ONE));
            out.push((g, I));
        }
    }
    out
}

/// `L(f)` for `f = z delta_g + conj(z) delta_{g^-1}` (just `delta_g` when `g = g^-1`).
fn hermitian_basis(group: &FiniteGroup, g: Element, z: Complex64) -> GroupFunction {
    let gi = group.inv(g);
    GroupFunction::from_fn(group, |x| {
        if x == g {
            z
        } else if x == gi {
            z.conj()
        } else {
            ZERO
        }
    })
}

/// Realified image of the `2n x 2n` Hermitian matrix with `top_left`,
/// `top_right` and `bottom_right` blocks (bottom-left is the adjoint).
fn block_matrix(
    n: usize,
    top_left: Option<&CMatrix>,
    top_right: Option<&CMatrix>,
    bottom_right: Option<&CMatrix>,
    scale: f64,
) -> SymMatrix {
    let dim = 2 * n;
    let mut out = SymMatrix::zeros(2 * dim);
    let mut put = |i: usize, j: usize, z: Complex64| {
        if z != ZERO {
            push_hermitian(&mut out, dim, i, j, z * scale);
        }
    };
    for i in 0..n {
        for j in 0..n {
            if let Some(m) = top_left {
                if i <= j {
                    put(i, j, m[(i, j)]);
                }
            }
            if let Some(m) = bottom_right {
                if i <= j {
                    put(n + i, n + j, m[(i, j)]);
                }
            }
            if let Some(m) = top_right {
                put(i, n + j, m[(i, j)]);
            }
        }
    }
    out
}

fn identity_block(n: usize, scale: f64) -> SymMatrix {
    let id = CMatrix::identity(n, n);
    block_matrix(n, Some(&id), None, Some(&id), scale)
}

fn certify(sol: &SdpSolution, tol: f64) -> Result<SolveStats, MultiplierError> {
    let stats = SolveStats::from_solution(sol);
    if stats.certified(tol) {
        Ok(stats)
    } else {
        Err(MultiplierError::Solver(sol.diagnostics()))
    }
}

struct B2Program {
    problem: SdpProblem,
    n: usize,
}

/// Dual form: maximize `-t` over `y = (t, w1, w2)` subject to
/// `Z(y) = t I + [[L(w1), L(phi)], [L(phi)*, L(w2)]] >= 0`.
fn b2_program(phi: &GroupFunction) -> Result<B2Program, MultiplierError> {
    let g = phi.group();
    let n = g.order();
    let objective = block_matrix(n, None, Some(&convolution_matrix(phi)), None, 1.0);
    let mut constraints = vec![Constraint {
        a: identity_block(n, -1.0),
        b: -1.0,
    }];
    for (x, z) in hermitian_directions(g) {
        let l = convolution_matrix(&hermitian_basis(g, x, z));
        constraints.push(Constraint {
            a: block_matrix(n, Some(&l), None, None, -1.0),
            b: 0.0,
        });
        constraints.push(Constraint {
            a: block_matrix(n, None, None, Some(&l), -1.0),
            b: 0.0,
        });
    }
    Ok(B2Program {
        problem: SdpProblem::new(4 * n, objective, constraints)?,
        n,
    })
}

fn options(tol: f64) -> SdpOptions {
    SdpOptions {
        tol,
        ..SdpOptions::default()
    }
}

/// `||phi||_{B2}` with its solver certificate.
pub fn b2_norm_certified(phi: &GroupFunction, opts: &SdpOptions) -> Result<NormCertificate, MultiplierError> {
    Ok(b2_solve(phi, opts)?.0)
}

fn b2_solve(
    phi: &GroupFunction,
    opts: &SdpOptions,
) -> Result<(NormCertificate, SdpSolution, B2Program), MultiplierError> {
    let prog = b2_program(phi)?;
    let sol = solve(&prog.problem, opts)?;
    let stats = certify(&sol, opts.tol)?;
    let cert = NormCertificate {
        value: sol.y[0],
        stats,
    };
    Ok((cert, sol, prog))
}

/// `||phi||_{B2}`, accurate to `tol`.
pub fn b2_norm(phi: &GroupFunction, tol: f64) -> Result<f64, MultiplierError> {
    b2_norm_certified(phi, &options(tol)).map(|c| c.value)
}

/// Dual form: maximize `Re sum_g psi(g) u(g)` over `y = (u, w1, w2)` subject to
/// `I + [[L(w1), L(u)], [L(u)*, L(w2)]] >= 0`.
///
/// The unit ball is invariant under `u -> e^{i a} u`, so the maximal real part
/// equals the maximal modulus.
pub fn q_norm_certified(psi: &GroupFunction, opts: &SdpOptions) -> Result<NormCertificate, MultiplierError> {
    let g = psi.group();
    let n = g.order();
    let mut constraints = Vec::new();
    for x in g.elements() {
        for (z, coeff) in [(ONE, psi.at(x).re), (I, -psi.at(x).im)] {
            let l = convolution_matrix(&GroupFunction::from_fn(g, |y| if y == x { z } else { ZERO }));
            constraints.push(Constraint {
                a: block_matrix(n, None, Some(&l), None, -1.0),
                b: coeff,
            });
        }
    }
    for (x, z) in hermitian_directions(g) {
        let l = convolution_matrix(&hermitian_basis(g, x, z));
        constraints.push(Constraint {
            a: block_matrix(n, Some(&l), None, None, -1.0),
            b: 0.0,
        });
        constraints.push(Constraint {
            a: block_matrix(n, None, None, Some(&l), -1.0),
            b: 0.0,
        });
    }
    let problem = SdpProblem::new(4 * n, identity_block(n, 1.0), constraints)?;
    let sol = solve(&problem, opts)?;
    let stats = certify(&sol, opts.tol)?;
    Ok(NormCertificate {
        value: sol.dual_objective,
        stats,
    })
}

/// `||psi||_Q = sup { |sum_s psi(s) u(s)| : ||u||_{B2} <= 1 }`.
pub fn q_norm(psi: &GroupFunction, tol: f64) -> Result<f64, MultiplierError> {
    q_norm_certified(psi, &options(tol)).map(|c| c.value)
}

/// B-norm of an abelian group function: the l1 norm of its Fourier transform.
/// Independent of the SDP path; used to check it.
pub fn abelian_b2_oracle(phi: &GroupFunction) -> Result<f64, GroupError> {
    let table = character_table(phi.group())?;
    Ok(table.fourier(phi)?.iter().map(|c| c.norm()).sum())
}

/// Q-norm of an abelian group function: `max_chi |sum_s psi(s) chi(s)|`.
pub fn abelian_q_oracle(psi: &GroupFunction) -> Result<f64, GroupError> {
    let table = character_table(psi.group())?;
    Ok(table
        .rows()
        .map(|chi| psi.values().iter().zip(chi).map(|(a, b)| a * b).sum::<Complex64>().norm())
        .fold(0.0, f64::max))
}

fn inner(u: &DVector<Complex64>, v: &DVector<Complex64>) -> Complex64 {
    u.iter().zip(v.iter()).map(|(a, b)| a * b.conj()).sum()
}

/// Vectors with `phi(t^-1 s) = <xi(s), eta(t)>`, inner products linear in the
/// first slot.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessPair {
    group: FiniteGroup,
    dimension: usize,
    xi: Vec<DVector<Complex64>>,
    eta: Vec<DVector<Complex64>>,
    sup_xi: f64,
    sup_eta: f64,
    tolerance: f64,
}

impl WitnessPair {
    /// Checks that `<xi(s), eta(t)>` depends only on `t^-1 s` within `tolerance`.
    pub fn new(
        group: FiniteGroup,
        xi: Vec<DVector<Complex64>>,
        eta: Vec<DVector<Complex64>>,
        tolerance: f64,
    ) -> Result<Self, MultiplierError> {
        let n = group.order();
        if xi.len() != n || eta.len() != n {
            return Err(MultiplierError::InvalidWitness(format!("expected {n} vectors on each side")));
        }
        let dimension = xi[0].len();
        if xi.iter().chain(&eta).any(|v| v.len() != dimension) {
            return Err(MultiplierError::InvalidWitness("vectors have different dimensions".into()));
        }
        let sup = |vs: &[DVector<Complex64>]| vs.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let w = Self {
            sup_xi: sup(&xi),
            sup_eta: sup(&eta),
            group,
            dimension,
            xi,
            eta,
            tolerance,
        };
        let phi = w.represented_function();
        let res = w.residual(&phi);
        if res > tolerance {
            return Err(MultiplierError::InvalidWitness(format!(
                "<xi(s), eta(t)> is not a function of t^-1 s (residual {res:.3e})"
            )));
        }
        Ok(w)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn xi(&self, s: Element) -> &DVector<Complex64> {
        &self.xi[s]
    }

    pub fn eta(&self, t: Element) -> &DVector<Complex64> {
        &self.eta[t]
    }

    pub fn sup_xi(&self) -> f64 {
        self.sup_xi
    }

    pub fn sup_eta(&self) -> f64 {
        self.sup_eta
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// `s -> <xi(s), eta(e)>`.
    pub fn represented_function(&self) -> GroupFunction {
        GroupFunction::from_fn(&self.group, |s| inner(&self.xi[s], &self.eta[0]))
    }

    /// `max_{s,t} |phi(t^-1 s) - <xi(s), eta(t)>|`.
    pub fn residual(&self, phi: &GroupFunction) -> f64 {
        let g = &self.group;
        let mut worst: f64 = 0.0;
        for s in g.elements() {
            for t in g.elements() {
                let d = phi.at(g.mul(g.inv(t), s)) - inner(&self.xi[s], &self.eta[t]);
                worst = worst.max(d.norm());
            }
        }
        worst
    }
}

fn factor_rows(z: &CMatrix) -> Vec<DVector<Complex64>> {
    let eig = z.clone().symmetric_eigen();
    let k = z.nrows();
    let roots: Vec<f64> = eig.eigenvalues.iter().map(|&d| d.max(0.0).sqrt()).collect();
    (0..k)
        .map(|row| DVector::from_fn(k, |col, _| eig.eigenvectors[(row, col)] * roots[col]))
        .collect()
}

/// GNS witnesses of a positive definite function: `xi = eta` are the rows of a
/// factor `F` with `F F* = G`, the Gram matrix.
pub fn gns_witnesses(phi: &GroupFunction) -> Result<WitnessPair, MultiplierError> {
    const CLAMP: f64 = 1e-10;
    let gram = gram_matrix(phi);
    let lmin = gram.symmetric_eigenvalues().min();
    if lmin < -CLAMP {
        return Err(MultiplierError::NotPositiveDefinite(lmin));
    }
    let rows = factor_rows(&gram);
    WitnessPair::new(phi.group().clone(), rows.clone(), rows, CLAMP)
}

/// Witnesses read off the optimal block matrix of the B2 program, rebalanced
/// so that `sup_xi = sup_eta`.
pub fn extract_witnesses(phi: &GroupFunction, tol: f64) -> Result<WitnessPair, MultiplierError> {
    extract_witnesses_with(phi, &options(tol)).map(|(w, _)| w)
}

pub fn extract_witnesses_with(
    phi: &GroupFunction,
    opts: &SdpOptions,
) -> Result<(WitnessPair, NormCertificate), MultiplierError> {
    let (cert, sol, prog) = b2_solve(phi, opts)?;
    let n = prog.n;
    // Rebuild Z(y) exactly so the off-diagonal block is L(phi) to rounding.
    let mut slack = prog.problem.objective().to_dense();
    slack -= prog.problem.adjoint_map(sol.y.as_slice());
    let mut z = hermitian_part(&slack);
    let shift = (-z.symmetric_eigenvalues().min()).max(0.0);
    for i in 0..2 * n {
        z[(i, i)] += Complex64::new(shift, 0.0);
    }
    let rows = factor_rows(&z);
    let (xi, eta) = rows.split_at(n);
    let sup = |vs: &[DVector<Complex64>]| vs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let (sx, se) = (sup(xi), sup(eta));
    let c = if sx > 0.0 && se > 0.0 { (se / sx).sqrt() } else { 1.0 };
    let xi: Vec<_> = xi.iter().map(|v| v * Complex64::new(c, 0.0)).collect();
    let eta: Vec<_> = eta.iter().map(|v| v / Complex64::new(c, 0.0)).collect();
    let w = WitnessPair::new(phi.group().clone(), xi, eta, opts.tol)?;
    let res = w.residual(phi);
    if res > opts.tol {
        return Err(MultiplierError::InvalidWitness(format!(
            "extracted witnesses miss the input by {res:.3e}"
        )));
    }
    Ok((w, cert))
}

/// A group function with write-once caches for its norms and witnesses.
#[derive(Debug)]
pub struct Multiplier {
    function: GroupFunction,
    options: SdpOptions,
    b2: OnceLock<NormCertificate>,
    q: OnceLock<NormCertificate>,
    witnesses: OnceLock<WitnessPair>,
}

impl Multiplier {
    pub fn new(function: GroupFunction, options: SdpOptions) -> Self {
        Self {
            function,
            options,
            b2: OnceLock::new(),
            q: OnceLock::new(),
            witnesses: OnceLock::new(),
        }
    }

    pub fn function(&self) -> &GroupFunction {
        &self.function
    }

    pub fn options(&self) -> &SdpOptions {
        &self.options
    }

    pub fn sup_norm(&self) -> f64 {
        self.function.sup_norm()
    }

    pub fn b2_norm(&self) -> Result<&NormCertificate, MultiplierError> {
        if let Some(c) = self.b2.get() {
            return Ok(c);
        }
        let c = b2_norm_certified(&self.function, &self.options)?;
        Ok(self.b2.get_or_init(|| c))
    }

    pub fn q_norm(&self) -> Result<&NormCertificate, MultiplierError> {
        if let Some(c) = self.q.get() {
            return Ok(c);
        }
        let c = q_norm_certified(&self.function, &self.options)?;
        Ok(self.q.get_or_init(|| c))
    }

    pub fn witnesses(&self) -> Result<&WitnessPair, MultiplierError> {
        if let Some(w) = self.witnesses.get() {
            return Ok(w);
        }
        let (w, cert) = extract_witnesses_with(&self.function, &self.options)?;
        let _ = self.b2.set(cert);
        Ok(self.witnesses.get_or_init(|| w))
    }
}

/// Values with independent real and imaginary parts uniform in `[-1, 1]`.
pub fn random_multiplier<R: Rng + ?Sized>(group: &FiniteGroup, rng: &mut R) -> GroupFunction {
    GroupFunction::from_fn(group, |_| Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
}

/// `phi(g) = <lambda(g) v, v>` for the left regular representation and a
/// random unit vector `v`, so `phi(e) = 1`.
pub fn random_positive_definite<R: Rng + ?Sized>(group: &FiniteGroup, rng: &mut R) -> GroupFunction {
    let n = group.order();
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        v[0] = ONE;
    } else {
        v.iter_mut().for_each(|z| *z /= norm);
    }
    // (lambda(g) v)(x) = v(g^-1 x)
    GroupFunction::from_fn(group, |g| {
        let gi = group.inv(g);
        group.elements().map(|x| v[group.mul(gi, x)] * v[x].conj()).sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{cyclic, symmetric};

    fn real(g: &FiniteGroup, v: &[f64]) -> GroupFunction {
        GroupFunction::from_real(g, v).unwrap()
    }

    #[test]
    fn hermitian_directions_count() {
        // Z5: two inverse pairs, each with a real and an imaginary direction.
        assert_eq!(hermitian_directions(&cyclic(5).unwrap()).len(), 4);
        // Klein: three involutions.
        let k = crate::group::direct_product(&[cyclic(2).unwrap(), cyclic(2).unwrap()]).unwrap();
        assert_eq!(hermitian_directions(&k).len(), 3);
        assert_eq!(hermitian_directions(&cyclic(1).unwrap()).len(), 0);
    }

    #[test]
    fn positive_definiteness_examples() {
        let z2 = cyclic(2).unwrap();
        assert!(is_positive_definite(&GroupFunction::constant(&z2, ONE), 1e-12));
        assert!(!is_positive_definite(&real(&z2, &[1.0, 2.0]), 1e-12));
        assert!((min_gram_eigenvalue(&real(&z2, &[1.0, 2.0])) + 1.0).abs() < 1e-12);
        let z5 = cyclic(5).unwrap();
        let table = character_table(&z5).unwrap();
        for chi in table.rows() {
            let f = GroupFunction::new(z5.clone(), chi.to_vec()).unwrap();
            assert!(is_positive_definite(&f, 1e-12));
        }
    }

    #[test]
    fn oracle_examples() {
        let z2 = cyclic(2).unwrap();
        assert!((abelian_b2_oracle(&real(&z2, &[1.0, -1.0])).unwrap() - 1.0).abs() < 1e-15);
        assert!((abelian_b2_oracle(&real(&z2, &[2.0, 0.0])).unwrap() - 2.0).abs() < 1e-15);
        for n in 1..8 {
            let g = cyclic(n).unwrap();
            assert!((abelian_b2_oracle(&GroupFunction::delta(&g, 0)).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(abelian_b2_oracle(&GroupFunction::delta(&symmetric(3).unwrap(), 0)).is_err());
    }

    #[test]
    fn gns_rejects_indefinite_input() {
        let z2 = cyclic(2).unwrap();
        assert!(matches!(
            gns_witnesses(&real(&z2, &[1.0, 2.0])),
            Err(MultiplierError::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn witness_pair_rejects_inconsistent_vectors() {
        let z2 = cyclic(2).unwrap();
        let e0 = DVector::from_vec(vec![ONE, ZERO]);
        let e1 = DVector::from_vec(vec![ZERO, ONE]);
        // <xi(0), eta(0)> = 1 but <xi(1), eta(1)> = 0.
        let r = WitnessPair::new(z2, vec![e0.clone(), e1.clone()], vec![e0, e0_like(&e1)], 1e-10);
        assert!(r.is_err());
    }

    fn e0_like(v: &DVector<Complex64>) -> DVector<Complex64> {
        DVector::from_element(v.len(), ZERO)
    }

    #[test]
    fn multiplier_caches_are_write_once() {
        let g = cyclic(3).unwrap();
        let m = Multiplier::new(GroupFunction::delta(&g, 0), SdpOptions::default());
        let a = m.b2_norm().unwrap().value;
        let b = m.b2_norm().unwrap().value;
        assert_eq!(a, b);
        assert!((a - 1.0).abs() < 1e-6);
        let w = m.witnesses().unwrap();
        assert!(w.sup_xi() * w.sup_eta() <= 1.0 + 1e-7);
    }
}
