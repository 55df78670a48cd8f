//! Transport of multipliers through a coupling.
//!
//! The map `phi -> phi_hat`, `phi_hat(gamma) = Tr(sigma_gamma(theta_p(phi)) p) / Tr(p)`,
//! is linear in `phi`, so it is stored once as the row-stochastic matrix
//! `K(gamma, s) = Tr(sigma^Lambda_s(p) sigma^Gamma_{gamma^-1}(p)) / Tr(p)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use vne_sdp::SdpOptions;

use crate::action::{is_fundamental_domain, koopman, theta_unchecked, TraceAction};
use crate::coupling::CouplingRecord;
use crate::error::{CouplingError, InductionError, MultiplierError};
use crate::group::{FiniteGroup, GroupFunction};
use crate::multiplier::{b2_norm_certified, min_gram_eigenvalue, q_norm_certified, WitnessPair};
use crate::vna::AlgebraElement;
use crate::STRUCTURAL_TOL;

#[derive(Debug, Clone)]
pub struct InductionKernel {
    coupling: CouplingRecord,
    domain: AlgebraElement,
    k: DMatrix<f64>,
    trace_form_defect: f64,
}

/// Kernel of the coupling's own fundamental domain `p`.
pub fn induction_kernel(c: &CouplingRecord) -> InductionKernel {
    InductionKernel::build(c.clone(), c.p().clone())
}

impl InductionKernel {
    /// Kernel for another fundamental domain of the `Lambda`-action.
    pub fn with_domain(c: &CouplingRecord, p: AlgebraElement) -> Result<Self, CouplingError> {
        if !is_fundamental_domain(c.lambda_action(), &p, STRUCTURAL_TOL)? {
            return Err(CouplingError::NotFundamentalDomain("alternative p for the Lambda-action".into()));
        }
        Ok(Self::build(c.clone(), p))
    }

    fn build(coupling: CouplingRecord, p: AlgebraElement) -> Self {
        let gamma = coupling.gamma_action();
        let lambda = coupling.lambda_action();
        let (ng, nl) = (gamma.group().order(), lambda.group().order());
        let tr_p = p.trace().re;
        let translates: Vec<AlgebraElement> = lambda.group().elements().map(|s| lambda.apply(s, &p)).collect();
        let mut k = DMatrix::zeros(ng, nl);
        let mut defect: f64 = 0.0;
        for g in gamma.group().elements() {
            let back = gamma.apply(gamma.group().inv(g), &p);
            for (s, ps) in translates.iter().enumerate() {
                let forward = gamma.apply(g, ps).mul(&p).expect("shape").trace() / tr_p;
                let moved = ps.mul(&back).expect("shape").trace() / tr_p;
                defect = defect.max((forward - moved).norm()).max(moved.im.abs());
                k[(g, s)] = moved.re;
            }
        }
        Self {
            coupling,
            domain: p,
            k,
            trace_form_defect: defect,
        }
    }

    pub fn coupling(&self) -> &CouplingRecord {
        &self.coupling
    }

    pub fn domain(&self) -> &AlgebraElement {
        &self.domain
    }

    pub fn gamma(&self) -> &FiniteGroup {
        self.coupling.gamma()
    }

    pub fn lambda(&self) -> &FiniteGroup {
        self.coupling.lambda()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.k
    }

    pub fn entry(&self, gamma: usize, s: usize) -> f64 {
        self.k[(gamma, s)]
    }

    pub fn row(&self, gamma: usize) -> Vec<f64> {
        self.k.row(gamma).iter().copied().collect()
    }

    pub fn pairing(&self) -> Option<&[usize]> {
        self.coupling.pairing()
    }

    /// Largest disagreement between `Tr(sigma_gamma(theta_p(delta_s)) p)` and
    /// `Tr(theta_p(delta_s) sigma_{gamma^-1}(p))`, divided by `Tr(p)`.
    pub fn trace_form_defect(&self) -> f64 {
        self.trace_form_defect
    }

    pub fn min_entry(&self) -> f64 {
        self.k.min()
    }

    pub fn row_sum_defect(&self) -> f64 {
        self.k
            .row_iter()
            .map(|r| (r.sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `||K||_{inf -> inf}`, the Lipschitz constant of `phi -> phi_hat` in sup norm.
    pub fn sup_operator_norm(&self) -> f64 {
        self.k
            .row_iter()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

fn check_group(expected: &FiniteGroup, f: &GroupFunction, side: &str) -> Result<(), InductionError> {
    if f.group() != expected {
        return Err(InductionError::GroupMismatch(format!(
            "function lives on {}, coupling's {side} is {}",
            f.group().name(),
            expected.name()
        )));
    }
    Ok(())
}

/// `phi_hat(gamma) = sum_s K(gamma, s) phi(s)`.
pub fn induce_multiplier(k: &InductionKernel, phi: &GroupFunction) -> Result<GroupFunction, InductionError> {
    check_group(k.lambda(), phi, "Lambda")?;
    Ok(GroupFunction::from_fn(k.gamma(), |g| {
        phi.values()
            .iter()
            .enumerate()
            .map(|(s, v)| v * k.k[(g, s)])
            .sum()
    }))
}

/// `(Phi* psi)(s) = sum_gamma psi(gamma) K(gamma, s)`.
pub fn adjoint_on_l1(k: &InductionKernel, psi: &GroupFunction) -> Result<GroupFunction, InductionError> {
    check_group(k.gamma(), psi, "Gamma")?;
    Ok(GroupFunction::from_fn(k.lambda(), |s| {
        psi.values()
            .iter()
            .enumerate()
            .map(|(g, v)| v * k.k[(g, s)])
            .sum()
    }))
}

/// Induced witness vectors in `L^2(M, Tr) (x) C^d`, flattened as
/// `index = basis * d + component`.
#[derive(Debug, Clone)]
pub struct InducedWitnesses {
    base: WitnessPair,
    phi_hat: GroupFunction,
    xi_hat: Vec<DVector<Complex64>>,
    eta_hat: Vec<DVector<Complex64>>,
    sup_xi_hat: f64,
    sup_eta_hat: f64,
    identity_residual: f64,
}

impl InducedWitnesses {
    pub fn base(&self) -> &WitnessPair {
        &self.base
    }

    pub fn phi_hat(&self) -> &GroupFunction {
        &self.phi_hat
    }

    pub fn xi_hat(&self, g: usize) -> &DVector<Complex64> {
        &self.xi_hat[g]
    }

    pub fn eta_hat(&self, g: usize) -> &DVector<Complex64> {
        &self.eta_hat[g]
    }

    pub fn sup_xi_hat(&self) -> f64 {
        self.sup_xi_hat
    }

    pub fn sup_eta_hat(&self) -> f64 {
        self.sup_eta_hat
    }

    /// `max |<xi_hat(g1), eta_hat(g2)> - phi_hat(g2^-1 g1)|`.
    pub fn identity_residual(&self) -> f64 {
        self.identity_residual
    }

    pub fn sup_bounds_hold(&self, tol: f64) -> bool {
        self.sup_xi_hat <= self.base.sup_xi() + tol && self.sup_eta_hat <= self.base.sup_eta() + tol
    }
}

fn lift(
    gamma: &TraceAction,
    g: usize,
    translates: &[AlgebraElement],
    p: &AlgebraElement,
    vs: &[DVector<Complex64>],
    d: usize,
    scale: f64,
) -> DVector<Complex64> {
    let l2 = p.shape().l2_dim();
    let mut out = DVector::zeros(l2 * d);
    for (ps, v) in translates.iter().zip(vs) {
        let coords = gamma.apply(g, ps).mul(p).expect("shape").l2_coordinates();
        for (a, c) in coords.iter().enumerate() {
            if *c != Complex64::new(0.0, 0.0) {
                for (j, vj) in v.iter().enumerate() {
                    out[a * d + j] += c * vj * scale;
                }
            }
        }
    }
    out
}

/// `xi_hat(gamma) = Tr(p)^{-1/2} sum_s sigma_gamma(sigma_s(p)) p (x) xi(s)`, and
/// likewise for `eta_hat`.
pub fn induce_witnesses(k: &InductionKernel, w: &WitnessPair) -> Result<InducedWitnesses, InductionError> {
    if w.group() != k.lambda() {
        return Err(InductionError::GroupMismatch(format!(
            "witnesses live on {}, coupling's Lambda is {}",
            w.group().name(),
            k.lambda().name()
        )));
    }
    let phi = w.represented_function();
    let own = w.residual(&phi);
    if own > STRUCTURAL_TOL {
        return Err(MultiplierError::InvalidWitness(format!("witness residual {own:.3e}")).into());
    }
    let phi_hat = induce_multiplier(k, &phi)?;
    let gamma = k.coupling.gamma_action();
    let lambda = k.coupling.lambda_action();
    let p = &k.domain;
    let scale = 1.0 / p.trace().re.sqrt();
    let translates: Vec<AlgebraElement> = lambda.group().elements().map(|s| lambda.apply(s, p)).collect();
    let d = w.dimension();
    let xi: Vec<_> = lambda.group().elements().map(|s| w.xi(s).clone()).collect();
    let eta: Vec<_> = lambda.group().elements().map(|s| w.eta(s).clone()).collect();
    let g = gamma.group();
    let xi_hat: Vec<_> = g.elements().map(|x| lift(gamma, x, &translates, p, &xi, d, scale)).collect();
    let eta_hat: Vec<_> = g.elements().map(|x| lift(gamma, x, &translates, p, &eta, d, scale)).collect();
    let mut residual: f64 = 0.0;
    for g1 in g.elements() {
        for g2 in g.elements() {
            let ip: Complex64 = xi_hat[g1].iter().zip(eta_hat[g2].iter()).map(|(a, b)| a * b.conj()).sum();
            residual = residual.max((ip - phi_hat.at(g.mul(g.inv(g2), g1))).norm());
        }
    }
    let sup = |vs: &[DVector<Complex64>]| vs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(InducedWitnesses {
        base: w.clone(),
        phi_hat,
        sup_xi_hat: sup(&xi_hat),
        sup_eta_hat: sup(&eta_hat),
        xi_hat,
        eta_hat,
        identity_residual: residual,
    })
}

/// A single asserted relation, stated as `value <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    fn failed(name: &str) -> Self {
        Self {
            name: name.into(),
            value: f64::NAN,
            threshold: f64::NAN,
            pass: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub coupling: String,
    pub pairing: Option<Vec<usize>>,
    pub tol: f64,
    pub phi_hat: Vec<[f64; 2]>,
    pub b2_phi: Option<f64>,
    pub b2_phi_hat: Option<f64>,
    pub contractivity_margin: Option<f64>,
    pub min_gram_phi: f64,
    pub min_gram_phi_hat: f64,
    pub phi_e: [f64; 2],
    pub phi_hat_e: [f64; 2],
    pub checks: Vec<Check>,
    pub solver_failures: Vec<String>,
    pub skipped: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Runs every check on `phi` through the kernel. Solver trouble becomes a
/// failed check plus a `solver_failures` entry.
pub fn verify_lemma(
    k: &InductionKernel,
    phi: &GroupFunction,
    tol: f64,
    sdp: &SdpOptions,
) -> Result<VerificationReport, InductionError> {
    let phi_hat = induce_multiplier(k, phi)?;
    let mut checks = Vec::new();
    let mut failures = Vec::new();

    let mut b2 = |f: &GroupFunction, what: &str| match b2_norm_certified(f, sdp) {
        Ok(c) => Some(c.value),
        Err(e) => {
            failures.push(format!("b2 norm of {what}: {e}"));
            None
        }
    };
    let b2_phi = b2(phi, "phi");
    let b2_phi_hat = b2(&phi_hat, "phi_hat");
    let margin = match (b2_phi, b2_phi_hat) {
        (Some(a), Some(b)) => {
            checks.push(Check::at_most("b2_contractivity", b - a, tol));
            Some(a - b)
        }
        _ => {
            checks.push(Check::failed("b2_contractivity"));
            None
        }
    };

    let min_gram_phi = min_gram_eigenvalue(phi);
    let min_gram_phi_hat = min_gram_eigenvalue(&phi_hat);
    if min_gram_phi >= -tol {
        checks.push(Check::at_most("positive_definite_preserved", -min_gram_phi_hat, tol));
    }

    let (e, eh) = (phi.at(0), phi_hat.at(0));
    if (e - 1.0).norm() <= 1e-12 {
        checks.push(Check::at_most("normalization", (eh - 1.0).norm(), 1e-12));
    }
    checks.push(Check::at_most(
        "sup_norm_bound",
        phi_hat.sup_norm() - phi.sup_norm(),
        1e-12,
    ));

    let mut q_worst = f64::NEG_INFINITY;
    let mut q_ok = true;
    for g in k.gamma().elements() {
        let psi = GroupFunction::delta(k.gamma(), g);
        let image = adjoint_on_l1(k, &psi)?;
        match (q_norm_certified(&image, sdp), q_norm_certified(&psi, sdp)) {
            (Ok(a), Ok(b)) => q_worst = q_worst.max(a.value - b.value),
            (a, b) => {
                q_ok = false;
                for e in [a.err(), b.err()].into_iter().flatten() {
                    failures.push(format!("q norm at basis vector {g}: {e}"));
                }
            }
        }
    }
    checks.push(if q_ok {
        Check::at_most("q_adjoint_contractivity", q_worst, tol)
    } else {
        Check::failed("q_adjoint_contractivity")
    });

    checks.push(Check::at_most("koopman_coefficient", koopman_coefficient_defect(k, phi, &phi_hat), tol));

    Ok(VerificationReport {
        coupling: k.coupling.label().to_string(),
        pairing: k.pairing().map(<[usize]>::to_vec),
        tol,
        phi_hat: phi_hat.values().iter().copied().map(pair).collect(),
        b2_phi,
        b2_phi_hat,
        contractivity_margin: margin,
        min_gram_phi,
        min_gram_phi_hat,
        phi_e: pair(e),
        phi_hat_e: pair(eh),
        checks,
        solver_failures: failures,
        skipped: vec!["c0 preservation under mixing actions: finite groups admit no mixing actions".into()],
    })
}

/// `max_gamma |phi_hat(gamma) - <U_gamma theta_p(phi), p>_{L^2} / Tr(p)|` with
/// `U` the Koopman representation of the `Gamma`-action.
pub fn koopman_coefficient_defect(k: &InductionKernel, phi: &GroupFunction, phi_hat: &GroupFunction) -> f64 {
    let p = &k.domain;
    let theta = DVector::from_vec(theta_unchecked(k.coupling.lambda_action(), p, phi).l2_coordinates());
    let pv = DVector::from_vec(p.l2_coordinates());
    let tr = p.trace().re;
    let u = koopman(k.coupling.gamma_action());
    k.gamma()
        .elements()
        .map(|g| {
            let moved = u.get(g) * &theta;
            let c: Complex64 = moved.iter().zip(pv.iter()).map(|(a, b)| a * b.conj()).sum();
            (phi_hat.at(g) - c / tr).norm()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{build_diagonal_coupling, build_me_product_coupling};
    use crate::group::{cyclic, symmetric};

    #[test]
    fn diagonal_kernel_is_identity() {
        let k = induction_kernel(&build_diagonal_coupling(&symmetric(3).unwrap()).unwrap());
        assert!((k.matrix() - DMatrix::identity(6, 6)).amax() < 1e-12);
        assert!(k.trace_form_defect() < 1e-12);
    }

    #[test]
    fn me_kernel_collapses_to_identity_element() {
        let k = induction_kernel(&build_me_product_coupling(&cyclic(3).unwrap(), &cyclic(5).unwrap()).unwrap());
        for g in 0..3 {
            assert_eq!(k.row(g), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn group_mismatch_is_reported() {
        let k = induction_kernel(&build_diagonal_coupling(&cyclic(3).unwrap()).unwrap());
        let wrong = GroupFunction::delta(&cyclic(4).unwrap(), 0);
        assert!(matches!(induce_multiplier(&k, &wrong), Err(InductionError::GroupMismatch(_))));
        assert!(matches!(adjoint_on_l1(&k, &wrong), Err(InductionError::GroupMismatch(_))));
    }
}
