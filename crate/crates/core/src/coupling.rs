//! Von Neumann couplings: commuting trace-preserving actions of two groups on
//! one algebra, each with a finite-trace fundamental domain.

use num_complex::Complex64;
use num_rational::Ratio;

use crate::action::{is_fundamental_domain, TraceAction};
use crate::error::CouplingError;
use crate::group::{character_table, FiniteGroup};
use crate::vna::{AlgebraElement, AlgebraShape, CMatrix};
use crate::STRUCTURAL_TOL;

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingRecord {
    label: String,
    gamma: TraceAction,
    lambda: TraceAction,
    q: AlgebraElement,
    p: AlgebraElement,
    pairing: Option<Vec<usize>>,
}

impl CouplingRecord {
    /// Validates: same algebra, commuting actions, `q` and `p` fundamental
    /// domains for the `Gamma`- and `Lambda`-actions with positive trace.
    pub fn new(
        label: impl Into<String>,
        gamma: TraceAction,
        lambda: TraceAction,
        q: AlgebraElement,
        p: AlgebraElement,
    ) -> Result<Self, CouplingError> {
        if gamma.shape() != lambda.shape() {
            return Err(CouplingError::InvalidCoupling("actions live on different algebras".into()));
        }
        let rec = Self {
            label: label.into(),
            gamma,
            lambda,
            q,
            p,
            pairing: None,
        };
        let comm = rec.commutation_defect();
        if comm > STRUCTURAL_TOL {
            return Err(CouplingError::InvalidCoupling(format!(
                "actions do not commute (defect {comm:.3e})"
            )));
        }
        if !is_fundamental_domain(&rec.gamma, &rec.q, STRUCTURAL_TOL)? {
            return Err(CouplingError::NotFundamentalDomain("q for the Gamma-action".into()));
        }
        if !is_fundamental_domain(&rec.lambda, &rec.p, STRUCTURAL_TOL)? {
            return Err(CouplingError::NotFundamentalDomain("p for the Lambda-action".into()));
        }
        for (name, x) in [("q", &rec.q), ("p", &rec.p)] {
            let t = x.trace();
            if !(t.re > 0.0 && t.re.is_finite()) {
                return Err(CouplingError::InvalidCoupling(format!("Tr({name}) = {t} is not positive")));
            }
        }
        Ok(rec)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn gamma_action(&self) -> &TraceAction {
        &self.gamma
    }

    pub fn lambda_action(&self) -> &TraceAction {
        &self.lambda
    }

    pub fn gamma(&self) -> &FiniteGroup {
        self.gamma.group()
    }

    pub fn lambda(&self) -> &FiniteGroup {
        self.lambda.group()
    }

    pub fn shape(&self) -> &AlgebraShape {
        self.gamma.shape()
    }

    pub fn q(&self) -> &AlgebraElement {
        &self.q
    }

    pub fn p(&self) -> &AlgebraElement {
        &self.p
    }

    /// Character pairing used by the W* construction, if any.
    pub fn pairing(&self) -> Option<&[usize]> {
        self.pairing.as_deref()
    }

    /// `max || sigma^G_g sigma^L_s (x) - sigma^L_s sigma^G_g (x) ||` over matrix units.
    pub fn commutation_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for x in self.gamma.matrix_units() {
            for g in self.gamma().elements() {
                let gx = self.gamma.apply(g, &x);
                for s in self.lambda().elements() {
                    let a = self.gamma.apply(g, &self.lambda.apply(s, &x));
                    let b = self.lambda.apply(s, &gx);
                    worst = worst.max(a.sub(&b).expect("shape").max_abs());
                }
            }
        }
        worst
    }
}

/// `[Gamma : Lambda]_M = Tr(q) / Tr(p)`.
pub fn coupling_index(c: &CouplingRecord) -> f64 {
    c.q.trace().re / c.p.trace().re
}

/// Exact index for couplings whose fundamental domains are diagonal 0/1
/// matrices on integer-weighted blocks.
pub fn exact_index(c: &CouplingRecord) -> Option<Ratio<i64>> {
    fn exact_trace(x: &AlgebraElement) -> Option<i64> {
        let mut acc = 0i64;
        for (m, b) in x.blocks().iter().zip(x.shape().blocks()) {
            if b.weight.fract() != 0.0 || b.weight > i64::MAX as f64 {
                return None;
            }
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    let z = m[(i, j)];
                    let allowed = if i == j {
                        z == Complex64::new(0.0, 0.0) || z == Complex64::new(1.0, 0.0)
                    } else {
                        z == Complex64::new(0.0, 0.0)
                    };
                    if !allowed {
                        return None;
                    }
                }
                if m[(i, i)].re == 1.0 {
                    acc += b.weight as i64;
                }
            }
        }
        Some(acc)
    }
    Some(Ratio::new(exact_trace(&c.q)?, exact_trace(&c.p)?))
}

fn indicator(shape: &AlgebraShape, n: usize, member: impl Fn(usize) -> bool) -> AlgebraElement {
    let vals: Vec<Complex64> = (0..n)
        .map(|x| Complex64::new(if member(x) { 1.0 } else { 0.0 }, 0.0))
        .collect();
    AlgebraElement::from_diagonal(shape, &vals).expect("diagonal shape")
}

/// Measure-equivalence coupling on `Omega = G x H` with counting measure:
/// `G` translates the first coordinate, `H` the second,
/// `q = 1_{{e} x H}` and `p = 1_{G x {e}}`.
pub fn build_me_product_coupling(g: &FiniteGroup, h: &FiniteGroup) -> Result<CouplingRecord, CouplingError> {
    let (ng, nh) = (g.order(), h.order());
    let shape = AlgebraShape::diagonal(ng * nh)?;
    let gamma_perms = g
        .elements()
        .map(|a| (0..ng * nh).map(|x| g.mul(a, x / nh) * nh + x % nh).collect())
        .collect();
    let lambda_perms = h
        .elements()
        .map(|s| (0..ng * nh).map(|x| (x / nh) * nh + h.mul(s, x % nh)).collect())
        .collect();
    let gamma = TraceAction::by_permutation(g.clone(), shape.clone(), gamma_perms)?;
    let lambda = TraceAction::by_permutation(h.clone(), shape.clone(), lambda_perms)?;
    let q = indicator(&shape, ng * nh, |x| x / nh == 0);
    let p = indicator(&shape, ng * nh, |x| x % nh == 0);
    CouplingRecord::new(format!("me_product({}, {})", g.name(), h.name()), gamma, lambda, q, p)
}

/// `G` acting on `l^inf(G)` by left translation `f(g^-1 x)` and by right
/// translation `f(x t)`, with `q = p = 1_{e}`.
pub fn build_diagonal_coupling(g: &FiniteGroup) -> Result<CouplingRecord, CouplingError> {
    let n = g.order();
    let shape = AlgebraShape::diagonal(n)?;
    let left = g.elements().map(|a| g.elements().map(|x| g.mul(a, x)).collect()).collect();
    // sigma_t(f)(x) = f(x t): block x is carried to x t^-1.
    let right = g
        .elements()
        .map(|t| g.elements().map(|x| g.mul(x, g.inv(t))).collect())
        .collect();
    let gamma = TraceAction::by_permutation(g.clone(), shape.clone(), left)?;
    let lambda = TraceAction::by_permutation(g.clone(), shape.clone(), right)?;
    let e = indicator(&shape, n, |x| x == 0);
    CouplingRecord::new(format!("diagonal({})", g.name()), gamma, lambda, e.clone(), e)
}

/// Right regular representation `rho_t delta_x = delta_{x t^-1}` on `l^2(H)`.
pub fn right_regular(h: &FiniteGroup, t: usize) -> CMatrix {
    let n = h.order();
    let mut m = CMatrix::zeros(n, n);
    for x in h.elements() {
        m[(h.mul(x, h.inv(t)), x)] = Complex64::new(1.0, 0.0);
    }
    m
}

/// W*-coupling on `B(l^2 H)` for abelian `G`, `H` of equal order.
///
/// `H` acts by `Ad(rho_t)`; `G` acts by `Ad(theta(lambda_g))` with
/// `theta(lambda_g) = sum_j chi_j(g) P_{pairing[j]}` and
/// `P_eta = (1/n) sum_t eta(t) rho_t`. Both fundamental domains are the
/// rank-one projection onto `C delta_e`. The default pairing is the identity
/// on lexicographically ordered characters.
pub fn build_wstar_coupling(
    g: &FiniteGroup,
    h: &FiniteGroup,
    pairing: Option<&[usize]>,
) -> Result<CouplingRecord, CouplingError> {
    let n = g.order();
    if h.order() != n {
        return Err(CouplingError::InvalidCoupling(format!(
            "groups have different orders {} and {}",
            n,
            h.order()
        )));
    }
    let chi_g = character_table(g)?;
    let chi_h = character_table(h)?;
    let pairing: Vec<usize> = match pairing {
        Some(p) => p.to_vec(),
        None => (0..n).collect(),
    };
    if pairing.len() != n {
        return Err(CouplingError::InvalidPairing(format!("length {} != {n}", pairing.len())));
    }
    let mut seen = vec![false; n];
    for &j in &pairing {
        if j >= n || std::mem::replace(&mut seen[j], true) {
            return Err(CouplingError::InvalidPairing("not a bijection".into()));
        }
    }
    let rho: Vec<CMatrix> = h.elements().map(|t| right_regular(h, t)).collect();
    let nf = n as f64;
    let projections: Vec<CMatrix> = (0..n)
        .map(|k| {
            let mut acc = CMatrix::zeros(n, n);
            for t in h.elements() {
                acc += &rho[t] * (chi_h.value(k, t) / nf);
            }
            acc
        })
        .collect();
    let theta: Vec<CMatrix> = g
        .elements()
        .map(|a| {
            let mut acc = CMatrix::zeros(n, n);
            for (j, &k) in pairing.iter().enumerate() {
                acc += &projections[k] * chi_g.value(j, a);
            }
            acc
        })
        .collect();
    let shape = AlgebraShape::matrix(n, 1.0)?;
    let gamma = TraceAction::inner(g.clone(), shape.clone(), theta)?;
    let lambda = TraceAction::inner(h.clone(), shape.clone(), rho)?;
    let e = AlgebraElement::matrix_unit(&shape, 0, 0, 0);
    let mut rec = CouplingRecord::new(format!("wstar({}, {})", g.name(), h.name()), gamma, lambda, e.clone(), e)?;
    rec.pairing = Some(pairing);
    Ok(rec)
}

/// Unitary `theta(lambda_g)` implementing the Gamma-action of a W*-coupling.
pub fn wstar_unitary(c: &CouplingRecord, g: usize) -> Result<&CMatrix, CouplingError> {
    if c.pairing.is_none() {
        return Err(CouplingError::InvalidCoupling("not a W*-coupling".into()));
    }
    Ok(c.gamma.unitary(g, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{cyclic, direct_product, symmetric};

    fn klein() -> FiniteGroup {
        direct_product(&[cyclic(2).unwrap(), cyclic(2).unwrap()]).unwrap()
    }

    #[test]
    fn me_product_indices() {
        let t = cyclic(1).unwrap();
        let c = build_me_product_coupling(&t, &t).unwrap();
        assert_eq!(c.q(), &AlgebraElement::identity(c.shape()));
        assert_eq!(c.p(), c.q());
        let c = build_me_product_coupling(&cyclic(3).unwrap(), &cyclic(5).unwrap()).unwrap();
        assert_eq!(c.shape().num_blocks(), 15);
        assert_eq!(exact_index(&c), Some(Ratio::new(5, 3)));
        assert!((coupling_index(&c) - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_coupling_on_s3() {
        let c = build_diagonal_coupling(&symmetric(3).unwrap()).unwrap();
        assert!(c.commutation_defect() < 1e-15);
        assert_eq!(exact_index(&c), Some(Ratio::new(1, 1)));
    }

    #[test]
    fn wstar_small_cases() {
        let z2 = cyclic(2).unwrap();
        let c = build_wstar_coupling(&z2, &z2, None).unwrap();
        assert_eq!(exact_index(&c), Some(Ratio::new(1, 1)));
        // Z2 vs Z2: theta(lambda_1) = P_0 - P_1 = rho_1, so the actions coincide.
        assert!((wstar_unitary(&c, 1).unwrap() - right_regular(&z2, 1)).iter().all(|z| z.norm() < 1e-15));

        let c = build_wstar_coupling(&cyclic(4).unwrap(), &klein(), None).unwrap();
        assert_eq!(c.pairing(), Some(&[0, 1, 2, 3][..]));
        assert_eq!(coupling_index(&c), 1.0);
    }

    #[test]
    fn wstar_theta_is_a_unitary_homomorphism() {
        let g = cyclic(4).unwrap();
        let c = build_wstar_coupling(&g, &klein(), Some(&[0, 2, 1, 3])).unwrap();
        for a in g.elements() {
            let u = wstar_unitary(&c, a).unwrap();
            assert!((u.adjoint() * u - CMatrix::identity(4, 4)).iter().all(|z| z.norm() < 1e-12));
            for b in g.elements() {
                let prod = u * wstar_unitary(&c, b).unwrap();
                let target = wstar_unitary(&c, g.mul(a, b)).unwrap();
                assert!((prod - target).iter().all(|z| z.norm() < 1e-12));
            }
        }
    }

    #[test]
    fn wstar_rejections() {
        let z4 = cyclic(4).unwrap();
        assert!(matches!(
            build_wstar_coupling(&z4, &cyclic(3).unwrap(), None),
            Err(CouplingError::InvalidCoupling(_))
        ));
        assert!(matches!(
            build_wstar_coupling(&symmetric(3).unwrap(), &cyclic(6).unwrap(), None),
            Err(CouplingError::Group(crate::error::GroupError::NonAbelian(_)))
        ));
        assert!(matches!(
            build_wstar_coupling(&z4, &klein(), Some(&[0, 1, 1, 3])),
            Err(CouplingError::InvalidPairing(_))
        ));
    }

    #[test]
    fn record_rejects_non_commuting_actions() {
        // Left translation twice does not commute on a nonabelian group.
        let g = symmetric(3).unwrap();
        let shape = AlgebraShape::diagonal(6).unwrap();
        let left: Vec<Vec<usize>> = g.elements().map(|a| g.elements().map(|x| g.mul(a, x)).collect()).collect();
        let a = TraceAction::by_permutation(g.clone(), shape.clone(), left.clone()).unwrap();
        let b = TraceAction::by_permutation(g, shape.clone(), left).unwrap();
        let e = AlgebraElement::matrix_unit(&shape, 0, 0, 0);
        assert!(matches!(
            CouplingRecord::new("bad", a, b, e.clone(), e),
            Err(CouplingError::InvalidCoupling(_))
        ));
    }
}
