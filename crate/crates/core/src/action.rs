//! Trace-preserving actions on multi-matrix algebras, fundamental domains, and
//! the embedding `theta_p(f) = sum_s f(s) sigma_s(p)`.

use num_complex::Complex64;

use crate::error::CouplingError;
use crate::group::{Element, FiniteGroup, GroupFunction};
use crate::vna::{AlgebraElement, AlgebraShape, CMatrix};
use crate::STRUCTURAL_TOL;

/// `sigma_g(x)_{perm_g(k)} = U_{g, perm_g(k)} x_k U_{g, perm_g(k)}*`.
///
/// `perms[g][k]` is the block that block `k` is carried to and
/// `unitaries[g][k]` the unitary applied on arrival at block `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceAction {
    group: FiniteGroup,
    shape: AlgebraShape,
    perms: Vec<Vec<usize>>,
    unitaries: Vec<Vec<CMatrix>>,
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl TraceAction {
    /// Validates unitarity, weight-preserving permutations, `sigma_e = id` and
    /// `sigma_g sigma_h = sigma_gh` as maps on matrix units.
    pub fn new(
        group: FiniteGroup,
        shape: AlgebraShape,
        perms: Vec<Vec<usize>>,
        unitaries: Vec<Vec<CMatrix>>,
    ) -> Result<Self, CouplingError> {
        shape.validate()?;
        let n = group.order();
        let nb = shape.num_blocks();
        if perms.len() != n || unitaries.len() != n {
            return Err(CouplingError::InvalidAction(format!(
                "expected data for {n} group elements, got {} permutations and {} unitary lists",
                perms.len(),
                unitaries.len()
            )));
        }
        for g in 0..n {
            let perm = &perms[g];
            if perm.len() != nb {
                return Err(CouplingError::InvalidAction(format!("permutation {g} has wrong length")));
            }
            let mut hit = vec![false; nb];
            for (k, &t) in perm.iter().enumerate() {
                if t >= nb || std::mem::replace(&mut hit[t], true) {
                    return Err(CouplingError::InvalidAction(format!("element {g} does not permute blocks")));
                }
                if shape.blocks()[k] != shape.blocks()[t] {
                    return Err(CouplingError::InvalidAction(format!(
                        "element {g} moves block {k} onto block {t} of different dimension or weight"
                    )));
                }
            }
            if unitaries[g].len() != nb {
                return Err(CouplingError::InvalidAction(format!("element {g} has wrong number of unitaries")));
            }
            for (k, u) in unitaries[g].iter().enumerate() {
                let d = shape.blocks()[k].dim;
                if u.nrows() != d || u.ncols() != d {
                    return Err(CouplingError::InvalidAction(format!("unitary ({g}, {k}) has wrong size")));
                }
                let defect = max_abs(&(u.adjoint() * u - CMatrix::identity(d, d)));
                if defect > STRUCTURAL_TOL {
                    return Err(CouplingError::InvalidAction(format!(
                        "U({g}, {k}) is not unitary (defect {defect:.3e})"
                    )));
                }
            }
        }
        let action = Self {
            group,
            shape,
            perms,
            unitaries,
        };
        let hom = action.homomorphism_defect();
        if hom > STRUCTURAL_TOL {
            return Err(CouplingError::InvalidAction(format!(
                "not a homomorphism into Aut(M) (defect {hom:.3e})"
            )));
        }
        let units = action.matrix_units();
        for g in action.group.elements() {
            for x in &units {
                let d = (action.apply(g, x).trace() - x.trace()).norm();
                if d > STRUCTURAL_TOL {
                    return Err(CouplingError::InvalidAction(format!("element {g} does not preserve the trace")));
                }
            }
        }
        Ok(action)
    }

    /// Action by block permutations only (all unitaries are identities).
    pub fn by_permutation(group: FiniteGroup, shape: AlgebraShape, perms: Vec<Vec<usize>>) -> Result<Self, CouplingError> {
        let unitaries = (0..group.order())
            .map(|_| shape.blocks().iter().map(|b| CMatrix::identity(b.dim, b.dim)).collect())
            .collect();
        Self::new(group, shape, perms, unitaries)
    }

    /// Action by inner automorphisms `Ad(U_g)` of a single matrix block.
    pub fn inner(group: FiniteGroup, shape: AlgebraShape, unitaries: Vec<CMatrix>) -> Result<Self, CouplingError> {
        if shape.num_blocks() != 1 {
            return Err(CouplingError::InvalidAction("inner actions need a single block".into()));
        }
        let n = group.order();
        Self::new(group, shape, vec![vec![0]; n], unitaries.into_iter().map(|u| vec![u]).collect())
    }

    pub fn trivial(group: FiniteGroup, shape: AlgebraShape) -> Result<Self, CouplingError> {
        let perms = vec![(0..shape.num_blocks()).collect(); group.order()];
        Self::by_permutation(group, shape, perms)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn perm(&self, g: Element) -> &[usize] {
        &self.perms[g]
    }

    pub fn unitary(&self, g: Element, k: usize) -> &CMatrix {
        &self.unitaries[g][k]
    }

    pub fn apply(&self, g: Element, x: &AlgebraElement) -> AlgebraElement {
        debug_assert_eq!(x.shape(), &self.shape);
        let mut out = AlgebraElement::zero(&self.shape);
        for (k, xk) in x.blocks().iter().enumerate() {
            let t = self.perms[g][k];
            let u = &self.unitaries[g][t];
            out.blocks_mut()[t] = if u.nrows() == 1 {
                xk * (u[(0, 0)] * u[(0, 0)].conj())
            } else {
                u * xk * u.adjoint()
            };
        }
        out
    }

    pub(crate) fn matrix_units(&self) -> Vec<AlgebraElement> {
        let mut out = Vec::with_capacity(self.shape.l2_dim());
        for (k, b) in self.shape.blocks().iter().enumerate() {
            for i in 0..b.dim {
                for j in 0..b.dim {
                    out.push(AlgebraElement::matrix_unit(&self.shape, k, i, j));
                }
            }
        }
        out
    }

    /// Largest entrywise deviation of `sigma_e` from the identity and of
    /// `sigma_g sigma_h` from `sigma_gh` over matrix units.
    pub fn homomorphism_defect(&self) -> f64 {
        let units = self.matrix_units();
        let mut worst: f64 = 0.0;
        for x in &units {
            worst = worst.max(self.apply(0, x).sub(x).expect("shape").max_abs());
        }
        let images: Vec<Vec<AlgebraElement>> = self
            .group
            .elements()
            .map(|h| units.iter().map(|x| self.apply(h, x)).collect())
            .collect();
        for g in self.group.elements() {
            for h in self.group.elements() {
                let gh = self.group.mul(g, h);
                for (hx, ghx) in images[h].iter().zip(&images[gh]) {
                    worst = worst.max(self.apply(g, hx).sub(ghx).expect("shape").max_abs());
                }
            }
        }
        worst
    }

    /// `sum_s sigma_s(p)`.
    pub fn orbit_sum(&self, p: &AlgebraElement) -> AlgebraElement {
        let mut acc = AlgebraElement::zero(&self.shape);
        for s in self.group.elements() {
            acc.axpy(Complex64::new(1.0, 0.0), &self.apply(s, p));
        }
        acc
    }
}

fn check_shape(action: &TraceAction, p: &AlgebraElement) -> Result<(), CouplingError> {
    if p.shape() != action.shape() {
        return Err(crate::error::AlgebraError::ShapeMismatch("element does not live on the action's algebra".into()).into());
    }
    Ok(())
}

/// True iff `p` is a projection whose orbit sums to the identity within `tol`.
pub fn is_fundamental_domain(action: &TraceAction, p: &AlgebraElement, tol: f64) -> Result<bool, CouplingError> {
    check_shape(action, p)?;
    if !p.is_projection(tol) {
        return Ok(false);
    }
    let defect = action
        .orbit_sum(p)
        .sub(&AlgebraElement::identity(action.shape()))
        .expect("shape")
        .op_norm();
    Ok(defect <= tol)
}

fn require_fundamental_domain(action: &TraceAction, p: &AlgebraElement) -> Result<(), CouplingError> {
    if is_fundamental_domain(action, p, STRUCTURAL_TOL)? {
        Ok(())
    } else {
        Err(CouplingError::NotFundamentalDomain(format!(
            "orbit of p under {} is not a partition of unity",
            action.group().name()
        )))
    }
}

/// `theta_p(f) = sum_s f(s) sigma_s(p)`.
pub fn theta_embedding(action: &TraceAction, p: &AlgebraElement, f: &GroupFunction) -> Result<AlgebraElement, CouplingError> {
    require_fundamental_domain(action, p)?;
    if f.group() != action.group() {
        return Err(crate::error::GroupError::GroupMismatch.into());
    }
    Ok(theta_unchecked(action, p, f))
}

pub(crate) fn theta_unchecked(action: &TraceAction, p: &AlgebraElement, f: &GroupFunction) -> AlgebraElement {
    let mut acc = AlgebraElement::zero(action.shape());
    for s in action.group().elements() {
        if f.at(s) != Complex64::new(0.0, 0.0) {
            acc.axpy(f.at(s), &action.apply(s, p));
        }
    }
    acc
}

/// `max_{l, u} || sigma_l(theta_p(delta_u)) - theta_p(L_l delta_u) ||`.
pub fn equivariance_defect(action: &TraceAction, p: &AlgebraElement) -> Result<f64, CouplingError> {
    require_fundamental_domain(action, p)?;
    let g = action.group();
    let mut worst: f64 = 0.0;
    for l in g.elements() {
        for u in g.elements() {
            let basis = GroupFunction::delta(g, u);
            let lhs = action.apply(l, &theta_unchecked(action, p, &basis));
            let rhs = theta_unchecked(action, p, &basis.left_translate(l));
            worst = worst.max(lhs.sub(&rhs).expect("shape").op_norm());
        }
    }
    Ok(worst)
}

/// Koopman representation: the unitary `a -> sigma_g(a)` on `L^2(M, Tr)` for
/// each group element, in the orthonormal matrix-unit basis.
#[derive(Debug, Clone)]
pub struct KoopmanMatrix {
    matrices: Vec<CMatrix>,
}

impl KoopmanMatrix {
    pub fn get(&self, g: Element) -> &CMatrix {
        &self.matrices[g]
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    /// `g -> trace(sigma0_g)`.
    pub fn character(&self) -> Vec<Complex64> {
        self.matrices.iter().map(CMatrix::trace).collect()
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.matrices
            .iter()
            .map(|m| max_abs(&(m.adjoint() * m - CMatrix::identity(m.nrows(), m.ncols()))))
            .fold(0.0, f64::max)
    }

    pub fn homomorphism_defect(&self, group: &FiniteGroup) -> f64 {
        let mut worst: f64 = 0.0;
        for g in group.elements() {
            for h in group.elements() {
                let d = &self.matrices[g] * &self.matrices[h] - &self.matrices[group.mul(g, h)];
                worst = worst.max(max_abs(&d));
            }
        }
        worst
    }

    /// `max || L_{sigma_g(x)} - sigma0_g L_x sigma0_{g^-1} ||` over matrix units `x`,
    /// with `L_x` the standard (left multiplication) representation.
    pub fn implementation_defect(&self, action: &TraceAction) -> f64 {
        let g = action.group();
        let units = action.matrix_units();
        let mut worst: f64 = 0.0;
        for s in g.elements() {
            let u = &self.matrices[s];
            let ui = &self.matrices[g.inv(s)];
            for x in &units {
                let lhs = action.apply(s, x).left_multiplication();
                let rhs = u * x.left_multiplication() * ui;
                worst = worst.max(max_abs(&(lhs - rhs)));
            }
        }
        worst
    }
}

pub fn koopman(action: &TraceAction) -> KoopmanMatrix {
    let shape = action.shape();
    let dim = shape.l2_dim();
    let basis: Vec<AlgebraElement> = (0..dim)
        .map(|i| {
            let mut e = vec![Complex64::new(0.0, 0.0); dim];
            e[i] = Complex64::new(1.0, 0.0);
            AlgebraElement::from_l2_coordinates(shape, &e).expect("dimension")
        })
        .collect();
    let matrices = action
        .group()
        .elements()
        .map(|g| {
            let mut m = CMatrix::zeros(dim, dim);
            for (col, b) in basis.iter().enumerate() {
                for (row, v) in action.apply(g, b).l2_coordinates().into_iter().enumerate() {
                    m[(row, col)] = v;
                }
            }
            m
        })
        .collect();
    KoopmanMatrix { matrices }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{cyclic, symmetric};

    fn translation(n: usize) -> TraceAction {
        let g = cyclic(n).unwrap();
        let perms = (0..n).map(|a| (0..n).map(|x| (a + x) % n).collect()).collect();
        TraceAction::by_permutation(g, AlgebraShape::diagonal(n).unwrap(), perms).unwrap()
    }

    fn indicator(n: usize, set: &[usize]) -> AlgebraElement {
        let vals: Vec<Complex64> = (0..n)
            .map(|x| Complex64::new(if set.contains(&x) { 1.0 } else { 0.0 }, 0.0))
            .collect();
        AlgebraElement::from_diagonal(&AlgebraShape::diagonal(n).unwrap(), &vals).unwrap()
    }

    #[test]
    fn trivial_action_domain() {
        let shape = AlgebraShape::matrix(1, 1.0).unwrap();
        let a = TraceAction::trivial(cyclic(1).unwrap(), shape.clone()).unwrap();
        assert!(is_fundamental_domain(&a, &AlgebraElement::identity(&shape), 1e-10).unwrap());
        assert_eq!(equivariance_defect(&a, &AlgebraElement::identity(&shape)).unwrap(), 0.0);
        let k = koopman(&a);
        assert_eq!(k.get(0), &CMatrix::identity(1, 1));
    }

    #[test]
    fn translation_domains() {
        let a = translation(5);
        assert!(is_fundamental_domain(&a, &indicator(5, &[0]), 1e-10).unwrap());
        assert!(!is_fundamental_domain(&a, &indicator(5, &[0, 1]), 1e-10).unwrap());
        assert!(theta_embedding(&a, &indicator(5, &[0, 1]), &GroupFunction::delta(a.group(), 0)).is_err());
    }

    #[test]
    fn theta_basics() {
        let a = translation(4);
        let p = indicator(4, &[0]);
        let g = a.group().clone();
        assert_eq!(theta_embedding(&a, &p, &GroupFunction::delta(&g, 0)).unwrap(), p);
        let one = theta_embedding(&a, &p, &GroupFunction::constant(&g, Complex64::new(1.0, 0.0))).unwrap();
        assert_eq!(one, AlgebraElement::identity(a.shape()));
    }

    #[test]
    fn rejects_non_unitary_and_non_homomorphic_data() {
        let g = cyclic(2).unwrap();
        let shape = AlgebraShape::matrix(2, 1.0).unwrap();
        let bad = CMatrix::identity(2, 2) * Complex64::new(2.0, 0.0);
        assert!(TraceAction::inner(g.clone(), shape.clone(), vec![CMatrix::identity(2, 2), bad]).is_err());
        // Ad(diag(1, i)) squares to Ad(diag(1, -1)), which is not the identity map.
        let u = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]));
        assert!(TraceAction::inner(g.clone(), shape.clone(), vec![CMatrix::identity(2, 2), u]).is_err());
        // Phases are gauge: -I implements the identity automorphism.
        let minus = CMatrix::identity(2, 2) * Complex64::new(-1.0, 0.0);
        assert!(TraceAction::inner(g, shape, vec![CMatrix::identity(2, 2), minus]).is_ok());
    }

    #[test]
    fn block_permutations_must_preserve_weights() {
        let g = cyclic(2).unwrap();
        let shape = AlgebraShape::new(vec![
            crate::vna::Block { dim: 1, weight: 1.0 },
            crate::vna::Block { dim: 1, weight: 2.0 },
        ])
        .unwrap();
        assert!(TraceAction::by_permutation(g, shape, vec![vec![0, 1], vec![1, 0]]).is_err());
    }

    #[test]
    fn swap_koopman_is_permutation() {
        let a = translation(2);
        let k = koopman(&a);
        let swap = CMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        );
        assert_eq!(k.get(1), &swap);
    }

    #[test]
    fn koopman_of_s3_translation() {
        let g = symmetric(3).unwrap();
        let perms = g.elements().map(|a| g.elements().map(|x| g.mul(a, x)).collect()).collect();
        let a = TraceAction::by_permutation(g.clone(), AlgebraShape::diagonal(6).unwrap(), perms).unwrap();
        let k = koopman(&a);
        assert!(k.unitarity_defect() < 1e-12);
        assert!(k.homomorphism_defect(&g) < 1e-12);
        assert!(k.implementation_defect(&a) < 1e-12);
        let chi = k.character();
        assert_eq!(chi[0], Complex64::new(6.0, 0.0));
        assert!(chi[1..].iter().all(|z| z.norm() < 1e-12));
    }
}
