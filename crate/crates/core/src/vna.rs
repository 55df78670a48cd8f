//! Finite-dimensional von Neumann algebras `M = (+)_k M_{d_k}(C)` with the
//! faithful trace `Tr(x) = sum_k w_k tr(x_k)`, and the Hilbert space
//! `L^2(M, Tr)` with `<a, b> = Tr(b* a)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::AlgebraError;

pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    pub dim: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraShape {
    blocks: Vec<Block>,
}

impl AlgebraShape {
    pub fn new(blocks: Vec<Block>) -> Result<Self, AlgebraError> {
        if blocks.is_empty() {
            return Err(AlgebraError::InvalidShape("no blocks".into()));
        }
        for (k, b) in blocks.iter().enumerate() {
            if b.dim == 0 {
                return Err(AlgebraError::InvalidShape(format!("block {k} has dimension 0")));
            }
            if !(b.weight > 0.0 && b.weight.is_finite()) {
                return Err(AlgebraError::InvalidShape(format!(
                    "block {k} has non-positive weight {}",
                    b.weight
                )));
            }
        }
        Ok(Self { blocks })
    }

    /// Single full matrix algebra `M_d(C)` with the given trace weight.
    pub fn matrix(dim: usize, weight: f64) -> Result<Self, AlgebraError> {
        Self::new(vec![Block { dim, weight }])
    }

    /// `l^inf` of `n` points with unit weights.
    pub fn diagonal(n: usize) -> Result<Self, AlgebraError> {
        Self::new(vec![Block { dim: 1, weight: 1.0 }; n])
    }

    pub fn validate(&self) -> Result<(), AlgebraError> {
        Self::new(self.blocks.clone()).map(|_| ())
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// `sum_k d_k^2`.
    pub fn l2_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim * b.dim).sum()
    }

    pub(crate) fn l2_offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.blocks.len());
        let mut acc = 0;
        for b in &self.blocks {
            off.push(acc);
            acc += b.dim * b.dim;
        }
        off
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    shape: AlgebraShape,
    blocks: Vec<CMatrix>,
}

fn check_same(a: &AlgebraShape, b: &AlgebraShape) -> Result<(), AlgebraError> {
    if a == b {
        Ok(())
    } else {
        Err(AlgebraError::ShapeMismatch(format!("{:?} vs {:?}", a.blocks, b.blocks)))
    }
}

impl AlgebraElement {
    pub fn new(shape: AlgebraShape, blocks: Vec<CMatrix>) -> Result<Self, AlgebraError> {
        if blocks.len() != shape.num_blocks() {
            return Err(AlgebraError::ShapeMismatch(format!(
                "{} blocks given, shape has {}",
                blocks.len(),
                shape.num_blocks()
            )));
        }
        for (k, (m, b)) in blocks.iter().zip(shape.blocks()).enumerate() {
            if m.nrows() != b.dim || m.ncols() != b.dim {
                return Err(AlgebraError::ShapeMismatch(format!(
                    "block {k} is {}x{}, expected {}x{}",
                    m.nrows(),
                    m.ncols(),
                    b.dim,
                    b.dim
                )));
            }
        }
        Ok(Self { shape, blocks })
    }

    pub fn zero(shape: &AlgebraShape) -> Self {
        Self {
            blocks: shape.blocks().iter().map(|b| CMatrix::zeros(b.dim, b.dim)).collect(),
            shape: shape.clone(),
        }
    }

    pub fn identity(shape: &AlgebraShape) -> Self {
        Self {
            blocks: shape.blocks().iter().map(|b| CMatrix::identity(b.dim, b.dim)).collect(),
            shape: shape.clone(),
        }
    }

    /// Matrix unit `e_ij` in block `k`.
    pub fn matrix_unit(shape: &AlgebraShape, k: usize, i: usize, j: usize) -> Self {
        let mut x = Self::zero(shape);
        x.blocks[k][(i, j)] = Complex64::new(1.0, 0.0);
        x
    }

    /// Diagonal algebra element from one value per block (all blocks must be 1x1).
    pub fn from_diagonal(shape: &AlgebraShape, values: &[Complex64]) -> Result<Self, AlgebraError> {
        if values.len() != shape.num_blocks() || shape.blocks().iter().any(|b| b.dim != 1) {
            return Err(AlgebraError::ShapeMismatch("expected one value per 1x1 block".into()));
        }
        Ok(Self {
            blocks: values.iter().map(|&v| CMatrix::from_element(1, 1, v)).collect(),
            shape: shape.clone(),
        })
    }

    /// Elements serialize as blocks of rows of `[re, im]` pairs.
    pub fn from_nested(shape: &AlgebraShape, data: &[Vec<Vec<[f64; 2]>>]) -> Result<Self, AlgebraError> {
        let mut blocks = Vec::with_capacity(data.len());
        for (k, rows) in data.iter().enumerate() {
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(AlgebraError::ShapeMismatch(format!("block {k} is not square")));
            }
            blocks.push(CMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])));
        }
        Self::new(shape.clone(), blocks)
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<[f64; 2]>>> {
        self.blocks
            .iter()
            .map(|m| {
                (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                    .collect()
            })
            .collect()
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &CMatrix {
        &self.blocks[k]
    }

    pub(crate) fn blocks_mut(&mut self) -> &mut [CMatrix] {
        &mut self.blocks
    }

    pub fn trace(&self) -> Complex64 {
        self.blocks
            .iter()
            .zip(self.shape.blocks())
            .map(|(m, b)| m.trace() * b.weight)
            .sum()
    }

    fn zip(&self, other: &Self, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Result<Self, AlgebraError> {
        check_same(&self.shape, &other.shape)?;
        Ok(Self {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.zip(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.zip(other, |a, b| a * b)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().map(|m| m * c).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().map(CMatrix::adjoint).collect(),
        }
    }

    /// `x += c * y`, shapes assumed equal.
    pub(crate) fn axpy(&mut self, c: Complex64, y: &Self) {
        for (a, b) in self.blocks.iter_mut().zip(&y.blocks) {
            *a += b * c;
        }
    }

    /// Operator norm: the largest singular value over all blocks.
    pub fn op_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|m| {
                if m.nrows() == 1 {
                    m[(0, 0)].norm()
                } else {
                    m.clone().singular_values().max()
                }
            })
            .fold(0.0, f64::max)
    }

    /// Largest entry modulus, a cheap norm for exact-structure checks.
    pub fn max_abs(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|m| m.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `||p^2 - p|| <= tol` and `||p* - p|| <= tol` in operator norm.
    pub fn is_projection(&self, tol: f64) -> bool {
        let sq = self.mul(self).expect("same shape");
        sq.sub(self).expect("same shape").op_norm() <= tol
            && self.adjoint().sub(self).expect("same shape").op_norm() <= tol
    }

    /// Coordinates in the orthonormal basis `e_ij^(k) / sqrt(w_k)` of `L^2(M, Tr)`.
    pub fn l2_coordinates(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.shape.l2_dim());
        for (m, b) in self.blocks.iter().zip(self.shape.blocks()) {
            let s = b.weight.sqrt();
            for i in 0..b.dim {
                for j in 0..b.dim {
                    out.push(m[(i, j)] * s);
                }
            }
        }
        out
    }

    pub fn from_l2_coordinates(shape: &AlgebraShape, coords: &[Complex64]) -> Result<Self, AlgebraError> {
        if coords.len() != shape.l2_dim() {
            return Err(AlgebraError::ShapeMismatch(format!(
                "{} coordinates, L2 dimension is {}",
                coords.len(),
                shape.l2_dim()
            )));
        }
        let mut x = Self::zero(shape);
        let mut it = coords.iter();
        for (m, b) in x.blocks.iter_mut().zip(shape.blocks()) {
            let s = b.weight.sqrt();
            for i in 0..b.dim {
                for j in 0..b.dim {
                    m[(i, j)] = it.next().unwrap() / s;
                }
            }
        }
        Ok(x)
    }

    /// Matrix of `a -> x a` on `L^2(M, Tr)` in the orthonormal matrix-unit basis.
    pub fn left_multiplication(&self) -> CMatrix {
        let n = self.shape.l2_dim();
        let mut out = CMatrix::zeros(n, n);
        for ((m, b), off) in self.blocks.iter().zip(self.shape.blocks()).zip(self.shape.l2_offsets()) {
            let d = b.dim;
            for i in 0..d {
                for l in 0..d {
                    for j in 0..d {
                        out[(off + i * d + j, off + l * d + j)] = m[(i, l)];
                    }
                }
            }
        }
        out
    }
}

/// A vector of `L^2(M, Tr)`, stored in the same block layout as an element.
#[derive(Debug, Clone, PartialEq)]
pub struct L2Vector(AlgebraElement);

impl L2Vector {
    pub fn new(x: AlgebraElement) -> Self {
        Self(x)
    }

    pub fn as_element(&self) -> &AlgebraElement {
        &self.0
    }

    pub fn shape(&self) -> &AlgebraShape {
        self.0.shape()
    }

    pub fn norm(&self) -> f64 {
        l2_inner(self, self).expect("same shape").re.max(0.0).sqrt()
    }
}

impl From<AlgebraElement> for L2Vector {
    fn from(x: AlgebraElement) -> Self {
        Self(x)
    }
}

/// `<a, b> = sum_k w_k tr(b_k* a_k)`.
pub fn l2_inner(a: &L2Vector, b: &L2Vector) -> Result<Complex64, AlgebraError> {
    check_same(a.shape(), b.shape())?;
    Ok(a.0
        .blocks()
        .iter()
        .zip(b.0.blocks())
        .zip(a.shape().blocks())
        .map(|((x, y), blk)| x.iter().zip(y.iter()).map(|(u, v)| u * v.conj()).sum::<Complex64>() * blk.weight)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn traces_of_identity() {
        let s = AlgebraShape::matrix(4, 1.0).unwrap();
        assert_eq!(AlgebraElement::identity(&s).trace(), c(4.0));
        let d = AlgebraShape::new(vec![
            Block { dim: 1, weight: 0.5 },
            Block { dim: 1, weight: 2.0 },
            Block { dim: 1, weight: 3.25 },
        ])
        .unwrap();
        assert_eq!(AlgebraElement::identity(&d).trace(), c(5.75));
    }

    #[test]
    fn shape_validation() {
        assert!(AlgebraShape::new(vec![]).is_err());
        assert!(AlgebraShape::new(vec![Block { dim: 0, weight: 1.0 }]).is_err());
        assert!(AlgebraShape::new(vec![Block { dim: 2, weight: 0.0 }]).is_err());
        assert!(AlgebraShape::new(vec![Block { dim: 2, weight: f64::NAN }]).is_err());
    }

    #[test]
    fn projection_examples() {
        let s = AlgebraShape::matrix(4, 1.0).unwrap();
        assert!(AlgebraElement::identity(&s).is_projection(1e-12));
        let e11 = AlgebraElement::matrix_unit(&s, 0, 0, 0);
        assert!(e11.is_projection(1e-12));
        assert!(!e11.scale(c(2.0)).is_projection(1e-12));
        // idempotent but not self-adjoint
        let mut oblique = e11.clone();
        oblique.blocks_mut()[0][(0, 1)] = c(1.0);
        assert!(!oblique.is_projection(1e-12));
    }

    #[test]
    fn orthogonal_matrix_units() {
        let s = AlgebraShape::matrix(2, 1.0).unwrap();
        let e11 = L2Vector::new(AlgebraElement::matrix_unit(&s, 0, 0, 0));
        let e22 = L2Vector::new(AlgebraElement::matrix_unit(&s, 0, 1, 1));
        assert_eq!(l2_inner(&e11, &e22).unwrap(), c(0.0));
        assert_eq!(l2_inner(&e11, &e11).unwrap(), c(1.0));
    }

    #[test]
    fn mismatched_shapes_are_rejected() {
        let a = AlgebraElement::identity(&AlgebraShape::matrix(2, 1.0).unwrap());
        let b = AlgebraElement::identity(&AlgebraShape::matrix(3, 1.0).unwrap());
        assert!(a.add(&b).is_err());
        assert!(l2_inner(&L2Vector::new(a), &L2Vector::new(b)).is_err());
    }

    #[test]
    fn nested_round_trip() {
        let s = AlgebraShape::new(vec![Block { dim: 2, weight: 1.0 }, Block { dim: 1, weight: 3.0 }]).unwrap();
        let mut x = AlgebraElement::zero(&s);
        x.blocks_mut()[0][(0, 1)] = Complex64::new(1.5, -2.0);
        x.blocks_mut()[1][(0, 0)] = Complex64::new(0.25, 0.0);
        assert_eq!(AlgebraElement::from_nested(&s, &x.to_nested()).unwrap(), x);
        let coords = x.l2_coordinates();
        let back = AlgebraElement::from_l2_coordinates(&s, &coords).unwrap();
        assert!(back.sub(&x).unwrap().max_abs() < 1e-15);
    }
}
