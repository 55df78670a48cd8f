use nalgebra::DMatrix;

use crate::SdpError;

/// Sparse symmetric matrix stored as upper-triangular triplets.
///
/// Each stored `(i, j, v)` with `i < j` stands for both the `(i, j)` and the
/// `(j, i)` entry. Repeated coordinates accumulate.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.push(i, i, 1.0);
        }
        m
    }

    /// Builds from a dense matrix, rejecting asymmetry above `1e-12` relative.
    pub fn from_dense(a: &DMatrix<f64>) -> Result<Self, SdpError> {
        if a.nrows() != a.ncols() {
            return Err(SdpError::InvalidProblem(format!(
                "matrix is {}x{}, expected square",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        let scale = a.amax().max(1.0);
        let mut m = Self::zeros(n);
        for j in 0..n {
            for i in 0..=j {
                if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * scale {
                    return Err(SdpError::InvalidProblem(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
                let v = 0.5 * (a[(i, j)] + a[(j, i)]);
                if v != 0.0 {
                    m.entries.push((i, j, v));
                }
            }
        }
        Ok(m)
    }

    /// Adds `v` at `(i, j)` and, when `i != j`, at `(j, i)`.
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.dim && j < self.dim, "index out of range");
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.entries.push((i, j, v));
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.dim, self.dim);
        self.add_scaled_to(1.0, &mut d);
        d
    }

    /// `out += alpha * self`.
    pub fn add_scaled_to(&self, alpha: f64, out: &mut DMatrix<f64>) {
        for &(i, j, v) in &self.entries {
            out[(i, j)] += alpha * v;
            if i != j {
                out[(j, i)] += alpha * v;
            }
        }
    }

    /// Frobenius inner product with a dense symmetric matrix.
    pub fn dot(&self, x: &DMatrix<f64>) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| {
                if i == j {
                    v * x[(i, i)]
                } else {
                    v * (x[(i, j)] + x[(j, i)])
                }
            })
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.to_dense().norm()
    }

    /// Entries listed over both triangles.
    pub(crate) fn full_entries(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(2 * self.entries.len());
        for &(i, j, v) in &self.entries {
            out.push((i, j, v));
            if i != j {
                out.push((j, i, v));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub a: SymMatrix,
    pub b: f64,
}

/// `minimize <C, X>` subject to `<A_i, X> = b_i` and `X` positive semidefinite.
///
/// The dual is `maximize b'y` subject to `C - sum_i y_i A_i` positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    dim: usize,
    objective: SymMatrix,
    constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn new(
        dim: usize,
        objective: SymMatrix,
        constraints: Vec<Constraint>,
    ) -> Result<Self, SdpError> {
        if dim == 0 {
            return Err(SdpError::InvalidProblem("dimension must be positive".into()));
        }
        if constraints.is_empty() {
            return Err(SdpError::InvalidProblem("constraint list is empty".into()));
        }
        if objective.dim() != dim {
            return Err(SdpError::InvalidProblem(format!(
                "objective has dimension {}, expected {dim}",
                objective.dim()
            )));
        }
        for (k, c) in constraints.iter().enumerate() {
            if c.a.dim() != dim {
                return Err(SdpError::InvalidProblem(format!(
                    "constraint {k} has dimension {}, expected {dim}",
                    c.a.dim()
                )));
            }
            if !c.b.is_finite() {
                return Err(SdpError::InvalidProblem(format!(
                    "constraint {k} has a non-finite right-hand side"
                )));
            }
        }
        Ok(Self {
            dim,
            objective,
            constraints,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn objective(&self) -> &SymMatrix {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// `sum_i y_i A_i` as a dense matrix.
    pub fn adjoint_map(&self, y: &[f64]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for (c, &yi) in self.constraints.iter().zip(y) {
            c.a.add_scaled_to(yi, &mut out);
        }
        out
    }

    /// `[<A_i, X>]_i`.
    pub fn constraint_map(&self, x: &DMatrix<f64>) -> Vec<f64> {
        self.constraints.iter().map(|c| c.a.dot(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_accumulates_and_mirrors() {
        let mut a = SymMatrix::zeros(3);
        a.push(2, 0, 1.5);
        a.push(0, 2, 0.5);
        a.push(1, 1, -1.0);
        let d = a.to_dense();
        assert_eq!(d[(0, 2)], 2.0);
        assert_eq!(d[(2, 0)], 2.0);
        assert_eq!(d[(1, 1)], -1.0);
        let x = DMatrix::from_fn(3, 3, |i, j| (i + j) as f64);
        assert_eq!(a.dot(&x), (d.component_mul(&x)).sum());
    }

    #[test]
    fn from_dense_rejects_asymmetric() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 1.0]);
        assert!(SymMatrix::from_dense(&a).is_err());
    }

    #[test]
    fn problem_validation() {
        let c = SymMatrix::identity(2);
        assert!(SdpProblem::new(2, c.clone(), vec![]).is_err());
        let bad = Constraint {
            a: SymMatrix::identity(3),
            b: 1.0,
        };
        assert!(SdpProblem::new(2, c, vec![bad]).is_err());
    }
}
