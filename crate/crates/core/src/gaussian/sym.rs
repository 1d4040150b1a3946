//! Small symmetric matrices stored as a packed upper triangle.
//!
//! Packed order is row-major over `i <= j`, so a 2x2 matrix is stored as
//! `[m11, m12, m22]` and a 3x3 one as `[m11, m12, m13, m22, m23, m33]`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance for index computations.
pub const INDEX_TOL: f64 = 1e-8;

/// Number of distinct entries of an `n x n` symmetric matrix.
pub fn packed_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Position of entry `(i, j)` in the packed upper triangle.
pub fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // rows 0..i hold n + (n - 1) + ... + (n - i + 1) entries
    i * n - i * i.saturating_sub(1) / 2 + (j - i)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    n: usize,
    packed: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            packed: vec![0.0; packed_len(n)],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self::from_fn(d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    pub fn from_packed(n: usize, packed: Vec<f64>) -> Result<Self> {
        if packed.len() != packed_len(n) {
            return Err(Error::DimensionMismatch {
                expected: packed_len(n),
                got: packed.len(),
            });
        }
        Ok(Self { n, packed })
    }

    /// Builds from `f(i, j)` evaluated on the upper triangle.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut packed = Vec::with_capacity(packed_len(n));
        for i in 0..n {
            for j in i..n {
                packed.push(f(i, j));
            }
        }
        Self { n, packed }
    }

    /// Reads the upper triangle of a square matrix.
    pub fn from_upper(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "square matrix required");
        Self::from_fn(m.nrows(), |i, j| m[(i, j)])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn packed(&self) -> &[f64] {
        &self.packed
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.packed[packed_index(self.n, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = packed_index(self.n, i, j);
        self.packed[k] = v;
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            packed: self.packed.iter().map(|v| v * s).collect(),
        }
    }

    /// `a * self + b * other`.
    pub fn lincomb(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            packed: self
                .packed
                .iter()
                .zip(&other.packed)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn quad_form(&self, v: &[f64]) -> f64 {
        self.mul_vec(v).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// `Q^T M Q` for a square `q`.
    pub fn congruence(&self, q: &DMatrix<f64>) -> Self {
        let m = q.transpose() * self.to_dmatrix() * q;
        Self::from_upper(&m)
    }

    pub fn det(&self) -> f64 {
        match self.n {
            0 => 1.0,
            1 => self.packed[0],
            2 => self.packed[0] * self.packed[2] - self.packed[1] * self.packed[1],
            _ => self.to_dmatrix().determinant(),
        }
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Eigenvalues in ascending order. This is the single spectral routine
    /// used across the crate; 1x1 and 2x2 inputs use the closed form.
    pub fn eigenvalues(&self) -> Vec<f64> {
        match self.n {
            0 => Vec::new(),
            1 => vec![self.packed[0]],
            2 => {
                let (a, b, c) = (self.packed[0], self.packed[1], self.packed[2]);
                let mean = 0.5 * (a + c);
                let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
                vec![mean - rad, mean + rad]
            }
            _ => {
                let mut ev: Vec<f64> = SymmetricEigen::new(self.to_dmatrix())
                    .eigenvalues
                    .iter()
                    .copied()
                    .collect();
                ev.sort_by(|a, b| a.total_cmp(b));
                ev
            }
        }
    }

    /// Transpose of the cofactor matrix; `adj(M) M = det(M) I` holds for
    /// singular inputs too.
    pub fn adjugate(&self) -> Self {
        let n = self.n;
        match n {
            0 => Self::zeros(0),
            1 => Self {
                n: 1,
                packed: vec![1.0],
            },
            2 => Self {
                n: 2,
                packed: vec![self.packed[2], -self.packed[1], self.packed[0]],
            },
            _ => {
                let m = self.to_dmatrix();
                Self::from_fn(n, |i, j| {
                    let minor = m.clone().remove_row(j).remove_column(i);
                    let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    sign * minor.determinant()
                })
            }
        }
    }

    /// Solves `M x = b` through the eigendecomposition.
    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        if self.n == 2 {
            let d = self.det();
            if d == 0.0 {
                return None;
            }
            let adj = self.adjugate();
            return Some(adj.mul_vec(b).into_iter().map(|v| v / d).collect());
        }
        let eig = SymmetricEigen::new(self.to_dmatrix());
        if eig.eigenvalues.iter().any(|v| *v == 0.0) {
            return None;
        }
        let rhs = DVector::from_column_slice(b);
        let coeffs = eig.eigenvectors.transpose() * rhs;
        let scaled = DVector::from_iterator(self.n, coeffs.iter().zip(eig.eigenvalues.iter()).map(|(c, l)| c / l));
        Some((eig.eigenvectors * scaled).iter().copied().collect())
    }
}

/// Free-function form of [`SymMatrix::adjugate`].
pub fn adjugate(m: &SymMatrix) -> SymMatrix {
    m.adjugate()
}

/// Number of negative eigenvalues. Fails with `NearSingular` when some
/// eigenvalue has modulus below `tol` times the spectral norm.
pub fn index_of(m: &SymMatrix, tol: f64) -> Result<usize> {
    let ev = m.eigenvalues();
    let norm = ev.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let min_abs = ev.iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
    if norm == 0.0 || min_abs < tol * norm || !min_abs.is_finite() {
        return Err(Error::NearSingular {
            min_abs_eigenvalue: min_abs,
        });
    }
    Ok(ev.iter().filter(|v| **v < 0.0).count())
}

/// Index of a critical point of `f` restricted to a level set of `g`:
/// `ind(A) - 1{b^T A^-1 b < 0}` with `A` the pencil Hessian and `b` the
/// complementary gradient.
///
/// `tol` is relative: the matrix test is `|lambda| >= tol * |A|` and the
/// bordered form is rejected when `|b^T A^-1 b| * |A| <= tol * |b|^2`.
pub fn biparametric_index(a: &SymMatrix, b: &[f64], tol: f64) -> Result<usize> {
    let ind = index_of(a, tol)?;
    let q = bordered_form(a, b);
    let norm_a = a.spectral_norm();
    let bb: f64 = b.iter().map(|v| v * v).sum();
    if !(q.abs() * norm_a > tol * bb) {
        return Err(Error::CuspLike { value: q });
    }
    Ok(ind - usize::from(q < 0.0))
}

/// `b^T A^-1 b`, computed as `b^T adj(A) b / det(A)`.
pub fn bordered_form(a: &SymMatrix, b: &[f64]) -> f64 {
    a.adjugate().quad_form(b) / a.det()
}
