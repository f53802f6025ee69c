//! Dense symmetric matrices and eigenvalue-based pseudoinversion.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenvalues at or below this fraction of the largest eigenvalue magnitude
/// are treated as zero.
pub const RELATIVE_EIGEN_CUTOFF: f64 = 1e-10;

/// A dense symmetric matrix storing only its upper triangle, so
/// `get(i, j) == get(j, i)` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    order: usize,
    packed: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            packed: vec![0.0; order * (order + 1) / 2],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds from the upper triangle of a square matrix; the lower triangle
    /// is ignored.
    pub fn from_upper(dense: &DMatrix<f64>) -> Self {
        assert_eq!(dense.nrows(), dense.ncols(), "matrix must be square");
        let mut m = Self::zeros(dense.nrows());
        for i in 0..m.order {
            for j in i..m.order {
                m.set(i, j, dense[(i, j)]);
            }
        }
        m
    }

    /// Builds from a square matrix, averaging the two triangles.
    pub fn from_dense_symmetrized(dense: &DMatrix<f64>) -> Self {
        assert_eq!(dense.nrows(), dense.ncols(), "matrix must be square");
        let mut m = Self::zeros(dense.nrows());
        for i in 0..m.order {
            for j in i..m.order {
                m.set(i, j, 0.5 * (dense[(i, j)] + dense[(j, i)]));
            }
        }
        m
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        debug_assert!(c < self.order);
        // row-major upper triangle: row r starts after r rows of decreasing length
        r * self.order - r * (r + 1) / 2 + c
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.packed[self.slot(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let s = self.slot(i, j);
        self.packed[s] = value;
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.order, self.order, |i, j| self.get(i, j))
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut total = 0.0;
        for i in 0..self.order {
            for j in 0..self.order {
                total += self.get(i, j).powi(2);
            }
        }
        total.sqrt()
    }

    /// Frobenius norm of `self - other`.
    pub fn frobenius_distance(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.order, other.order);
        let mut total = 0.0;
        for i in 0..self.order {
            for j in 0..self.order {
                total += (self.get(i, j) - other.get(i, j)).powi(2);
            }
        }
        total.sqrt()
    }

    pub fn scaled(&self, factor: f64) -> SymMatrix {
        SymMatrix {
            order: self.order,
            packed: self.packed.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn eigen(&self) -> SymmetricEigen<f64, nalgebra::Dyn> {
        SymmetricEigen::new(self.to_dense())
    }
}

/// Rebuilds `Σ f(λ_k) v_k v_kᵀ` over the eigenpairs for which `f` returns a value.
pub(crate) fn spectral_map(
    eig: &SymmetricEigen<f64, nalgebra::Dyn>,
    mut f: impl FnMut(f64) -> Option<f64>,
) -> SymMatrix {
    let mut scaled = eig.eigenvectors.clone();
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let s = f(lambda).unwrap_or(0.0);
        scaled.column_mut(k).scale_mut(s);
    }
    SymMatrix::from_dense_symmetrized(&(scaled * eig.eigenvectors.transpose()))
}

fn largest_magnitude(eig: &SymmetricEigen<f64, nalgebra::Dyn>) -> f64 {
    eig.eigenvalues.iter().fold(0.0_f64, |a, &l| a.max(l.abs()))
}

/// Moore–Penrose pseudoinverse of an arbitrary symmetric matrix.
pub fn pinv_sym(m: &SymMatrix) -> SymMatrix {
    let eig = m.eigen();
    let cutoff = RELATIVE_EIGEN_CUTOFF * largest_magnitude(&eig);
    spectral_map(&eig, |l| (l.abs() > cutoff).then(|| 1.0 / l))
}

/// Moore–Penrose pseudoinverse of a symmetric positive semidefinite matrix.
///
/// Fails when an eigenvalue is below `-RELATIVE_EIGEN_CUTOFF * λ_max`.
pub fn pinv_psd(m: &SymMatrix) -> Result<SymMatrix> {
    let eig = m.eigen();
    let largest = largest_magnitude(&eig);
    let cutoff = RELATIVE_EIGEN_CUTOFF * largest;
    if let Some(&bad) = eig.eigenvalues.iter().find(|&&l| l < -cutoff) {
        return Err(Error::NotPsd {
            eigenvalue: bad,
            largest,
        });
    }
    Ok(spectral_map(&eig, |l| (l > cutoff).then(|| 1.0 / l)))
}
