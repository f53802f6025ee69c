use nalgebra::DMatrix;

use crate::descent::{self, Smooth};
use crate::error::{Error, Result};
use crate::graph::pair_count;
use crate::measurements::MeasurementSet;
use crate::similarity::ResistanceOperator;

/// `Δ(w)`: `r̄(i) - R(w)[i,i]` on measured pairs, zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorVector {
    pairs: Vec<usize>,
    residuals: Vec<f64>,
    len: usize,
}

impl ErrorVector {
    /// Measured pair indices and their residuals, in measurement order.
    pub fn support(&self) -> (&[usize], &[f64]) {
        (&self.pairs, &self.residuals)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len];
        for (&i, &r) in self.pairs.iter().zip(&self.residuals) {
            out[i] = r;
        }
        out
    }
}

pub fn error_vector(op: &ResistanceOperator, ms: &MeasurementSet) -> ErrorVector {
    let pairs = ms.pair_indices();
    let residuals = pairs
        .iter()
        .zip(ms.entries())
        .map(|(&i, e)| e.rbar - op.diagonal(i))
        .collect();
    ErrorVector {
        pairs,
        residuals,
        len: op.pair_count(),
    }
}

/// The least-squares objective bound to a measurement set.
pub struct LeastSquares<'a> {
    ms: &'a MeasurementSet,
    pairs: Vec<usize>,
}

impl<'a> LeastSquares<'a> {
    pub fn new(ms: &'a MeasurementSet) -> Self {
        Self {
            ms,
            pairs: ms.pair_indices(),
        }
    }

    fn residuals(&self, op: &ResistanceOperator) -> Vec<f64> {
        self.pairs
            .iter()
            .zip(self.ms.entries())
            .map(|(&i, e)| e.rbar - op.diagonal(i))
            .collect()
    }
}

impl Smooth for LeastSquares<'_> {
    fn n(&self) -> usize {
        self.ms.n()
    }

    fn value(&self, op: &ResistanceOperator, _w: &[f64]) -> f64 {
        self.residuals(op).iter().map(|d| d * d).sum()
    }

    // ∂F/∂w_i = 2 Σ_{j∈S} Δ_j R_ij², using only the measured columns of R
    fn partials(&self, op: &ResistanceOperator, _w: &[f64], coords: &[usize]) -> Vec<f64> {
        let delta = self.residuals(op);
        let mut g = op.squared_apply(coords, &self.pairs, &delta);
        g.iter_mut().for_each(|x| *x *= 2.0);
        g
    }

    fn partial_cost(&self, coords: usize) -> u64 {
        (coords * self.pairs.len()) as u64
    }
}

fn operator_for(w: &[f64], ms: &MeasurementSet) -> Result<ResistanceOperator> {
    if w.len() != pair_count(ms.n()) {
        return Err(Error::SizeMismatch {
            expected: pair_count(ms.n()),
            found: w.len(),
        });
    }
    ResistanceOperator::from_weights(ms.n(), w)
}

/// `F(w)`; fails with [`Error::Disconnected`] when `w` does not span a
/// connected graph.
pub fn objective(w: &[f64], ms: &MeasurementSet) -> Result<f64> {
    let op = operator_for(w, ms)?;
    Ok(LeastSquares::new(ms).value(&op, w))
}

/// `∇F(w) = 2 (R∘R) Δ(w)`.
pub fn gradient(w: &[f64], ms: &MeasurementSet) -> Result<Vec<f64>> {
    let op = operator_for(w, ms)?;
    let all: Vec<usize> = (0..w.len()).collect();
    Ok(LeastSquares::new(ms).partials(&op, w, &all))
}

/// `H = -4 [R diag(Δ) R] ∘ R + 2 (R∘R) I_S (R∘R)`, formed densely. Meant for
/// small graphs only.
pub fn hessian(w: &[f64], ms: &MeasurementSet) -> Result<DMatrix<f64>> {
    let op = operator_for(w, ms)?;
    let r = op.full();
    let delta = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(
        error_vector(&op, ms).to_dense(),
    ));
    let r2 = r.component_mul(&r);
    let mut mask = DMatrix::zeros(w.len(), w.len());
    for i in ms.pair_indices() {
        mask[(i, i)] = 1.0;
    }
    let first = (&r * delta * &r).component_mul(&r) * -4.0;
    let second = &r2 * mask * &r2 * 2.0;
    let h = first + second;
    // exact symmetry
    Ok((&h + h.transpose()) * 0.5)
}

pub fn project_nonneg(w: &[f64]) -> Vec<f64> {
    let mut out = w.to_vec();
    descent::project_nonneg_in_place(&mut out);
    out
}
