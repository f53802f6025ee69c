//! Random-walk node similarities: effective resistance, personalized
//! PageRank, and hitting times.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{components_of, laplacian_is_connected, pair_count, Graph, PairIndex};
use crate::linalg::{spectral_map, SymMatrix, RELATIVE_EIGEN_CUTOFF};

/// The pair-by-pair matrix `R = B L⁺ Bᵀ` of a connected graph, where the rows
/// of `B` are `e_u - e_v` for every unordered pair in lexicographic order.
///
/// Only `L⁺` is stored; entries of `R` are formed on demand, which keeps
/// memory at `O(n²)` even though `R` has `C(n,2)²` entries.
#[derive(Debug, Clone)]
pub struct ResistanceOperator {
    n: usize,
    pinv: DMatrix<f64>,
    pairs: PairIndex,
}

impl ResistanceOperator {
    pub fn new(g: &Graph) -> Result<Self> {
        let eig = g.laplacian().eigen();
        if !laplacian_is_connected(&eig.eigenvalues) {
            return Err(Error::Disconnected);
        }
        let largest = eig.eigenvalues.iter().fold(0.0_f64, |a, &l| a.max(l.abs()));
        let cutoff = RELATIVE_EIGEN_CUTOFF * largest;
        let pinv = spectral_map(&eig, |l| (l > cutoff).then(|| 1.0 / l)).to_dense();
        Ok(Self {
            n: g.n(),
            pinv,
            pairs: PairIndex::new(g.n()),
        })
    }

    /// Operator for the graph with weight vector `w` (indexed by pair).
    pub fn from_weights(n: usize, w: &[f64]) -> Result<Self> {
        Self::new(&Graph::from_weights(n, w.to_vec())?)
    }

    /// Faster variant for iterative solvers: `L⁺ = (L + J/n)⁻¹ - J/n` by
    /// Cholesky, with connectivity decided on the support of `w` and by the
    /// factorization succeeding. `None` when either check fails.
    pub(crate) fn factored(n: usize, w: &[f64]) -> Option<Self> {
        debug_assert_eq!(w.len(), pair_count(n));
        let pairs = PairIndex::new(n);
        let mut adj = vec![Vec::new(); n];
        let mut shifted = DMatrix::from_element(n, n, 1.0 / n as f64);
        for (i, (u, v)) in pairs.iter().enumerate() {
            let x = w[i];
            if x > 0.0 {
                adj[u].push(v);
                adj[v].push(u);
                shifted[(u, v)] -= x;
                shifted[(v, u)] -= x;
                shifted[(u, u)] += x;
                shifted[(v, v)] += x;
            }
        }
        if components_of(&adj).len() != 1 {
            return None;
        }
        let mut pinv = shifted.cholesky()?.inverse();
        pinv.add_scalar_mut(-1.0 / n as f64);
        pinv.iter()
            .all(|x| x.is_finite())
            .then_some(Self { n, pinv, pairs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &PairIndex {
        &self.pairs
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn pseudoinverse(&self) -> SymMatrix {
        SymMatrix::from_upper(&self.pinv)
    }

    #[inline]
    pub fn resistance(&self, u: usize, v: usize) -> f64 {
        if u == v {
            return 0.0;
        }
        let p = &self.pinv;
        p[(u, u)] + p[(v, v)] - 2.0 * p[(u, v)]
    }

    /// `R[i, i]`, the effective resistance of pair `i`.
    #[inline]
    pub fn diagonal(&self, i: usize) -> f64 {
        let (u, v) = self.pairs.pair(i);
        self.resistance(u, v)
    }

    /// `Bᵀ e_i = L⁺(e_u - e_v)` for pair `i = (u, v)`; entry `R[i, j]` is
    /// `profile[c] - profile[d]` for `j = (c, d)`.
    pub fn profile(&self, i: usize) -> Vec<f64> {
        let (u, v) = self.pairs.pair(i);
        let cu = self.pinv.column(u);
        let cv = self.pinv.column(v);
        cu.iter().zip(cv.iter()).map(|(a, b)| a - b).collect()
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (a, b) = self.pairs.pair(i);
        let (c, d) = self.pairs.pair(j);
        let p = &self.pinv;
        p[(a, c)] - p[(a, d)] - p[(b, c)] + p[(b, d)]
    }

    /// The `rows × cols` sub-block of `R`.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        let col_pairs: Vec<(usize, usize)> = cols.iter().map(|&j| self.pairs.pair(j)).collect();
        let row_data: Vec<Vec<f64>> = rows
            .par_iter()
            .map(|&i| {
                let z = self.profile(i);
                col_pairs.iter().map(|&(c, d)| z[c] - z[d]).collect()
            })
            .collect();
        DMatrix::from_fn(rows.len(), cols.len(), |r, c| row_data[r][c])
    }

    /// Full columns of `R` for the given pair indices, as an `m × k` block.
    pub fn columns(&self, cols: &[usize]) -> DMatrix<f64> {
        let rows: Vec<usize> = (0..self.pair_count()).collect();
        self.block(&rows, cols)
    }

    /// The full `m × m` matrix `R`; only sensible for small graphs.
    pub fn full(&self) -> DMatrix<f64> {
        let all: Vec<usize> = (0..self.pair_count()).collect();
        self.block(&all, &all)
    }

    /// `[(R∘R)[rows, cols]] · coeffs`: for each row pair `i`,
    /// `Σ_k coeffs[k] · R[i, cols[k]]²`.
    ///
    /// Small blocks are formed entry by entry. For large blocks the sum is
    /// rewritten as `y_iᵀ M y_i` with `y_i = L⁺(e_a - e_b)` and
    /// `M = Σ_k coeffs[k] z_k z_kᵀ`, so every row reads off
    /// `K = L⁺ M L⁺` in `O(1)` after an `O(n³)` product.
    pub fn squared_apply(&self, rows: &[usize], cols: &[usize], coeffs: &[f64]) -> Vec<f64> {
        assert_eq!(cols.len(), coeffs.len());
        let n = self.n;
        if (rows.len() as f64) * (cols.len() as f64) > 2.0 * (n as f64).powi(3) {
            return self.squared_apply_dense(rows, cols, coeffs);
        }
        self.squared_apply_entries(rows, cols, coeffs)
    }

    fn squared_apply_entries(&self, rows: &[usize], cols: &[usize], coeffs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let data = self.pinv.as_slice();
        let col_pairs: Vec<(usize, usize)> = cols.iter().map(|&j| self.pairs.pair(j)).collect();
        rows.par_iter()
            .with_min_len(16)
            .map(|&i| {
                let (a, b) = self.pairs.pair(i);
                let pa = &data[a * n..(a + 1) * n];
                let pb = &data[b * n..(b + 1) * n];
                col_pairs
                    .iter()
                    .zip(coeffs)
                    .map(|(&(c, d), &k)| {
                        let r = pa[c] - pa[d] - pb[c] + pb[d];
                        k * r * r
                    })
                    .sum()
            })
            .collect()
    }

    fn squared_apply_dense(&self, rows: &[usize], cols: &[usize], coeffs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut m = DMatrix::zeros(n, n);
        for (&j, &k) in cols.iter().zip(coeffs) {
            let (c, d) = self.pairs.pair(j);
            m[(c, c)] += k;
            m[(d, d)] += k;
            m[(c, d)] -= k;
            m[(d, c)] -= k;
        }
        let k = &self.pinv * m * &self.pinv;
        rows.iter()
            .map(|&i| {
                let (a, b) = self.pairs.pair(i);
                k[(a, a)] + k[(b, b)] - k[(a, b)] - k[(b, a)]
            })
            .collect()
    }

    /// Effective resistances of all pairs, indexed by pair.
    pub fn resistance_table(&self) -> Vec<f64> {
        (0..self.pair_count()).map(|i| self.diagonal(i)).collect()
    }
}

pub fn effective_resistance(g: &Graph, u: usize, v: usize) -> Result<f64> {
    crate::graph::pair_index(u, v, g.n())?;
    Ok(ResistanceOperator::new(g)?.resistance(u, v))
}

/// Columns of `R(w)` for the requested pairs (an `C(n,2) × pairs.len()` block).
pub fn resistance_columns(g: &Graph, pairs: &[usize]) -> Result<DMatrix<f64>> {
    if let Some(&bad) = pairs.iter().find(|&&p| p >= pair_count(g.n())) {
        return Err(Error::InvalidParameter(format!(
            "pair index {bad} out of range"
        )));
    }
    Ok(ResistanceOperator::new(g)?.columns(pairs))
}

/// All-pairs effective resistances indexed by pair.
pub fn resistance_table(g: &Graph) -> Result<Vec<f64>> {
    Ok(ResistanceOperator::new(g)?.resistance_table())
}

/// The lazy random walk matrix `W = ½(I + A D⁻¹)`, column-stochastic.
#[derive(Debug, Clone)]
pub struct LazyWalk {
    matrix: DMatrix<f64>,
}

impl LazyWalk {
    pub fn new(g: &Graph) -> Result<Self> {
        let n = g.n();
        let deg = g.degrees();
        if deg.iter().any(|&d| d <= 0.0) {
            return Err(Error::Disconnected);
        }
        let matrix = DMatrix::from_fn(n, n, |i, j| {
            let walk = if i == j { 0.0 } else { g.weight(i, j) / deg[j] };
            0.5 * (if i == j { 1.0 } else { 0.0 } + walk)
        });
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Personalized PageRank matrix `P = α (I - (1-α) W)⁻¹`; column `u` is the
/// PageRank vector personalized to `u`.
pub fn ppr_matrix(g: &Graph, alpha: f64) -> Result<DMatrix<f64>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "restart probability must lie in (0, 1], got {alpha}"
        )));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.n();
    let walk = LazyWalk::new(g)?;
    let system = DMatrix::identity(n, n) - walk.matrix() * (1.0 - alpha);
    let inv = system
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("PageRank system is singular".into()))?;
    Ok(inv * alpha)
}

/// Expected hitting times `h(u, v)` of the simple (non-lazy) random walk
/// with transition probabilities `w_uv / deg(u)`; entry `(u, v)` is the
/// expected number of steps from `u` to first reach `v`.
pub fn hitting_times(g: &Graph) -> Result<DMatrix<f64>> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.n();
    let deg = g.degrees();
    let vol: f64 = deg.iter().sum();
    let pi = DVector::from_iterator(n, deg.iter().map(|d| d / vol));
    // fundamental matrix Z = (I - T + 1 πᵀ)⁻¹ of the ergodic chain
    let z = DMatrix::from_fn(n, n, |u, v| {
        let step = if u == v { 0.0 } else { g.weight(u, v) / deg[u] };
        (if u == v { 1.0 } else { 0.0 }) - step + pi[v]
    })
    .try_inverse()
    .ok_or_else(|| Error::InvalidParameter("hitting-time system is singular".into()))?;
    Ok(DMatrix::from_fn(n, n, |u, v| {
        if u == v {
            0.0
        } else {
            (z[(v, v)] - z[(u, v)]) / pi[v]
        }
    }))
}
