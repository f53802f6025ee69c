//! Exact reconstruction of a graph from complete similarity data.
//!
//! All-pairs resistances determine the Laplacian uniquely through
//! `L = -2 [C R C]⁺` with `C = I - J/n`. Hitting times and personalized
//! PageRank reduce to the same kind of closed form, and a tree is recovered
//! from any superset of its edge resistances by completing the remaining
//! pairs with shortest-path distances.

use std::collections::VecDeque;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{components_of, pair_count, pair_index_unchecked, Graph, PairIndex};
use crate::linalg::{pinv_sym, SymMatrix};
use crate::measurements::MeasurementSet;
use crate::similarity::ResistanceOperator;

/// Recovered off-diagonals up to this fraction of the largest Laplacian
/// entry are rounded to zero instead of rejected.
pub const LAPLACIAN_TOLERANCE: f64 = 1e-8;

/// Shortest-path edge lengths are clamped to at least this value.
pub const COMPLETION_FLOOR: f64 = 1e-6;

const PPR_SUPPORT_TOLERANCE: f64 = 1e-10;
const PPR_SYMMETRY_TOLERANCE: f64 = 1e-6;
const TREE_CONSISTENCY_TOLERANCE: f64 = 1e-6;

/// Dense `n × n` matrix from a pair-indexed table, zero on the diagonal.
pub(crate) fn table_to_dense(table: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |u, v| {
        if u == v {
            0.0
        } else {
            table[pair_index_unchecked(u, v, n)]
        }
    })
}

/// `C R C` with `C = I - J/n`, i.e. `R` with row, column, and grand means
/// removed.
pub(crate) fn double_center(r: &DMatrix<f64>) -> SymMatrix {
    let n = r.nrows();
    let nf = n as f64;
    let row_means: Vec<f64> = (0..n).map(|i| r.row(i).sum() / nf).collect();
    let col_means: Vec<f64> = (0..n).map(|j| r.column(j).sum() / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    let centered = DMatrix::from_fn(n, n, |i, j| r[(i, j)] - row_means[i] - col_means[j] + grand);
    SymMatrix::from_dense_symmetrized(&centered)
}

/// Graph from a candidate Laplacian, rejecting positive off-diagonals above
/// the tolerance.
fn graph_from_laplacian(l: &SymMatrix) -> Result<Graph> {
    let n = l.order();
    let mut scale = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            scale = scale.max(l.get(i, j).abs());
        }
    }
    let tol = LAPLACIAN_TOLERANCE * scale;
    let idx = PairIndex::new(n);
    let mut weights = Vec::with_capacity(idx.len());
    for (u, v) in idx.iter() {
        let x = l.get(u, v);
        if x > tol {
            return Err(Error::Infeasible(format!(
                "recovered edge ({u}, {v}) has negative weight {:e}",
                -x
            )));
        }
        weights.push(if x < -tol { -x } else { 0.0 });
    }
    Graph::from_weights(n, weights)
}

/// The unique graph whose effective resistances equal `table` (indexed by
/// pair).
pub fn reconstruct_full(table: &[f64], n: usize) -> Result<Graph> {
    if table.len() != pair_count(n) {
        return Err(Error::SizeMismatch {
            expected: pair_count(n),
            found: table.len(),
        });
    }
    if let Some(bad) = table.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(Error::Infeasible(format!(
            "resistances must be finite and positive, found {bad}"
        )));
    }
    let centered = double_center(&table_to_dense(table, n));
    let laplacian = pinv_sym(&centered).scaled(-2.0);
    let g = graph_from_laplacian(&laplacian)?;
    if !g.is_connected() {
        return Err(Error::Infeasible("recovered graph is disconnected".into()));
    }
    Ok(g)
}

/// The graph (normalized to total weight 1) whose commute times are
/// proportional to `h(u,v) + h(v,u)`.
pub fn reconstruct_from_hitting(h: &DMatrix<f64>) -> Result<Graph> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: h.ncols(),
        });
    }
    if n < 2 {
        return Err(Error::InvalidParameter("need at least 2 nodes".into()));
    }
    if (0..n).any(|u| h[(u, u)] != 0.0) {
        return Err(Error::InvalidParameter(
            "hitting-time diagonal must be zero".into(),
        ));
    }
    let commute: Vec<f64> = PairIndex::new(n)
        .iter()
        .map(|(u, v)| h[(u, v)] + h[(v, u)])
        .collect();
    reconstruct_full(&commute, n)?.normalized()
}

/// All-pairs shortest-path distances in the graph whose edges are the
/// measured pairs, weighted by `max(rbar, COMPLETION_FLOOR)`.
pub fn metric_completion(ms: &MeasurementSet) -> Result<Vec<f64>> {
    let n = ms.n();
    let mut adj = vec![Vec::new(); n];
    for e in ms.entries() {
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    let comps = components_of(&adj);
    if comps.len() > 1 {
        let node = comps[1][0];
        return Err(Error::Incompletable {
            node,
            component_size: comps[1].len(),
        });
    }

    let mut dist = vec![f64::INFINITY; n * n];
    for u in 0..n {
        dist[u * n + u] = 0.0;
    }
    for e in ms.entries() {
        let len = e.rbar.max(COMPLETION_FLOOR);
        dist[e.u * n + e.v] = len;
        dist[e.v * n + e.u] = len;
    }
    // Floyd–Warshall
    for k in 0..n {
        let row_k: Vec<f64> = dist[k * n..(k + 1) * n].to_vec();
        for i in 0..n {
            let dik = dist[i * n + k];
            if !dik.is_finite() {
                continue;
            }
            let row_i = &mut dist[i * n..(i + 1) * n];
            for (dij, &dkj) in row_i.iter_mut().zip(&row_k) {
                let via = dik + dkj;
                if via < *dij {
                    *dij = via;
                }
            }
        }
    }
    Ok(PairIndex::new(n)
        .iter()
        .map(|(u, v)| dist[u * n + v])
        .collect())
}

/// Recovers a weighted tree from exact resistances on a superset of its
/// edges.
pub fn reconstruct_tree(ms: &MeasurementSet) -> Result<Graph> {
    let n = ms.n();
    let completed = metric_completion(ms)?;
    let g = reconstruct_full(&completed, n)?;
    if g.edge_count() != n - 1 {
        return Err(Error::NotATree(format!(
            "recovered graph has {} edges on {n} nodes",
            g.edge_count()
        )));
    }
    let op = ResistanceOperator::new(&g)?;
    for e in ms.entries() {
        let r = op.resistance(e.u, e.v);
        if (r - e.rbar).abs() > TREE_CONSISTENCY_TOLERANCE * e.rbar.abs().max(r) {
            return Err(Error::NotATree(format!(
                "recovered resistance {r} differs from measured {} on ({}, {})",
                e.rbar, e.u, e.v
            )));
        }
    }
    Ok(g)
}

/// Inverts `P = α (I - (1-α) W)⁻¹` back to the graph, normalized to total
/// weight 1.
pub fn reconstruct_from_ppr(p: &DMatrix<f64>, alpha: f64) -> Result<Graph> {
    if alpha == 1.0 {
        return Err(Error::NoInformation);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "restart probability must lie in (0, 1), got {alpha}"
        )));
    }
    let n = p.nrows();
    if p.ncols() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: p.ncols(),
        });
    }
    if n < 2 {
        return Err(Error::InvalidParameter("need at least 2 nodes".into()));
    }
    let p_inv = p
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InconsistentPpr("matrix is singular".into()))?;
    let identity = DMatrix::<f64>::identity(n, n);
    let walk = (&identity - p_inv * alpha) / (1.0 - alpha);
    // N = 2W - I = A D⁻¹, so N[j][i] / N[i][j] = d_j / d_i
    let step = walk * 2.0 - identity;

    let linked = |i: usize, j: usize| step[(i, j)].abs() > PPR_SUPPORT_TOLERANCE;
    let mut degree = vec![0.0; n];
    let mut visited = vec![false; n];
    degree[0] = 1.0;
    visited[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if j == i || visited[j] || !(linked(i, j) || linked(j, i)) {
                continue;
            }
            if !(linked(i, j) && linked(j, i)) {
                return Err(Error::InconsistentPpr(format!(
                    "one-directional transition between {i} and {j}"
                )));
            }
            degree[j] = degree[i] * step[(j, i)] / step[(i, j)];
            if !(degree[j].is_finite() && degree[j] > 0.0) {
                return Err(Error::InconsistentPpr(format!(
                    "non-positive degree ratio at node {j}"
                )));
            }
            visited[j] = true;
            queue.push_back(j);
        }
    }
    if let Some(u) = visited.iter().position(|v| !v) {
        return Err(Error::InconsistentPpr(format!(
            "node {u} is not reachable from node 0"
        )));
    }

    let adjacency = DMatrix::from_fn(n, n, |i, j| step[(i, j)] * degree[j]);
    let scale = adjacency.abs().max();
    let idx = PairIndex::new(n);
    let mut weights = Vec::with_capacity(idx.len());
    for (u, v) in idx.iter() {
        let (a, b) = (adjacency[(u, v)], adjacency[(v, u)]);
        if (a - b).abs() > PPR_SYMMETRY_TOLERANCE * scale {
            return Err(Error::InconsistentPpr(format!(
                "recovered adjacency is asymmetric at ({u}, {v}): {a} vs {b}"
            )));
        }
        let w = 0.5 * (a + b);
        if !(linked(u, v) && linked(v, u)) {
            weights.push(0.0);
        } else if w < -PPR_SYMMETRY_TOLERANCE * scale {
            return Err(Error::InconsistentPpr(format!(
                "negative recovered weight at ({u}, {v})"
            )));
        } else {
            weights.push(w.max(0.0));
        }
    }
    Graph::from_weights(n, weights)?.normalized()
}
