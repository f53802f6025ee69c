//! Weighted undirected graphs over a fixed node set.
//!
//! A [`Graph`] stores one weight per unordered node pair, so the weight
//! vector doubles as the optimization variable of the learners. Pairs are
//! numbered lexicographically: `(0,1), (0,2), …, (0,n-1), (1,2), …`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{SymMatrix, RELATIVE_EIGEN_CUTOFF};

/// Number of unordered pairs on `n` nodes.
#[inline]
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Lexicographic index of the unordered pair `{u, v}`.
pub fn pair_index(u: usize, v: usize, n: usize) -> Result<usize> {
    if u == v || u >= n || v >= n {
        return Err(Error::InvalidPair { u, v, n });
    }
    Ok(pair_index_unchecked(u, v, n))
}

#[inline]
pub(crate) fn pair_index_unchecked(u: usize, v: usize, n: usize) -> usize {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

/// Inverse of [`pair_index`]; returns `(u, v)` with `u < v`.
pub fn pair_of(index: usize, n: usize) -> Result<(usize, usize)> {
    if index >= pair_count(n) {
        return Err(Error::InvalidParameter(format!(
            "pair index {index} out of range for {n} nodes"
        )));
    }
    Ok(PairIndex::new(n).pair(index))
}

/// Precomputed bijection between pair indices and node pairs.
#[derive(Debug, Clone)]
pub struct PairIndex {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl PairIndex {
    pub fn new(n: usize) -> Self {
        let mut pairs = Vec::with_capacity(pair_count(n));
        for u in 0..n {
            for v in u + 1..n {
                pairs.push((u, v));
            }
        }
        Self { n, pairs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    #[inline]
    pub fn pair(&self, index: usize) -> (usize, usize) {
        self.pairs[index]
    }

    #[inline]
    pub fn index(&self, u: usize, v: usize) -> usize {
        pair_index_unchecked(u, v, self.n)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }
}

/// Undirected graph with nonnegative weights on every unordered node pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    weights: Vec<f64>,
}

impl Graph {
    /// Graph on `n >= 2` nodes with no edges.
    pub fn empty(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "a graph needs at least 2 nodes, got {n}"
            )));
        }
        Ok(Self {
            n,
            weights: vec![0.0; pair_count(n)],
        })
    }

    /// Wraps a full weight vector indexed by [`pair_index`].
    pub fn from_weights(n: usize, weights: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "a graph needs at least 2 nodes, got {n}"
            )));
        }
        if weights.len() != pair_count(n) {
            return Err(Error::SizeMismatch {
                expected: pair_count(n),
                found: weights.len(),
            });
        }
        if let Some(bad) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "edge weights must be finite and nonnegative, found {bad}"
            )));
        }
        Ok(Self { n, weights })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for &(u, v, w) in edges {
            g.set_weight(u, v, w)?;
        }
        Ok(g)
    }

    /// Complete graph with every weight equal to `w`.
    pub fn complete(n: usize, w: f64) -> Result<Self> {
        Self::from_weights(n, vec![w; pair_count(n)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        if u == v {
            return 0.0;
        }
        self.weights[pair_index_unchecked(u, v, self.n)]
    }

    pub fn set_weight(&mut self, u: usize, v: usize, w: f64) -> Result<()> {
        let i = pair_index(u, v, self.n)?;
        if !w.is_finite() || w < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "edge weight must be finite and nonnegative, got {w}"
            )));
        }
        self.weights[i] = w;
        Ok(())
    }

    /// Edges with positive weight as `(u, v, w)`, `u < v`, in pair order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let idx = PairIndex::new(self.n);
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, &w)| {
                let (u, v) = idx.pair(i);
                (u, v, w)
            })
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        let idx = PairIndex::new(self.n);
        for (i, &w) in self.weights.iter().enumerate() {
            if w != 0.0 {
                let (u, v) = idx.pair(i);
                d[u] += w;
                d[v] += w;
            }
        }
        d
    }

    /// Twice the total edge weight.
    pub fn volume(&self) -> f64 {
        2.0 * self.total_weight()
    }

    /// Same graph with every weight multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Graph {
        Graph {
            n: self.n,
            weights: self.weights.iter().map(|w| w * factor).collect(),
        }
    }

    /// Rescaled to total edge weight 1. Fails on an empty graph.
    pub fn normalized(&self) -> Result<Graph> {
        let total = self.total_weight();
        if total <= 0.0 {
            return Err(Error::InvalidParameter("graph has no edges".into()));
        }
        Ok(self.scaled(1.0 / total))
    }

    /// Applies a node relabeling: node `u` becomes `perm[u]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                found: perm.len(),
            });
        }
        let mut g = Graph::empty(self.n)?;
        for (u, v, w) in self.edges() {
            g.set_weight(perm[u], perm[v], w)?;
        }
        Ok(g)
    }

    pub fn laplacian(&self) -> SymMatrix {
        let mut l = SymMatrix::zeros(self.n);
        let idx = PairIndex::new(self.n);
        for (i, &w) in self.weights.iter().enumerate() {
            if w != 0.0 {
                let (u, v) = idx.pair(i);
                l.set(u, v, -w);
                l.set(u, u, l.get(u, u) + w);
                l.set(v, v, l.get(v, v) + w);
            }
        }
        l
    }

    /// Connected iff the Laplacian has exactly one eigenvalue at or below
    /// the relative cutoff used for pseudoinversion.
    pub fn is_connected(&self) -> bool {
        laplacian_is_connected(&self.laplacian().eigen().eigenvalues)
    }

    /// Connected components of the positive-weight support, each sorted,
    /// ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for (u, v, _) in self.edges() {
            adj[u].push(v);
            adj[v].push(u);
        }
        components_of(&adj)
    }

    /// Reads the edge-list format: a header `n <count>` followed by one
    /// `u v w` line per edge. Blank lines and `#` comments are ignored.
    pub fn read(path: &Path) -> Result<Graph> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Graph> {
        let mut graph: Option<Graph> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match graph.as_mut() {
                None => {
                    let n = parse_header(&fields)
                        .ok_or_else(|| Error::parse(path, lineno, "expected header `n <count>`"))?;
                    graph = Some(
                        Graph::empty(n).map_err(|e| Error::parse(path, lineno, e.to_string()))?,
                    );
                }
                Some(g) => {
                    if fields.len() != 3 {
                        return Err(Error::parse(path, lineno, "expected `u v w`"));
                    }
                    let bad = |what: &str| Error::parse(path, lineno, format!("invalid {what}"));
                    let u: usize = fields[0].parse().map_err(|_| bad("node"))?;
                    let v: usize = fields[1].parse().map_err(|_| bad("node"))?;
                    let w: f64 = fields[2].parse().map_err(|_| bad("weight"))?;
                    g.set_weight(u, v, w)
                        .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
                }
            }
        }
        graph.ok_or_else(|| Error::parse(path, 1, "missing header `n <count>`"))
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for (u, v, w) in self.edges() {
            let _ = writeln!(out, "{u} {v} {w}");
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_edge_list())?;
        Ok(())
    }
}

pub(crate) fn parse_header(fields: &[&str]) -> Option<usize> {
    match fields {
        ["n", count] => count.parse().ok(),
        _ => None,
    }
}

pub(crate) fn laplacian_is_connected(eigenvalues: &nalgebra::DVector<f64>) -> bool {
    let largest = eigenvalues.iter().fold(0.0_f64, |a, &l| a.max(l.abs()));
    if largest == 0.0 {
        return false;
    }
    let cutoff = RELATIVE_EIGEN_CUTOFF * largest;
    eigenvalues.iter().filter(|&&l| l <= cutoff).count() == 1
}

pub(crate) fn components_of(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    stack.push(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}
