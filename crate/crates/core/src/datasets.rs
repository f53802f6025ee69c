//! Synthetic graph generators and the SNAP ego-network edge-list reader.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::graph::{components_of, Graph};

/// Neighbors per point in the two-cluster k-NN benchmark graph.
pub const DEFAULT_KNN_K: usize = 7;

/// Horizontal offset of the two Gaussian cluster centers `(±offset, 0)`.
pub const KNN_CLUSTER_OFFSET: f64 = 3.0;

/// Unit-weight `rows × cols` lattice with 4-neighbor connectivity.
pub fn gen_grid(rows: usize, cols: usize) -> Result<Graph> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid dimensions must both be at least 2, got {rows}x{cols}"
        )));
    }
    let id = |r: usize, c: usize| r * cols + c;
    let mut g = Graph::empty(rows * cols)?;
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                g.set_weight(id(r, c), id(r, c + 1), 1.0)?;
            }
            if r + 1 < rows {
                g.set_weight(id(r, c), id(r + 1, c), 1.0)?;
            }
        }
    }
    Ok(g)
}

fn knn_once(n: usize, k: usize, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let points: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            let cx = if i < n / 2 {
                -KNN_CLUSTER_OFFSET
            } else {
                KNN_CLUSTER_OFFSET
            };
            [cx + normal.sample(&mut rng), normal.sample(&mut rng)]
        })
        .collect();
    let mut g = Graph::empty(n)?;
    for i in 0..n {
        let mut others: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| {
                let d =
                    (points[i][0] - points[j][0]).powi(2) + (points[i][1] - points[j][1]).powi(2);
                (d, j)
            })
            .collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, j) in others.iter().take(k) {
            g.set_weight(i, j, 1.0)?;
        }
    }
    Ok(g)
}

/// Symmetrized k-nearest-neighbor graph of `n` points drawn from two 2-D
/// unit-covariance Gaussians centered at `(±3, 0)`, `n/2` points each.
///
/// Disconnected draws are redrawn with the next seed.
pub fn gen_knn(n: usize, k: usize, seed: u64) -> Result<Graph> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "k-NN graph needs an even node count, got {n}"
        )));
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "neighbor count must lie in [1, {n}), got {k}"
        )));
    }
    let mut attempt = seed;
    loop {
        let g = knn_once(n, k, attempt)?;
        if g.components().len() == 1 {
            return Ok(g);
        }
        log::warn!(
            "k-NN draw with seed {attempt} is disconnected; retrying with seed {}",
            attempt.wrapping_add(1)
        );
        attempt = attempt.wrapping_add(1);
        if attempt.wrapping_sub(seed) > 10_000 {
            return Err(Error::InvalidParameter(format!(
                "no connected k-NN graph found for n={n}, k={k}"
            )));
        }
    }
}

/// Random connected graph: a random spanning tree plus each remaining pair
/// independently with probability `extra_prob`; weights uniform in `[0.5, 2]`.
pub fn random_connected_graph(n: usize, extra_prob: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = random_tree_with(n, &mut rng);
    for u in 0..n {
        for v in u + 1..n {
            if g.weight(u, v) == 0.0 && rng.random::<f64>() < extra_prob {
                g.set_weight(u, v, rng.random_range(0.5..2.0))
                    .expect("valid pair");
            }
        }
    }
    g
}

/// Random weighted tree (uniform random attachment over a shuffled node
/// order), weights uniform in `[0.5, 2]`.
pub fn random_tree(n: usize, seed: u64) -> Graph {
    random_tree_with(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn random_tree_with(n: usize, rng: &mut ChaCha8Rng) -> Graph {
    assert!(n >= 2, "need at least 2 nodes");
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut g = Graph::empty(n).expect("n >= 2");
    for i in 1..n {
        let parent = order[rng.random_range(0..i)];
        g.set_weight(order[i], parent, rng.random_range(0.5..2.0))
            .expect("valid pair");
    }
    g
}

/// An ego network restricted to its largest connected component.
#[derive(Debug, Clone)]
pub struct EgoNetwork {
    pub graph: Graph,
    /// Original identifier of each node, indexed by new node id.
    pub original_ids: Vec<String>,
    pub skipped_self_loops: usize,
}

fn id_order(a: &str, b: &str) -> std::cmp::Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        _ => a.cmp(b),
    }
}

/// Reads a whitespace-separated `u v` edge list with arbitrary node ids and
/// keeps the largest connected component, unit weights.
///
/// New ids follow the sorted order of the original ids, so the result does
/// not depend on line order.
pub fn read_ego_edges(path: &Path) -> Result<EgoNetwork> {
    let text = fs::read_to_string(path)?;
    parse_ego_edges(&text, path)
}

pub fn parse_ego_edges(text: &str, path: &Path) -> Result<EgoNetwork> {
    let mut edges = BTreeSet::new();
    let mut skipped_self_loops = 0;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 2 {
            return Err(Error::parse(path, lineno + 1, "expected `u v`"));
        }
        let (a, b) = (fields[0].to_string(), fields[1].to_string());
        if a == b {
            skipped_self_loops += 1;
            continue;
        }
        let key = if id_order(&a, &b).is_le() {
            (a, b)
        } else {
            (b, a)
        };
        edges.insert(key);
    }
    if skipped_self_loops > 0 {
        log::warn!(
            "{}: skipped {skipped_self_loops} self-loop lines",
            path.display()
        );
    }
    if edges.is_empty() {
        return Err(Error::parse(path, 1, "no edges"));
    }

    let mut ids: Vec<String> = edges
        .iter()
        .flat_map(|(a, b)| [a.clone(), b.clone()])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    ids.sort_by(|a, b| id_order(a, b));
    let index: BTreeMap<&str, usize> = ids
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let mut adj = vec![Vec::new(); ids.len()];
    for (a, b) in &edges {
        let (i, j) = (index[a.as_str()], index[b.as_str()]);
        adj[i].push(j);
        adj[j].push(i);
    }
    // largest component; ties go to the one with the smallest member
    let comps = components_of(&adj);
    let largest = comps
        .iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
        .expect("at least one component");
    let remap: BTreeMap<usize, usize> = largest
        .iter()
        .enumerate()
        .map(|(new, &old)| (old, new))
        .collect();
    let mut graph = Graph::empty(largest.len())?;
    for (a, b) in &edges {
        let (i, j) = (index[a.as_str()], index[b.as_str()]);
        if let (Some(&x), Some(&y)) = (remap.get(&i), remap.get(&j)) {
            graph.set_weight(x, y, 1.0)?;
        }
    }
    Ok(EgoNetwork {
        graph,
        original_ids: largest.iter().map(|&i| ids[i].clone()).collect(),
        skipped_self_loops,
    })
}
