//! Evaluation of learned graphs against measurements and the true graph.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{pair_count, Graph};
use crate::measurements::MeasurementSet;
use crate::similarity::ResistanceOperator;

/// `Σ_S (r_H - r̄)²`, the least-squares objective.
pub fn objective(h: &Graph, ms: &MeasurementSet) -> Result<f64> {
    check_size(h.n(), ms.n())?;
    let op = ResistanceOperator::new(h)?;
    Ok(ms
        .entries()
        .iter()
        .map(|e| (op.resistance(e.u, e.v) - e.rbar).powi(2))
        .sum())
}

/// `Σ_S (r_H - r̄)² / Σ_S r̄²`.
pub fn normalized_objective(h: &Graph, ms: &MeasurementSet) -> Result<f64> {
    let denom: f64 = ms.entries().iter().map(|e| e.rbar * e.rbar).sum();
    if denom == 0.0 {
        return Err(Error::UndefinedMetric(
            "all measured targets are zero".into(),
        ));
    }
    Ok(objective(h, ms)? / denom)
}

/// `Σ (r_H - r_G)² / Σ r_G²` over all unordered pairs.
pub fn generalization_error(h: &Graph, g_true: &Graph) -> Result<f64> {
    check_size(g_true.n(), h.n())?;
    let rh = ResistanceOperator::new(h)?.resistance_table();
    let rg = ResistanceOperator::new(g_true)?.resistance_table();
    let num: f64 = rh.iter().zip(&rg).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = rg.iter().map(|b| b * b).sum();
    Ok(num / den)
}

/// Pair indices of the `count` heaviest positive-weight edges, heaviest
/// first, ties broken by ascending pair index.
pub fn heaviest_edges(h: &Graph, count: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..h.weights().len())
        .filter(|&i| h.weights()[i] > 0.0)
        .collect();
    order.sort_by(|&a, &b| h.weights()[b].total_cmp(&h.weights()[a]).then(a.cmp(&b)));
    order.truncate(count);
    order
}

/// Percentage of the true graph's `m` edges found among the `m` heaviest
/// edges of `h`. When `h` has fewer than `m` edges all of them are used; the
/// denominator stays `m`.
pub fn edges_learned(h: &Graph, g_true: &Graph) -> Result<f64> {
    check_size(g_true.n(), h.n())?;
    let m = g_true.edge_count();
    if m == 0 {
        return Err(Error::UndefinedMetric("true graph has no edges".into()));
    }
    let hits = heaviest_edges(h, m)
        .into_iter()
        .filter(|&i| g_true.weights()[i] > 0.0)
        .count();
    Ok(100.0 * hits as f64 / m as f64)
}

/// Edge density of the true graph in percent, the expected edges-learned
/// score of a uniformly random guess.
pub fn baseline_density(g_true: &Graph) -> f64 {
    100.0 * g_true.edge_count() as f64 / pair_count(g_true.n()) as f64
}

fn check_size(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::SizeMismatch { expected, found });
    }
    Ok(())
}

/// All evaluation metrics of one learned graph. Fields that need the true
/// graph are `None` without it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub objective: f64,
    pub normalized_objective: f64,
    pub generalization_error: Option<f64>,
    pub edges_learned: Option<f64>,
    pub baseline: Option<f64>,
}

pub fn evaluate(h: &Graph, ms: &MeasurementSet, truth: Option<&Graph>) -> Result<Evaluation> {
    let objective = objective(h, ms)?;
    let normalized_objective = normalized_objective(h, ms)?;
    let (generalization_error, edges_learned, baseline) = match truth {
        Some(g) => (
            Some(generalization_error(h, g)?),
            Some(edges_learned(h, g)?),
            Some(baseline_density(g)),
        ),
        None => (None, None, None),
    };
    Ok(Evaluation {
        objective,
        normalized_objective,
        generalization_error,
        edges_learned,
        baseline,
    })
}
