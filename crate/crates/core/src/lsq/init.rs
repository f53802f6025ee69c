use crate::descent::Smooth;
use crate::error::Result;
use crate::exact::{double_center, metric_completion, table_to_dense};
use crate::graph::pair_count;
use crate::linalg::{spectral_map, RELATIVE_EIGEN_CUTOFF};
use crate::measurements::MeasurementSet;
use crate::similarity::ResistanceOperator;

use super::LeastSquares;

/// Eight logarithmically spaced values in `[1e-4, 1]`, times the mean target.
pub fn default_lambda_grid(ms: &MeasurementSet) -> Vec<f64> {
    let mean = ms.mean_target();
    let scale = if mean > 0.0 { mean } else { 1.0 };
    (0..8)
        .map(|k| scale * 10f64.powf(-4.0 + 4.0 * k as f64 / 7.0))
        .collect()
}

pub fn uniform_weights(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; pair_count(n)]
}

/// Regularized closed-form starting point.
///
/// Unmeasured pairs are filled in with shortest-path distances, and the
/// completed table `R` is double-centered to `X = (I - J/n) R (I - J/n)`.
/// For each `λ` in the grid, the candidate Laplacian is
/// `-2 Σ_k v_k v_kᵀ / (θ_k - λ)` over the eigenpairs of `X` with `θ_k < 0`,
/// which is the exact inverse formula at `λ = 0` and damps the large
/// entries that noise produces in the inverse otherwise. Positive
/// off-diagonals are dropped, and the candidate with the lowest objective
/// on the measurements wins. Falls back to [`uniform_weights`] if every
/// candidate is disconnected.
pub fn initialize(ms: &MeasurementSet, lambda_grid: &[f64]) -> Result<Vec<f64>> {
    let n = ms.n();
    let completed = metric_completion(ms)?;
    let eig = double_center(&table_to_dense(&completed, n)).eigen();
    let largest = eig.eigenvalues.iter().fold(0.0_f64, |a, l| a.max(l.abs()));
    let cutoff = RELATIVE_EIGEN_CUTOFF * largest;
    let problem = LeastSquares::new(ms);

    let mut best: Option<(f64, Vec<f64>)> = None;
    for &lambda in lambda_grid {
        let laplacian = spectral_map(&eig, |theta| {
            (theta < -cutoff).then(|| -2.0 / (theta - lambda))
        });
        let weights: Vec<f64> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .map(|(u, v)| (-laplacian.get(u, v)).max(0.0))
            .collect();
        let Ok(op) = ResistanceOperator::from_weights(n, &weights) else {
            log::debug!("lambda {lambda}: candidate is disconnected");
            continue;
        };
        let value = problem.value(&op, &weights);
        log::debug!("lambda {lambda}: objective {value}");
        if value.is_finite() && best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, weights));
        }
    }
    Ok(match best {
        Some((_, w)) => w,
        None => {
            log::warn!("every spectral candidate is disconnected; using uniform weights");
            uniform_weights(n)
        }
    })
}
