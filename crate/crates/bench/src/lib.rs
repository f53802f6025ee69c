//! Shared fixtures for the benchmarks.

use resgraph::datasets::gen_grid;
use resgraph::measurements::{measure, sample_pairs, MeasurementSet, NoiseSpec};
use resgraph::Graph;

/// A `side × side` grid and a noiseless sample of fraction `f` of its pairs.
pub fn grid_problem(side: usize, f: f64, seed: u64) -> (Graph, MeasurementSet) {
    let g = gen_grid(side, side).expect("grid dimensions are positive");
    let pairs = sample_pairs(g.n(), f, seed).expect("sample is nonempty");
    let ms = measure(&g, &pairs, NoiseSpec::noiseless()).expect("grid is connected");
    (g, ms)
}
