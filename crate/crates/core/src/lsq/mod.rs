//! Least-squares graph learning: find nonnegative edge weights `w` whose
//! effective resistances match the targets on the measured pairs,
//!
//! ```text
//! F(w) = Σ_{(u,v) ∈ S} (r_w(u,v) - r̄(u,v))²,
//! ```
//!
//! by projected gradient descent or random block coordinate descent, started
//! from a regularized spectral estimate.

mod init;
mod problem;

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::descent;
use crate::error::{Error, Result};
use crate::graph::{pair_count, Graph};
use crate::measurements::MeasurementSet;

pub use init::{default_lambda_grid, initialize, uniform_weights};
pub use problem::{
    error_vector, gradient, hessian, objective, project_nonneg, ErrorVector, LeastSquares,
};

#[derive(Debug, Clone, PartialEq)]
pub enum InitMode {
    /// Regularized closed-form estimate from the metric completion.
    Spectral,
    /// `1/n` on every pair.
    Uniform,
    Given(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Stop when `‖projected gradient‖∞ ≤ grad_tol · (1 + F)`.
    pub grad_tol: f64,
    /// Backtracking factor `β`.
    pub shrink: f64,
    /// Armijo constant `c`.
    pub sufficient_decrease: f64,
    /// Coordinates updated per iteration; 0 means all.
    pub block_size: usize,
    /// `None` selects [`default_lambda_grid`].
    pub lambda_grid: Option<Vec<f64>>,
    pub seed: u64,
    pub init: InitMode,
    /// Stop as stalled when the objective drops by at most
    /// `stall_tol · F` over this many iterations. 0 disables the check.
    pub stall_window: usize,
    pub stall_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            grad_tol: 1e-8,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            block_size: 0,
            lambda_grid: None,
            seed: 0,
            init: InitMode::Spectral,
            stall_window: 20,
            stall_tol: 1e-12,
        }
    }
}

impl SolverConfig {
    /// Defaults for block coordinate descent with the given block size.
    pub fn block(block_size: usize) -> Self {
        Self {
            max_iters: 5000,
            block_size,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad(format!(
                "shrink factor must lie in (0, 1), got {}",
                self.shrink
            ));
        }
        if !(self.sufficient_decrease > 0.0 && self.sufficient_decrease < 1.0) {
            return bad(format!(
                "sufficient-decrease constant must lie in (0, 1), got {}",
                self.sufficient_decrease
            ));
        }
        if !(self.grad_tol >= 0.0) || !(self.stall_tol >= 0.0) {
            return bad("tolerances must be nonnegative".into());
        }
        if let Some(grid) = &self.lambda_grid {
            if grid.is_empty() || grid.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
                return bad("lambda grid must be a nonempty list of nonnegative reals".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Converged,
    MaxIters,
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub iter: usize,
    pub objective: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct LearnResult {
    pub graph: Graph,
    pub objective_trace: Vec<TracePoint>,
    pub iterations: usize,
    pub wall_time: f64,
    pub stop_reason: StopReason,
    /// Entries of the resistance operator formed for gradients.
    pub r_entries_computed: u64,
}

impl LearnResult {
    pub fn final_objective(&self) -> f64 {
        self.objective_trace
            .last()
            .map_or(f64::NAN, |t| t.objective)
    }

    /// `iter,objective,wall_seconds` CSV.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iter,objective,wall_seconds\n");
        for t in &self.objective_trace {
            let _ = writeln!(out, "{},{},{}", t.iter, t.objective, t.wall_seconds);
        }
        out
    }

    pub fn write_trace(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.trace_csv())?;
        Ok(())
    }
}

fn starting_point(ms: &MeasurementSet, config: &SolverConfig) -> Result<Vec<f64>> {
    match &config.init {
        InitMode::Spectral => {
            let grid = config
                .lambda_grid
                .clone()
                .unwrap_or_else(|| default_lambda_grid(ms));
            initialize(ms, &grid)
        }
        InitMode::Uniform => Ok(uniform_weights(ms.n())),
        InitMode::Given(w) => {
            if w.len() != pair_count(ms.n()) {
                return Err(Error::SizeMismatch {
                    expected: pair_count(ms.n()),
                    found: w.len(),
                });
            }
            Ok(w.clone())
        }
    }
}

fn solve(ms: &MeasurementSet, config: &SolverConfig) -> Result<LearnResult> {
    config.validate()?;
    if ms.is_empty() {
        return Err(Error::EmptySample);
    }
    let clock = Instant::now();
    let w0 = starting_point(ms, config)?;
    let problem = LeastSquares::new(ms);
    let state = descent::run(&problem, w0, config, 0, clock)?;
    descent::into_result(state, ms.n(), clock)
}

/// Projected gradient descent with Armijo line search on the full gradient.
pub fn solve_gd(ms: &MeasurementSet, config: &SolverConfig) -> Result<LearnResult> {
    let config = SolverConfig {
        block_size: 0,
        ..config.clone()
    };
    solve(ms, &config)
}

/// Random block coordinate descent: each iteration updates only a fresh
/// uniformly drawn block of `config.block_size` pairs.
pub fn solve_block_cd(ms: &MeasurementSet, config: &SolverConfig) -> Result<LearnResult> {
    if config.block_size == 0 {
        return Err(Error::InvalidParameter(
            "block coordinate descent needs block_size >= 1".into(),
        ));
    }
    solve(ms, config)
}
