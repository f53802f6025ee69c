//! Trace minimization under resistance upper bounds,
//!
//! ```text
//! minimize tr(L(w)) = 2 Σ w   subject to   r_w(u,v) ≤ r̄(u,v) on S,  w ≥ 0,
//! ```
//!
//! solved with an increasing quadratic penalty on the violations. Each
//! resistance is convex in `w`, so every penalized subproblem is convex and
//! projected gradient descent solves it; iterates are warm-started across
//! the penalty schedule.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use crate::descent::{self, Smooth};
use crate::error::{Error, Result};
use crate::graph::{pair_count, Graph};
use crate::lsq::{LearnResult, SolverConfig};
use crate::measurements::MeasurementSet;
use crate::similarity::ResistanceOperator;

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyConfig {
    pub rho_init: f64,
    pub rho_growth: f64,
    pub rho_max: f64,
    /// Largest acceptable violation `max (r - r̄)₊`, relative to the mean
    /// target.
    pub violation_tol: f64,
    /// Settings of each penalized subproblem solve; `block_size`,
    /// `lambda_grid` and `init` are ignored.
    pub inner: SolverConfig,
    /// After the schedule, scale all weights up just enough to satisfy every
    /// constraint (resistances scale by the inverse factor).
    pub rescale_feasible: bool,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            rho_init: 1.0,
            rho_growth: 10.0,
            rho_max: 1e8,
            violation_tol: 1e-3,
            inner: SolverConfig {
                max_iters: 1000,
                ..SolverConfig::default()
            },
            rescale_feasible: true,
        }
    }
}

impl PenaltyConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !(positive(self.rho_init) && positive(self.rho_max) && positive(self.violation_tol)) {
            return Err(Error::InvalidParameter(
                "penalty parameters must be positive".into(),
            ));
        }
        if !(self.rho_growth > 1.0 && self.rho_growth.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "penalty growth must exceed 1, got {}",
                self.rho_growth
            )));
        }
        self.inner.validate()
    }
}

/// `tr(L(w)) + ρ Σ_S max(0, r_w - r̄)²`.
pub struct PenalizedTrace<'a> {
    ms: &'a MeasurementSet,
    pairs: Vec<usize>,
    pub rho: f64,
}

impl<'a> PenalizedTrace<'a> {
    pub fn new(ms: &'a MeasurementSet, rho: f64) -> Self {
        Self {
            ms,
            pairs: ms.pair_indices(),
            rho,
        }
    }

    fn violations(&self, op: &ResistanceOperator) -> Vec<f64> {
        self.pairs
            .iter()
            .zip(self.ms.entries())
            .map(|(&i, e)| (op.diagonal(i) - e.rbar).max(0.0))
            .collect()
    }

    /// Objective at `w`, or `None` when `w` is disconnected.
    pub fn objective(&self, w: &[f64]) -> Option<f64> {
        descent::evaluate(self, w).map(|e| e.value)
    }
}

impl Smooth for PenalizedTrace<'_> {
    fn n(&self) -> usize {
        self.ms.n()
    }

    fn value(&self, op: &ResistanceOperator, w: &[f64]) -> f64 {
        let penalty: f64 = self.violations(op).iter().map(|v| v * v).sum();
        2.0 * w.iter().sum::<f64>() + self.rho * penalty
    }

    // same structure as the least-squares gradient with Δ replaced by the
    // thresholded violations: ∂/∂w_i = 2 - 2ρ Σ_j v_j R_ij²
    fn partials(&self, op: &ResistanceOperator, _w: &[f64], coords: &[usize]) -> Vec<f64> {
        let v = self.violations(op);
        op.squared_apply(coords, &self.pairs, &v)
            .into_iter()
            .map(|s| 2.0 - 2.0 * self.rho * s)
            .collect()
    }

    fn partial_cost(&self, coords: usize) -> u64 {
        (coords * self.pairs.len()) as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slack {
    pub u: usize,
    pub v: usize,
    pub rbar: f64,
    pub r: f64,
    /// `r̄ - r`; negative means violated.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub entries: Vec<Slack>,
    /// `tr(L)` of the checked graph.
    pub trace: f64,
    pub min_slack: f64,
    /// `max (r - r̄)₊ / mean r̄`.
    pub max_relative_violation: f64,
    pub feasible: bool,
}

impl FeasibilityReport {
    /// `u,v,rbar,r,slack` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,v,rbar,r,slack\n");
        for s in &self.entries {
            let _ = writeln!(out, "{},{},{},{},{}", s.u, s.v, s.rbar, s.r, s.slack);
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Slack `r̄ - r_g` on every measured pair; feasible iff the smallest slack
/// is at least `-tol`.
pub fn check_feasible(g: &Graph, ms: &MeasurementSet, tol: f64) -> Result<FeasibilityReport> {
    if g.n() != ms.n() {
        return Err(Error::SizeMismatch {
            expected: ms.n(),
            found: g.n(),
        });
    }
    let op = ResistanceOperator::new(g)?;
    let entries: Vec<Slack> = ms
        .entries()
        .iter()
        .map(|e| {
            let r = op.resistance(e.u, e.v);
            Slack {
                u: e.u,
                v: e.v,
                rbar: e.rbar,
                r,
                slack: e.rbar - r,
            }
        })
        .collect();
    let min_slack = entries
        .iter()
        .map(|s| s.slack)
        .fold(f64::INFINITY, f64::min);
    let mean = ms.mean_target();
    let max_violation = entries
        .iter()
        .map(|s| (-s.slack).max(0.0))
        .fold(0.0, f64::max);
    Ok(FeasibilityReport {
        trace: g.laplacian().trace(),
        min_slack,
        max_relative_violation: if mean > 0.0 {
            max_violation / mean
        } else {
            f64::INFINITY
        },
        feasible: entries.is_empty() || min_slack >= -tol,
        entries,
    })
}

#[derive(Debug, Clone)]
pub struct ConvexResult {
    pub learn: LearnResult,
    pub report: FeasibilityReport,
    /// Penalty weight of the last subproblem solved.
    pub final_rho: f64,
    /// Relative violation of the penalty iterate before any rescaling.
    pub penalty_violation: f64,
    /// Whether the returned graph meets `violation_tol`.
    pub feasible_at_tolerance: bool,
}

/// Complete graph whose resistances are at most half the smallest target.
pub fn feasible_start(ms: &MeasurementSet) -> Vec<f64> {
    let n = ms.n();
    let min_target = ms
        .entries()
        .iter()
        .map(|e| e.rbar)
        .fold(f64::INFINITY, f64::min);
    // K_n with weight c has r = 2 / (n c)
    vec![4.0 / (n as f64 * min_target); pair_count(n)]
}

pub fn solve_convex(ms: &MeasurementSet, config: &PenaltyConfig) -> Result<ConvexResult> {
    config.validate()?;
    if ms.is_empty() {
        return Err(Error::EmptySample);
    }
    if let Some(e) = ms.entries().iter().find(|e| !(e.rbar > 0.0)) {
        return Err(Error::Infeasible(format!(
            "upper bound {} on ({}, {}) is not positive",
            e.rbar, e.u, e.v
        )));
    }
    let clock = Instant::now();
    let n = ms.n();
    let mean = ms.mean_target();
    let inner = SolverConfig {
        block_size: 0,
        ..config.inner.clone()
    };

    let mut w = feasible_start(ms);
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut r_entries = 0;
    let mut stop_reason;
    let mut rho = config.rho_init;
    let mut violation;
    loop {
        let problem = PenalizedTrace::new(ms, rho);
        let state = descent::run(&problem, w, &inner, iterations, clock)?;
        iterations += state.iterations;
        r_entries += state.r_entries;
        stop_reason = state.stop_reason;
        let skip = usize::from(!trace.is_empty());
        trace.extend(state.trace.into_iter().skip(skip));
        w = state.w;

        let g = Graph::from_weights(n, w.clone())?;
        violation = check_feasible(&g, ms, 0.0)?.max_relative_violation;
        log::debug!(
            "rho {rho:e}: relative violation {violation:e}, trace {}",
            2.0 * g.total_weight()
        );
        if violation <= config.violation_tol {
            break;
        }
        let next = rho * config.rho_growth;
        if next > config.rho_max * (1.0 + 1e-12) {
            break;
        }
        rho = next;
    }
    let penalty_violation = violation;

    let mut graph = Graph::from_weights(n, w)?;
    if config.rescale_feasible {
        let report = check_feasible(&graph, ms, 0.0)?;
        let factor = report
            .entries
            .iter()
            .map(|s| s.r / s.rbar)
            .fold(1.0, f64::max);
        if factor > 1.0 {
            graph = graph.scaled(factor);
        }
    }
    let report = check_feasible(&graph, ms, config.violation_tol * mean)?;
    let feasible_at_tolerance = report.max_relative_violation <= config.violation_tol;
    if !feasible_at_tolerance {
        log::warn!(
            "penalty schedule ended at rho {rho:e} with relative violation {:e}",
            report.max_relative_violation
        );
    }
    Ok(ConvexResult {
        learn: LearnResult {
            graph,
            objective_trace: trace,
            iterations,
            wall_time: clock.elapsed().as_secs_f64(),
            stop_reason,
            r_entries_computed: r_entries,
        },
        report,
        final_rho: rho,
        penalty_violation,
        feasible_at_tolerance,
    })
}
