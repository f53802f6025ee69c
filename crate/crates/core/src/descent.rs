//! Projected gradient descent over edge-weight vectors with Armijo
//! backtracking, optionally restricted to a random coordinate block per
//! iteration.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::lsq::{LearnResult, SolverConfig, StopReason, TracePoint};
use crate::similarity::ResistanceOperator;

const MAX_BACKTRACKS: usize = 60;

/// A smooth objective of the edge weights whose value and gradient are
/// expressed through the resistance operator of the current graph.
pub(crate) trait Smooth: Sync {
    fn n(&self) -> usize;

    fn value(&self, op: &ResistanceOperator, w: &[f64]) -> f64;

    /// Partial derivatives for the listed coordinates, in the same order.
    fn partials(&self, op: &ResistanceOperator, w: &[f64], coords: &[usize]) -> Vec<f64>;

    /// Entries of `R` formed to compute `coords.len()` partials.
    fn partial_cost(&self, coords: usize) -> u64;
}

pub(crate) struct Evaluated {
    pub value: f64,
    pub op: ResistanceOperator,
}

/// `None` when the weights describe a disconnected graph; such points are
/// treated as having infinite objective.
pub(crate) fn evaluate<P: Smooth>(problem: &P, w: &[f64]) -> Option<Evaluated> {
    let op = ResistanceOperator::factored(problem.n(), w)?;
    let value = problem.value(&op, w);
    value.is_finite().then_some(Evaluated { value, op })
}

pub(crate) fn project_nonneg_in_place(w: &mut [f64]) {
    for x in w.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

/// Component of the gradient that survives projection onto `w ≥ 0`.
#[inline]
fn projected_component(w: f64, g: f64) -> f64 {
    if w > 0.0 {
        g
    } else {
        g.min(0.0)
    }
}

pub(crate) struct DescentState {
    pub w: Vec<f64>,
    pub trace: Vec<TracePoint>,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub r_entries: u64,
}

/// Runs projected descent from `w0`. Iteration numbers in the trace start at
/// `iter_offset`; `clock` is the run's start time.
pub(crate) fn run<P: Smooth>(
    problem: &P,
    w0: Vec<f64>,
    config: &SolverConfig,
    iter_offset: usize,
    clock: Instant,
) -> Result<DescentState> {
    config.validate()?;
    let m = w0.len();
    let mut w = w0;
    project_nonneg_in_place(&mut w);
    let Evaluated { mut value, mut op } = evaluate(problem, &w).ok_or(Error::Disconnected)?;

    let mut trace = vec![TracePoint {
        iter: iter_offset,
        objective: value,
        wall_seconds: clock.elapsed().as_secs_f64(),
    }];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let all: Vec<usize> = (0..m).collect();
    let block = if config.block_size == 0 || config.block_size >= m {
        None
    } else {
        Some(config.block_size)
    };
    let mut step: Option<f64> = None;
    let mut r_entries = 0u64;
    let mut stop_reason = StopReason::MaxIters;
    let mut iterations = 0;

    while iterations < config.max_iters {
        let coords: Vec<usize> = match block {
            None => all.clone(),
            Some(k) => rand::seq::index::sample(&mut rng, m, k).into_vec(),
        };
        let partials = problem.partials(&op, &w, &coords);
        r_entries += problem.partial_cost(coords.len());

        let pg_norm = coords
            .iter()
            .zip(&partials)
            .map(|(&i, &g)| projected_component(w[i], g).abs())
            .fold(0.0, f64::max);
        if block.is_none() && pg_norm <= config.grad_tol * (1.0 + value.abs()) {
            stop_reason = StopReason::Converged;
            break;
        }
        iterations += 1;
        if pg_norm == 0.0 {
            // a block with nothing to move; draw another
            continue;
        }

        let grad_max = partials.iter().fold(0.0_f64, |a, g| a.max(g.abs()));
        let w_max = w.iter().fold(0.0_f64, |a, x| a.max(*x));
        let mut eta = match step {
            Some(s) => 2.0 * s,
            None => w_max.max(1e-12) / grad_max,
        };

        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let mut trial = w.clone();
            let mut directional = 0.0;
            let mut moved = false;
            for (&i, &g) in coords.iter().zip(&partials) {
                let x = (w[i] - eta * g).max(0.0);
                directional += g * (x - w[i]);
                moved |= x != w[i];
                trial[i] = x;
            }
            if !moved {
                break;
            }
            if let Some(e) = evaluate(problem, &trial) {
                if e.value <= value + config.sufficient_decrease * directional {
                    accepted = Some((trial, e));
                    break;
                }
            }
            eta *= config.shrink;
        }

        let Some((trial, e)) = accepted else {
            stop_reason = StopReason::Stalled;
            break;
        };
        step = Some(eta);
        w = trial;
        value = e.value;
        op = e.op;
        trace.push(TracePoint {
            iter: iter_offset + iterations,
            objective: value,
            wall_seconds: clock.elapsed().as_secs_f64(),
        });

        let window = config.stall_window;
        if window > 0 && trace.len() > window {
            let past = trace[trace.len() - 1 - window].objective;
            if past - value <= config.stall_tol * past.abs() {
                stop_reason = StopReason::Stalled;
                break;
            }
        }
    }

    Ok(DescentState {
        w,
        trace,
        iterations,
        stop_reason,
        r_entries,
    })
}

pub(crate) fn into_result(state: DescentState, n: usize, clock: Instant) -> Result<LearnResult> {
    Ok(LearnResult {
        graph: Graph::from_weights(n, state.w)?,
        objective_trace: state.trace,
        iterations: state.iterations,
        wall_time: clock.elapsed().as_secs_f64(),
        stop_reason: state.stop_reason,
        r_entries_computed: state.r_entries,
    })
}
