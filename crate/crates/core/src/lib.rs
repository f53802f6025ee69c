//! Learning weighted graphs from node similarity measurements.
//!
//! The crate covers exact reconstruction from effective resistances, hitting
//! times and personalized PageRank, least-squares learning from a partial and
//! possibly noisy set of resistances, and a convex trace-minimization
//! relaxation. Graph generators and evaluation metrics live alongside.

pub mod convex;
pub mod datasets;
mod descent;
pub mod error;
pub mod exact;
pub mod graph;
pub mod linalg;
pub mod lsq;
pub mod measurements;
pub mod metrics;
pub mod similarity;

pub use convex::{check_feasible, solve_convex, ConvexResult, FeasibilityReport, PenaltyConfig};
pub use error::{Error, Result};
pub use exact::{
    metric_completion, reconstruct_from_hitting, reconstruct_from_ppr, reconstruct_full,
    reconstruct_tree,
};
pub use graph::{pair_count, pair_index, pair_of, Graph, PairIndex};
pub use linalg::SymMatrix;
pub use lsq::{
    solve_block_cd, solve_gd, InitMode, LearnResult, SolverConfig, StopReason, TracePoint,
};
pub use measurements::{measure, sample_pairs, Measurement, MeasurementSet, NoiseScale, NoiseSpec};
pub use metrics::{evaluate, Evaluation};
pub use similarity::{effective_resistance, hitting_times, ppr_matrix, ResistanceOperator};
