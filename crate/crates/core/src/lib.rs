//! Anchor-free graph embedding by sequential lateration.
//!
//! A seed clique is placed by classical scaling and every remaining node is
//! placed by classical lateration against its already-placed neighbors. The
//! crate also carries s-stress minimizers (gradient descent and SMACOF), the
//! accuracy-constant calculator for the sequential procedure, random
//! geometric graph generators with additive/multiplicative noise, and an
//! experiment harness that writes CSV and SVG summaries.

pub mod embedders;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod graph;
pub mod sequential;
pub mod stress;

pub use embedders::{classical_lateration, classical_scaling, ScalingOutput};
pub use error::{Error, Result};
pub use experiment::{
    level_medians, loglog_slope, median, preset, read_results_csv, run_experiment, run_scenario, timing_study,
    write_results_csv, write_svg_scatter, Method, Overrides, ResultRow, ScenarioConfig, SlopeFit, TimingRow,
};
pub use geometry::{
    embedding_error, in_general_position, pairwise_sq_dists, procrustes_align, shape_stats, Alignment,
    Configuration, RigidTransform, ShapeStats,
};
pub use graph::{
    apply_noise, find_laterative_ordering, geometric_graph, is_laterative_ordering, sample_domain, CliqueStrategy,
    DissimilarityGraph, DomainSpec, LaterativeOrdering, NoiseModel, NoiseReport, NoiseSpec,
};
pub use sequential::{
    sequential_laterate_best, sequential_laterate_first, sequential_laterate_from, theory_bound, verify_perturbation_bound, EmbeddingResult,
    LaterationOptions, PerturbationDiagnostics, Provenance, TheoryBound,
};
pub use stress::{
    make_scaling_instance, minimize_gd, minimize_smacof, raw_stress, s_stress, s_stress_gradient, Init, OptimizerConfig,
    OptimizerReport, ScalingInstance, TraceRow,
};

/// Formats a float with 17 significant digits, enough for an exact round trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
