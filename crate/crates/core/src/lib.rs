//! Maximum-likelihood sequence detection for PAM4 over a 2-tap ISI channel
//! `[1, alpha]`.
//!
//! The crate provides a serial sliding-block Viterbi detector, a parallel
//! block detector, a layered 2-step detector with logarithmic ACS depth,
//! computationally simplified and reduced-state versions of both, a hardware
//! cost model with instrumented operation counting, and a small simulation
//! chain (PRBS, Gray mapping, ISI channel, LMS equalizer, post-filter).

pub mod blocks;
pub mod cost;
pub mod error;
pub mod harness;
pub mod layered;
pub mod signal;
pub mod simplified;
pub mod symbol;
pub mod trellis;

pub use blocks::{
    detect_block_1s, detect_frame, detect_frame_instrumented, segment_frame, segment_frame_with,
    with_workers, Block, BlockConfig, BlockDetector,
};
pub use cost::{
    dynamic_counts, first_layer_counts, latency_units, stage_counts, static_counts, CostTrace,
    FirstLayerVariant, OpCounter, ResourceCounts, VariantId,
};
pub use error::{MlseError, Result};
pub use layered::{
    detect_block_l2s, detect_block_l2s_traced, latency_of_plan, merge_tables, two_step_unit,
    LayerPlan, MetricTable,
};
pub use simplified::{
    build_abcd, build_ef, build_f, candidate_set, detect_block_1s_simplified,
    detect_block_l2s_simplified, eval_two_step_simplified, AbcdTables, CandidateSet, EfTables,
};
pub use symbol::{demap_pam4, map_pam4, slice_pam4, Pam4Symbol, StateSet, SymbolFrame};
pub use trellis::{
    acs_step, branch_metric, branch_metric_general, brute_force_detect, viterbi_detect_serial,
    AlphaCoeff, Boundary, DetectionResult, OracleResult, PathMetrics,
};
