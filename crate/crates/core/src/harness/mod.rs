//! Experiment driver: configuration, BER / equivalence / sweep runs, resource
//! tables and CSV output.

pub mod complexity;
pub mod config;
pub mod experiment;
pub mod plot;

pub use complexity::{complexity_csv, instrumented_counts, run_complexity, ComplexityRow, COMPLEXITY_HEADER};
pub use config::{ChainMode, ExperimentConfig, Receiver};
pub use experiment::{
    aggregate_by_sigma, ber_csv, detect, run_ber, run_equiv, run_sweep, simulate_frame, BerRecord,
    EquivPoint, EquivReport, OverlapMismatch, SimFrame, SweepParam, SweepResult, TieDiagnostic,
    BER_HEADER,
};
