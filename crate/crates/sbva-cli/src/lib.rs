//! The simulated-competition pipeline: scramble, preprocess, and solve
//! each instance under time budgets, reporting PAR-2 scores.

pub mod pipeline;

pub use pipeline::{
    compression_factor, run_pipeline, HarnessError, PipelineConfig, RepeatResult, RunResult,
    SolveStatus, Variant, CSV_HEADER, SOLVER_ENV_VAR,
};
