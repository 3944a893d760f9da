//! Metrics, dataset statistics, timing and synthetic data.

mod bench;
mod metrics;
mod report;
mod stats;
mod synth;

pub use bench::{latency_benchmark, LatencyStats};
pub use metrics::*;
pub use report::{evaluate, EvalInput, EvalReport, SequenceReport};
pub use stats::*;
pub use synth::{generate_synthetic_sequence, Jump, Motion, MotionSpec};
