//! Experiment orchestration.

pub mod complexity;
pub mod config;
pub mod output;
pub mod selftest;
pub mod stats;
pub mod sweep;

pub use complexity::{complexity_report, ComplexityRow, ComplexityTable};
pub use config::{ChannelSpec, ClipNoiseConfig, ClipNoiseSource, DegradeConfig, ExperimentConfig};
pub use output::{BerRecord, ClipNoiseRecord, Metadata, Records, SweepResult};
pub use selftest::{run_selftest, Check, SelftestReport};
pub use stats::{bpsk_ber, wilson_interval, Interval, Z95};
pub use sweep::{
    ber_sweep, build_links, clipnoise_sweep, count_errors, degradation_noise, degradation_sweep,
    optimum_gain_search, Budget, DegradeKind, ErrorCount, GainSearch, Purpose, StreamKey,
};
