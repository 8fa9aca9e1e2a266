//! Sweep orchestration for the kicked-top learning pipeline: configuration
//! with presets and file/flag overrides, a parallel tau-sweep runner with
//! scheduling-independent seeding, and CSV/JSON emitters.

pub mod config;
pub mod emit;
pub mod sweep;

pub use config::{ConfigError, DiagnosticsFlags, Preset, SweepConfig, TauGrid};
pub use emit::OutputFormat;
pub use sweep::{run_sweep, OrderRecord, SweepError, SweepRecord, SweepResult};
