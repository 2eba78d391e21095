//! Simulation harness: code building, WER sweeps, curve analysis and CSV
//! output.

pub mod analysis;
pub mod build;
pub mod config;
pub mod report;
pub mod sweep;

pub use analysis::{estimate_diversity_order, horizontal_gap, snr_at, CurvePoint, SlopeFit};
pub use build::{build_code, build_from_source, load_code, BuildError, BuildOptions, BuiltCode};
pub use config::{hash_text, CodeSource, ConfigError, Precision, SweepConfig, SweepScenario};
pub use sweep::{run_wer_sweep, run_wer_sweep_with, SweepError, Telemetry, WerPoint};
