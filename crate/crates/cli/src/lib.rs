//! Configuration parsing and task orchestration for the `gauge-peps` binary.

pub mod config;
pub mod run;

pub use config::{parse_config, parse_layered, preset, ScenarioConfig, Task, TensorSource, PRESETS};
pub use run::{exit_code, run};
