//! Scenario configuration, figure presets, sweeps and output for the
//! `cavity-discord` command-line tool.

pub mod config;
pub mod output;
pub mod preset;
pub mod scenario;
pub mod settling;

pub use config::{parse_config, ScenarioConfig};
pub use preset::Preset;
pub use scenario::run_scenario;
