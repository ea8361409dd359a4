//! Configuration ingestion, command dispatch and result files.
//!
//! Configuration is flat `key = value` text. Values are resolved in order:
//! built-in defaults, a named preset, the config file, then command-line
//! overrides. The manifest written next to the results is itself a config
//! file that reproduces the run.

mod config;
mod dispatch;
mod output;

pub use config::{parse_config, parse_config_str, parse_pairs, preset_pairs, Command, RunConfig, Settings, KEYS, PRESETS};
pub use dispatch::{dispatch, Outcome};
pub use output::write_atomic;
