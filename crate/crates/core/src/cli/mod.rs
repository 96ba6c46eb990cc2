//! Library side of the `mme` command-line tool.

pub mod config;
pub mod output;
pub mod preset;
pub mod run;

pub use config::{parse_grid, ConfigFile, InitialState, Mode, RunConfig};
pub use preset::{apply_preset, preset, preset_config, Preset};
pub use run::{run, sweep, RunReport, Summary, SweepReport};

/// Environment variable naming the default output root.
pub const OUT_DIR_ENV: &str = "MME_OUT_DIR";
