//! Mission documents and configuration files.

mod config;
mod mission;

pub use config::{read_config, Config, ConfigError, OriginSpec, CONFIG_KEYS};
pub use mission::{read_paths, write_mission, MissionError, FRAME, SCHEMA_VERSION};
