//! Command-line front end: presets, JSON scenario files and output writing.

pub mod commands;
pub mod config;
pub mod presets;
