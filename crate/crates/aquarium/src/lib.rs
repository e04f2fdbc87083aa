//! File formats, rendering, checkpoints and the command-line front end for
//! the `aquarium-core` simulation.

pub mod adapter;
pub mod checkpoint;
pub mod cli;
pub mod config_file;
pub mod export;
pub mod log;
pub mod render;

pub use aquarium_core as core;
