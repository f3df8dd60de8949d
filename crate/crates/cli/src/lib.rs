//! Library side of the experiment runner: scenario parsing, simulator
//! construction and the subcommand implementations. The binary in
//! `main.rs` is a thin argument-parsing shell over these.

pub mod commands;
pub mod config;
pub mod scenario;
