//! Command-line and HTTP frontends for the taxotrace engine.

pub mod api;
pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
