//! Experiment harness behind the `circle-lab` binary.
//!
//! Every run echoes its resolved configuration and the library version into
//! the CSV header, writes the CSV and a JSON summary atomically, and maps
//! errors to exit codes: [`EXIT_OK`], [`EXIT_INTERNAL`], [`EXIT_REFUSAL`],
//! [`EXIT_USAGE`].

pub mod cache;
mod commands;
pub mod output;

pub use cache::{Cache, CacheStatus, GaussTable};
pub use commands::run;
pub use output::{Config, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_REFUSAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable overriding the default cache directory.
pub const CACHE_ENV: &str = "CIRCLE_LAB_CACHE";
