//! Library side of the `ltk` binary: run configuration, method dispatch,
//! table output and the validation suite.

// `!(x > 0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod output;
pub mod run;
pub mod tables;
pub mod validate;

pub use error::{CliError, CliResult};

/// Version of every JSON document the CLI emits.
pub const SCHEMA_VERSION: u32 = 1;

/// Worker threads requested through `LTK_THREADS`, if set and valid.
pub fn threads_from_env() -> Option<usize> {
    std::env::var("LTK_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
}
