//! Command-line front end for `kkmkit-core`: JSON instance parsing, subcommand
//! dispatch, reports, and the randomized verification suites.

pub mod app;
pub mod config;
pub mod generators;
pub mod input;
pub mod oracles;
pub mod registry;
pub mod report;
pub mod suites;

pub use app::{dispatch, run};
