//! Experiment harness: the map catalog, the verification suite, report
//! writers and the command-line front end.

pub mod catalog;
pub mod cli;
pub mod fuzz;
pub mod report;
pub mod suite;

pub use cli::run;
