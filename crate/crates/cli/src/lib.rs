//! Data loading, experiment sweeps and report output for the `pcr` binary.

pub mod commands;
pub mod experiment;
pub mod io;
pub mod report;
