//! Command line and HTTP front ends for the `breakglass` library.

pub mod api;
pub mod cli;
pub mod output;
pub mod report;
