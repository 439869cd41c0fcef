//! Command-line front end: configuration, suites and the JSON report.

pub mod app;
pub mod config;
pub mod report;
pub mod suites;
