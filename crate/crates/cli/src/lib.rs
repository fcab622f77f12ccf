//! Configuration-driven front end: oracle self-tests, manufactured
//! convergence studies and simulation runs with snapshot export.

pub mod commands;
pub mod config;
pub mod output;
pub mod selftest;
