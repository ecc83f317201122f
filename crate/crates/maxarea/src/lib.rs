//! Files and command line for `maxarea-core`.
//!
//! Fields are CSV tables `i,j,x,y,u` with 17 significant digits, configs and
//! reports are JSON, plot data are whitespace separated `x y u` tables. Each
//! command writes into a fresh run directory with a `run.json` manifest.

pub mod cli;
pub mod commands;
pub mod config;
pub mod expr;
pub mod formats;
pub mod manifest;
