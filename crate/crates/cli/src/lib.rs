//! Command-line front end for `logmod`: file formats and subcommands.

pub mod commands;
pub mod io;
