//! Library side of the `stabreg` command-line tool: configuration
//! parsing, command implementations and file formats.

pub mod commands;
pub mod config;
pub mod output;
