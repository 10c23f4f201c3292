//! Library surface of the command-line tool: argument types, file formats,
//! configuration schema, and the subcommand implementations. The `spectral-lab`
//! binary is a thin dispatcher over [`commands`].

pub mod commands;
pub mod config;
pub mod errors;
pub mod formats;
