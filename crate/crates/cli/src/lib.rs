//! Library surface of the command-line front end: configuration schema,
//! grid file formats, and the subcommand drivers.

pub mod commands;
pub mod config;
pub mod gridfile;
