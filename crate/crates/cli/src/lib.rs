//! Command-line front end for `cgf-core`: expression parsing, the named
//! commands and their text/JSON rendering.

pub mod commands;
pub mod parse;

pub use commands::{run, Cli, Command, Outcome};
pub use parse::{parse_expr, ParseError};
