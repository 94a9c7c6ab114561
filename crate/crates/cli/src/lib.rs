//! File formats and loaders behind the `proprules` command.

pub mod artifact;
pub mod constraint_file;
pub mod csp_file;
pub mod error;
pub mod lexer;
pub mod load;
pub mod rule_file;
pub mod store_literal;

pub use error::ParseError;
pub use load::CliError;
