//! File formats, parallel enumeration and the `geomkit` command-line tool,
//! built on `geomkit-core`.

pub mod cli;
pub mod formats;
pub mod parallel;
