//! File formats, the command-line interface and the parallel simulation grid
//! built on `weightscape-core`.

pub mod cli;
pub mod grid;
pub mod io;
pub mod json;
pub mod tables;
