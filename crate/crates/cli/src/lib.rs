//! Library surface of the command line front end: input format parsing,
//! workspace resolution and report rendering.

pub mod parse;
pub mod report;
pub mod workspace;
