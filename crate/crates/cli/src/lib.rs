//! Request handling, report layouts and file output for the `quadsep` tool.

pub mod output;
pub mod pipeline;
pub mod report;
pub mod request;
