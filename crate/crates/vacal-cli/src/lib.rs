//! Instance files, canonical reports, and the command engine behind the
//! `vacal` binary. Kept as a library so the integration suite drives the
//! exact code path the binary runs.

pub mod instance;
pub mod report;
pub mod run;
