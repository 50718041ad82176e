//! File formats and command layer for the saddle point backward-error CLI.

pub mod app;
pub mod mm;
pub mod report;
