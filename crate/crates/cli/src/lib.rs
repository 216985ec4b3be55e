//! Library side of the `hallar` command: instance handling, report files
//! and the solve/verify/bench drivers.

pub mod commands;
pub mod instance;
pub mod json;
pub mod report;
