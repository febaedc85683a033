//! Command-line driver around `dgsm-core`: JSON run configurations, CSV and
//! JSON report files, subprocess-backed black-box models and multi-threaded
//! batch evaluation.

pub mod cli;
pub mod config;
pub mod error;
pub mod external;
pub mod output;
pub mod parallel;

pub use crate::error::{LabError, ExitCode};
