//! Job files, batch drivers and report rendering behind the `kt-decay` binary.

mod render;
mod run;
mod spec;

use std::path::PathBuf;

use thiserror::Error;

use crate::density::DensityError;
use crate::operators::OperatorError;
use crate::ratefun::RateError;
use crate::verify::VerifyError;

pub use render::{format_sig, render_fit, render_report};
pub use run::{exit_code, run, RunOutcome};
pub use spec::{
    defaults_text, parse_spec, parse_spec_for, Claim, DensitySpec, FitSpec, GridSpec, JobSpec, NSpec, OperatorSpec, OutputSpec, RateSpec,
    SectionMethod, Task, TaskParams,
};

/// Process exit status for successful runs and passing verdicts.
pub const EXIT_OK: i32 = 0;
/// Errors, numerical failures and failed verdicts.
pub const EXIT_ERROR: i32 = 1;
/// A verification hypothesis was not satisfied.
pub const EXIT_HYPOTHESIS: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid job: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}
