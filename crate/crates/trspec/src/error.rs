use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    /// Bad flags, unreadable or malformed input files.
    #[error("{0}")]
    Input(String),
    #[error("{context}: {source}")]
    Model {
        context: String,
        #[source]
        source: trspec_core::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("verdict is Indeterminate")]
    Indeterminate,
}

pub type AppResult<T> = Result<T, AppError>;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INDETERMINATE: i32 = 3;
pub const EXIT_DEGENERATE: i32 = 4;

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Input(_) => EXIT_INPUT,
            AppError::Model { source, .. } => match source {
                trspec_core::Error::DegenerateVelocities { .. } => EXIT_DEGENERATE,
                _ => EXIT_INPUT,
            },
            AppError::Output { .. } => 1,
            AppError::Indeterminate => EXIT_INDETERMINATE,
        }
    }
}

pub(crate) trait ModelContext<T> {
    fn context(self, what: &str) -> AppResult<T>;
}

impl<T> ModelContext<T> for trspec_core::Result<T> {
    fn context(self, what: &str) -> AppResult<T> {
        self.map_err(|source| AppError::Model {
            context: what.to_string(),
            source,
        })
    }
}

pub(crate) fn output_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> AppError {
    let path = path.into();
    move |source| AppError::Output { path, source }
}
