use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{what}, line {line}: {message}")]
    Parse {
        what: String,
        line: usize,
        message: String,
    },

    #[error("configuration: {0}")]
    Config(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: qflow_core::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(what: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            what: what.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn stage(stage: &'static str) -> impl FnOnce(qflow_core::Error) -> Self {
        move |source| Error::Stage { stage, source }
    }

    /// Process exit status: 2 for bad input or configuration, 3 for
    /// convergence failures, 4 for numerical-integrity violations, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse { .. } | Error::Unsupported(_) | Error::Io { .. } => 2,
            Error::Stage { source, .. } => match source {
                e if e.is_convergence_failure() => 3,
                qflow_core::Error::NumericalIntegrity { .. } => 4,
                qflow_core::Error::InvalidArgument(_)
                | qflow_core::Error::Unsupported(_)
                | qflow_core::Error::Singularity(..)
                | qflow_core::Error::ResourceLimit { .. } => 2,
                _ => 1,
            },
        }
    }
}
