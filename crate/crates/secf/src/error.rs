use std::path::PathBuf;

/// Errors surfaced by the IO layer and the drivers.
#[derive(Debug, thiserror::Error)]
pub enum SecfError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Input(String),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: secf_core::Error,
    },
    #[error("JSON serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl SecfError {
    pub(crate) fn core(context: impl Into<String>) -> impl FnOnce(secf_core::Error) -> SecfError {
        let context = context.into();
        move |source| SecfError::Core { context, source }
    }

    /// Process exit code: 3 for numerical failures, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            SecfError::Core { source, .. } if source.is_numerical() => 3,
            _ => 2,
        }
    }
}

impl From<secf_core::Error> for SecfError {
    fn from(source: secf_core::Error) -> Self {
        SecfError::Core { context: "computation failed".into(), source }
    }
}

pub type Result<T> = std::result::Result<T, SecfError>;
