use std::io;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const CONVERGENCE: i32 = 3;
    pub const NEAR_BOUNDARY: i32 = 4;
    pub const FIT_NOT_CONVERGED: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: line {line}: {message}")]
    Ingest {
        path: String,
        line: u64,
        message: String,
    },

    #[error(transparent)]
    Core(#[from] rabi_core::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn io(context: impl Into<String>, source: io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => core_exit_code(e),
            _ => exit::USAGE,
        }
    }
}

fn core_exit_code(e: &rabi_core::Error) -> i32 {
    use rabi_core::Error as E;
    match e {
        E::AtBias { source, .. } => core_exit_code(source),
        E::NotConverged { .. }
        | E::EigenIteration
        | E::RootNotBracketed { .. }
        | E::UnorderedBoundaries(_) => exit::CONVERGENCE,
        _ => exit::USAGE,
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
