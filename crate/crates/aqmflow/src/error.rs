use std::fmt;
use std::io;
use std::path::PathBuf;

/// Where a configuration value came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    /// Line of the config file (1-based).
    Line(usize),
    /// Line of a built-in preset.
    Preset { name: &'static str, line: usize },
    /// A command-line flag.
    Flag(&'static str),
    /// Not tied to a single key.
    Whole,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Preset { name, line } => write!(f, "preset {name}, line {line}"),
            Origin::Flag(flag) => write!(f, "{flag}"),
            Origin::Whole => f.write_str("config"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{origin}: {message}")]
pub struct ConfigError {
    pub origin: Origin,
    pub message: String,
}

impl ConfigError {
    pub fn new(origin: Origin, message: impl Into<String>) -> Self {
        ConfigError {
            origin,
            message: message.into(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Solver {
        context: String,
        #[source]
        source: aqmflow_core::Error,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn solver(context: impl Into<String>, source: aqmflow_core::Error) -> Self {
        CliError::Solver {
            context: context.into(),
            source,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for configuration errors, 3 for solver failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver { .. } => 3,
            CliError::Io { .. } | CliError::Csv(_) => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
