use std::path::PathBuf;

/// Everything here maps to exit status 1; violated bounds are reported, not raised.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("unknown model '{name}' (known: {known}; or give a path to a kernel document)")]
    ModelUnknown { name: String, known: String },
    #[error("{0}")]
    Core(#[from] wavechain::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}
