use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: no such file", .0.display())]
    MissingFile(PathBuf),
    #[error("list {list:?} has no word in the vocabulary of embedding {embedding:?}")]
    OovList { list: String, embedding: String },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{message} ({code})")]
    Module { code: String, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    /// 2 for a list with nothing in the vocabulary, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::OovList { .. } => 2,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        let path = path.into();
        if source.kind() == io::ErrorKind::NotFound {
            Self::MissingFile(path)
        } else {
            Self::Io { path, source }
        }
    }
}

macro_rules! module_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                Self::Module { code: e.code().to_owned(), message: e.to_string() }
            }
        }
    )*};
}

module_error!(
    edia_core::BiasError,
    edia_core::CorpusError,
    edia_core::EmbeddingError,
    edia_core::LexiconError,
    edia_core::LmError,
    edia_core::TrainError
);

impl From<edia_server::ApiError> for CliError {
    fn from(e: edia_server::ApiError) -> Self {
        Self::Module {
            code: e.code().to_owned(),
            message: e.body.message,
        }
    }
}
