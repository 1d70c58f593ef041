use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("vector `{0}` is not spacelike")]
    NotSpacelike(String),

    #[error("matrix does not preserve the Minkowski form")]
    NotAnIsometry,

    #[error("{context}: line {line}: {message}")]
    Parse {
        context: String,
        line: usize,
        message: String,
    },

    #[error("pair ({0}, {1}) meets at an angle that is not pi/m")]
    NonCoxeterAngle(String, String),

    #[error("quadratic form: {0}")]
    Form(String),

    #[error("cannot factor {0} completely")]
    Factorization(String),

    #[error("group closure exceeded {0} elements")]
    GroupBound(usize),

    #[error("polytope construction: {0}")]
    Construction(String),

    #[error("gluing: {0}")]
    Gluing(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(context: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.to_string(),
            line,
            message: message.into(),
        }
    }
}
