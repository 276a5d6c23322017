//! Process exit codes and the error type that carries them.

use std::fmt;
use std::path::Path;

pub const EXIT_IO: u8 = 1;
pub const EXIT_PARAM: u8 = 2;
pub const EXIT_VERIFY: u8 = 3;
pub const EXIT_GUARD: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub type CliResult<T> = Result<T, Failure>;

impl Failure {
    pub fn io(path: &Path, err: impl Into<anyhow::Error>) -> Self {
        Failure { code: EXIT_IO, error: err.into().context(format!("{}", path.display())) }
    }

    pub fn param(msg: impl fmt::Display) -> Self {
        Failure { code: EXIT_PARAM, error: anyhow::anyhow!("{msg}") }
    }

    pub fn verify(msg: impl fmt::Display) -> Self {
        Failure { code: EXIT_VERIFY, error: anyhow::anyhow!("{msg}") }
    }

    pub fn guard(msg: impl fmt::Display) -> Self {
        Failure { code: EXIT_GUARD, error: anyhow::anyhow!("{msg}") }
    }
}

impl From<twoquery::Error> for Failure {
    fn from(e: twoquery::Error) -> Self {
        let code = match e {
            twoquery::Error::SizeLimit(_) => EXIT_GUARD,
            _ => EXIT_PARAM,
        };
        Failure { code, error: e.into() }
    }
}

impl From<twoquery::ParseError> for Failure {
    fn from(e: twoquery::ParseError) -> Self {
        Failure { code: EXIT_PARAM, error: e.into() }
    }
}
