use gpi_core::inequality::IneqError;
use gpi_core::moments::MomentError;
use gpi_core::polyring::PolyError;
use gpi_core::soscert::SosError;
use thiserror::Error;

pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Ineq(#[from] IneqError),
    #[error(transparent)]
    Sos(#[from] SosError),
    #[error(transparent)]
    Moment(#[from] MomentError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

impl CliError {
    /// Library errors here are always caused by arguments outside a domain.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            _ => EXIT_USAGE,
        }
    }
}
