use std::path::PathBuf;

use crate::gvcore::FeasibilityReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    Construction(String),

    #[error("point outside domain: {axis} = {value} not in [{min}, {max}]")]
    OutOfDomain {
        axis: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("metric {0} is not supported on this domain")]
    UnsupportedMetric(&'static str),

    #[error("surface belongs to a different domain")]
    DomainMismatch,

    #[error("{0}")]
    Contract(String),

    #[error("samples are not gradually varied fittable: {0}")]
    Infeasible(FeasibilityReport),

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("node {0} lacks a full four-point stencil")]
    Stencil(usize),

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: u64,
        column: String,
        message: String,
    },

    #[error("duplicate record for station {station} at time {time}")]
    Duplicate { station: String, time: u32 },

    #[error("no records at time index {0}")]
    EmptySlice(u32),

    #[error("empty input")]
    EmptyInput,

    #[error("unsupported store format: {0:?}")]
    StoreVersion(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
