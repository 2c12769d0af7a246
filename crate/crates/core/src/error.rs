use thiserror::Error;

use crate::enclosure::EnclosureError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("u = {u} exceeds the table range u_max = {u_max}")]
    Range { u: f64, u_max: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("missing term {0}")]
    MissingTerm(String),
    #[error("inconsistent enclosure: {0}")]
    InconsistentEnclosure(String),
    #[error(transparent)]
    Enclosure(#[from] EnclosureError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
