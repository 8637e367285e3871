use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("irrep label {label} out of range for {group}")]
    LabelOutOfRange { label: i64, group: String },

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("all tensor parameters are zero")]
    ZeroTensor,

    #[error("element (r,u,l,d)=({0},{1},{2},{3}) violates the selection rule")]
    SelectionRule(i64, i64, i64, i64),

    #[error("inconsistent sector request: {0}")]
    SectorMismatch(String),

    #[error("matrix is not symmetric (max deviation {0:e})")]
    NotSymmetric(f64),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("memory budget exceeded: need ~{needed} bytes, budget {budget} bytes")]
    Budget { needed: f64, budget: u64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("oracle limit exceeded: {0}")]
    OracleLimit(String),

    #[error("analysis: {0}")]
    Analysis(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
