use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("unknown center id {0}")]
    UnknownCenter(usize),
    #[error("malformed linear program: {0}")]
    MalformedLp(String),
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("graph has an odd number of vertices ({0})")]
    OddVertexCount(usize),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("edge ({u}, {v}) weight exceeds the degree bound in color {color}")]
    WeightExceedsBound { u: usize, v: usize, color: usize },
    #[error("matching recovery failed after {attempts} attempts")]
    RecoveryFailed { attempts: usize },
    #[error("oracle size guard exceeded: C({n}, {k}) = {subsets} > {limit}")]
    OracleGuard { n: usize, k: usize, subsets: u128, limit: u128 },
    #[error("brute-force matching limited to {limit} vertices, got {n}")]
    TooManyVertices { n: usize, limit: usize },
    #[error("could not place {k} separated centers after {attempts} attempts")]
    GeneratorRetries { k: usize, attempts: usize },
    #[error("augmentation needs |V'| >= 2k, got |V'| = {vertices}, k = {k}")]
    TooFewVertices { vertices: usize, k: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
