use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("metric space must contain at least one point")]
    Empty,
    #[error("distance matrix shape does not match {labels} labels ({rows} rows)")]
    Shape { labels: usize, rows: usize },
    #[error("distance ({i}, {j}) is not a finite nonnegative number: {value}")]
    InvalidEntry { i: usize, j: usize, value: f64 },
    #[error("nonzero diagonal entry at {i}: {value}")]
    NonzeroDiagonal { i: usize, value: f64 },
    #[error("asymmetric distances: d({i},{j}) = {ij} but d({j},{i}) = {ji}")]
    Asymmetric { i: usize, j: usize, ij: f64, ji: f64 },
    #[error("distinct points {i} and {j} at distance zero")]
    ZeroDistance { i: usize, j: usize },
    #[error("triangle inequality fails at ({i}, {j}, {k}): d({i},{k}) = {direct} > {detour}")]
    Triangle {
        i: usize,
        j: usize,
        k: usize,
        direct: f64,
        detour: f64,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("map is not injective")]
    NotInjective,
    #[error("no injection from a {domain}-point space into a {host}-point host")]
    NoInjection { domain: usize, host: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("size cap exceeded: {0}")]
    SizeCap(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("not a fork: {0}")]
    NotAFork(String),
}
