use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },
    #[error("B is rank deficient (rank {rank} < {cols})")]
    RankDeficient { rank: usize, cols: usize },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("point {point:?} is not covered by any region")]
    UncoveredPoint { point: Vec<f64> },
    #[error("infeasible region {region}")]
    InfeasibleRegion { region: usize },
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("evaluation failed at {point:?}: {source}")]
    AtPoint {
        point: Vec<f64>,
        #[source]
        source: Box<Error>,
    },
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
    #[error("numerical breakdown: {0}")]
    Numerical(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_point(self, point: Vec<f64>) -> Error {
        Error::AtPoint {
            point,
            source: Box::new(self),
        }
    }
}
