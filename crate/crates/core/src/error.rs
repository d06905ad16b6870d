use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular matrix ({context}): pivot {pivot:e} below tolerance")]
    Singular { context: String, pivot: f64 },

    #[error("behavior law did not converge after {iterations} iterations (residual {residual:e})")]
    Behavior { iterations: usize, residual: f64 },

    #[error("Newton solver did not converge in {iterations} iterations; residual history {history:?}")]
    NewtonDivergence { iterations: usize, history: Vec<f64> },

    #[error("time step {index} failed: {source}")]
    TimeStep {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("time {0} outside of the loading program range")]
    TimeOutOfRange(f64),

    #[error("NNOMP failed ({reason}); best relative residual {best_residual:e} with {points} points")]
    Nnomp {
        reason: String,
        best_residual: f64,
        points: usize,
        best: Option<crate::hyper::ReducedQuadrature>,
    },

    #[error("NNLS exceeded its iteration cap of {0}")]
    NnlsIterations(usize),

    #[error("degenerate modes: {0}")]
    DegenerateModes(String),

    #[error("ill-posed Gappy reconstruction: {0}")]
    IllPosed(String),

    #[error("relative error undefined: both denominators vanish")]
    UndefinedRelativeError,

    #[error("Gaussian process fit failed: {0}")]
    GprFit(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error in {file}: {message}")]
    Parse { file: String, message: String },

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn at_step(self, index: usize) -> Self {
        Error::TimeStep {
            index,
            source: Box::new(self),
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Name of the pipeline stage that produced this error, if any.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
