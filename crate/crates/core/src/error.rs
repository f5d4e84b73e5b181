use thiserror::Error;

use crate::params::ZoneIndex;

pub type Result<T> = std::result::Result<T, DrcError>;

#[derive(Debug, Error)]
pub enum DrcError {
    #[error("missing required field `{0}`")]
    MissingField(String),

    #[error("unknown field `{0}`")]
    UnknownField(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("field `{field}`: {reason}")]
    InvalidValue { field: String, reason: String },

    #[error("alpha outside [0,1]: {0}")]
    AlphaOutOfRange(f64),

    #[error("tau consistency violated: {0}")]
    TauConsistency(String),

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("point set of size {size} exceeds capacity {capacity}")]
    Capacity { size: usize, capacity: usize },

    #[error("infeasible design: {constraint} violated in zone {zone}")]
    Infeasible { constraint: &'static str, zone: ZoneIndex },

    #[error("no feasible design in the search space")]
    NoFeasibleDesign,

    #[error("calibration cell (q={q}, S={s}) did not converge after {instances} instances")]
    CalibrationDiverged { q: usize, s: f64, instances: usize },

    #[error("least-squares fit failed: {0}")]
    FitFailed(String),

    #[error("validation did not converge after {runs} runs (standard error {std_error:.4})")]
    ValidationDiverged { runs: usize, std_error: f64 },

    #[error("no sign change on [{lo}, {hi}]: GC difference {diff_lo:.4} at lo, {diff_hi:.4} at hi")]
    NoSignChange {
        lo: f64,
        hi: f64,
        diff_lo: f64,
        diff_hi: f64,
    },

    #[error("scenario {id}: {source}")]
    Scenario {
        id: String,
        #[source]
        source: Box<DrcError>,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl DrcError {
    /// True for errors that mean "no design satisfies the constraints", as
    /// opposed to bad input or internal failures.
    pub fn is_infeasibility(&self) -> bool {
        match self {
            DrcError::Infeasible { .. } | DrcError::NoFeasibleDesign => true,
            DrcError::Scenario { source, .. } => source.is_infeasibility(),
            _ => false,
        }
    }
}
