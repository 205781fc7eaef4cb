use thiserror::Error;

/// Errors produced by the simulation engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum WqedError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The self-energy diverges at the edges of the effective band.
    #[error("energy {energy} sits on the band edge ±{edge} (self-energy diverges)")]
    BandEdgeSingularity { energy: f64, edge: f64 },

    #[error("no bound state on the {0} branch (decoupled level lies inside the band)")]
    NoBoundState(&'static str),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("block dimension {dim} exceeds the memory budget of {budget}")]
    SizeError { dim: usize, budget: usize },

    #[error("effective qubit energy {energy} is not embedded in the band [-{edge}, {edge}]")]
    NotEmbedded { energy: f64, edge: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("wavepacket oracle invalid: {0}")]
    OracleInvalid(String),
}

impl WqedError {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            WqedError::BandEdgeSingularity { .. } | WqedError::NumericalFailure(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, WqedError>;
