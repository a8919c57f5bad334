use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter fell outside the range where the model is defined.
    #[error("{param} = {value} is outside the valid range [{min}, {max}]")]
    OutOfRange {
        param: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid {param}: {reason}")]
    InvalidInput { param: &'static str, reason: String },

    #[error("no phase-matched {variable} in range [{lo}, {hi}]")]
    NoRoot {
        variable: &'static str,
        lo: f64,
        hi: f64,
    },

    #[error("ambiguous bracket for {variable}: sign changes in {sub_brackets:?}")]
    AmbiguousBracket {
        variable: &'static str,
        sub_brackets: Vec<(f64, f64)>,
    },

    #[error("interaction not quasi-phase-matchable at positive period (mismatch {mismatch} µm⁻¹)")]
    NotPhaseMatchable { mismatch: f64 },

    #[error("grid too narrow: {0}")]
    GridTooNarrow(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("channel {index} ({lo} nm - {hi} nm): {source}")]
    Channel {
        index: usize,
        lo: f64,
        hi: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("empty record: {0}")]
    Empty(String),

    #[error("config: {0}")]
    Config(#[from] serde_json::Error),
}

pub(crate) fn check_range(param: &'static str, value: f64, range: [f64; 2]) -> Result<()> {
    if value.is_finite() && value >= range[0] && value <= range[1] {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            param,
            value,
            min: range[0],
            max: range[1],
        })
    }
}

pub(crate) fn invalid(param: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidInput {
        param,
        reason: reason.into(),
    }
}
