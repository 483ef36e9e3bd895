use thiserror::Error;

/// Errors produced by ramp construction, macro simulation, and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    /// Resolution outside the supported range (1..=5 bits).
    #[error("unsupported ADC resolution {0} (expected 1..=5 bits)")]
    Resolution(u32),

    /// Activation parameters that do not define a usable curve.
    #[error("invalid activation: {0}")]
    Activation(String),

    /// Clip range where the activation is not strictly monotonic or is degenerate.
    #[error("invalid clip range [{lo}, {hi}]: {reason}")]
    ClipRange { lo: f64, hi: f64, reason: String },

    /// Requested schedule needs more ADC rows than the macro provides.
    #[error("ramp needs {needed} ADC cells but the block has {available} rows")]
    AdcRowBudget { needed: usize, available: usize },

    /// Requested weight precision has no defined cell mapping.
    #[error("unsupported weight precision {0} (expected 2..=5 bits)")]
    WeightBits(u32),

    /// Value cannot be represented by the selected weight encoding.
    #[error("weight level {level} out of range for {bits}-bit encoding")]
    WeightRange { level: i32, bits: u32 },

    /// Cell pattern that no valid weight produces (e.g. mixed signs).
    #[error("invalid cell encoding: {0}")]
    InvalidEncoding(String),

    /// Training run failed to make progress or produced non-finite loss.
    #[error("training: {0}")]
    Training(String),

    /// MAC voltage left the usable bitline swing.
    #[error("MAC voltage {voltage:.4} V exceeds the {limit:.2} V dynamic range")]
    DynamicRange { voltage: f64, limit: f64 },

    /// Offset too large for the calibration row range.
    #[error("calibration cannot reach mid-code within +/-{max_units} units (column offset too large)")]
    CalibrationUnreachable { max_units: i32 },

    /// Shape mismatch between tensors or between a model and the macro mapping.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Bad field in a config file or builder.
    #[error("config: {0}")]
    Config(String),

    /// Physically or structurally impossible request (distinct from bad syntax).
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("toml: {0}")]
    TomlParse(#[from] toml::de::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: usage and config problems exit 2,
    /// infeasible requests (row budget, dynamic range, unreachable
    /// calibration) exit 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::AdcRowBudget { .. }
            | Error::DynamicRange { .. }
            | Error::CalibrationUnreachable { .. }
            | Error::Infeasible(_) => 3,
            _ => 2,
        }
    }
}
