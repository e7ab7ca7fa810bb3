use thiserror::Error;

/// Errors raised by the solvers, the problem catalog and the file readers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("history holds {values} values but weights only cover {weights}")]
    InconsistentHistory { values: usize, weights: usize },

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("implicit step did not converge: last iterate {last_iterate}, residual {residual:e}")]
    RootNotConverged { last_iterate: f64, residual: f64 },

    #[error("periodic shooting did not converge after {} cycles (last residual {:e})",
        .residuals.len(), .residuals.last().copied().unwrap_or(f64::NAN))]
    ShootingNotConverged { residuals: Vec<f64> },

    #[error("macro step {step}: {source}")]
    MacroStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("state diverged at step {step} (t = {t}): u = {u:e}, v = {v:e}")]
    Diverged { step: usize, t: f64, u: f64, v: f64 },

    #[error("probe produced a non-finite value at t = {t}, u = {u}, v = {v}")]
    ProbeNonFinite { t: f64, u: f64, v: f64 },

    #[error("time {t} outside [0, {horizon}]")]
    OutOfRange { t: f64, horizon: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short class name written to the diagnostic stream by the CLI.
    pub fn class(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::InconsistentHistory { .. } => "structural",
            Error::Unsupported(_) => "unsupported",
            Error::RootNotConverged { .. } => "nonconvergence",
            Error::ShootingNotConverged { .. } => "nonconvergence",
            Error::MacroStep { source, .. } => source.class(),
            Error::Diverged { .. } => "divergence",
            Error::ProbeNonFinite { .. } => "probe",
            Error::OutOfRange { .. } => "out-of-range",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
