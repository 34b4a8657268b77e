use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside its admissible domain.
    #[error("invalid parameter `{name}`: {reason}")]
    Domain { name: String, reason: String },

    /// A value was requested outside the region where it is defined.
    #[error("out of range: {0}")]
    Range(String),

    /// Two objects that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Input data violates a physical constraint; offending frequencies are listed.
    #[error("physicality violation ({what}) at omega = {}", format_freqs(.frequencies))]
    Physicality {
        what: String,
        frequencies: Vec<f64>,
    },

    /// A propagator denominator vanished on the grid.
    #[error("singular denominator at omega = {omega}")]
    Singularity { omega: f64 },

    /// No on-shell root could be located.
    #[error("no on-shell solution: {0}")]
    RootNotFound(String),

    /// A documented precondition of an operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A time step is too large for the requested integrator.
    #[error("time step {dt} too large: {reason}; use dt <= {suggested}")]
    Stability {
        dt: f64,
        suggested: f64,
        reason: String,
    },

    /// A phase-space grid is too small to hold the distribution.
    #[error("grid too small: {0}")]
    GridTooSmall(String),

    /// Malformed tabulated input.
    #[error("malformed table {source_name}: {reason}")]
    Table { source_name: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Domain {
            name: name.into(),
            reason: reason.into(),
        }
    }
}

fn format_freqs(freqs: &[f64]) -> String {
    const SHOWN: usize = 8;
    let mut out: Vec<String> = freqs.iter().take(SHOWN).map(|w| format!("{w:.6e}")).collect();
    if freqs.len() > SHOWN {
        out.push(format!("... ({} total)", freqs.len()));
    }
    format!("[{}]", out.join(", "))
}
