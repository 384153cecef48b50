use thiserror::Error;

/// One failing boundary trace reported by the reflection step.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceViolation {
    pub component: String,
    pub trace: f64,
}

#[derive(Debug, Error)]
pub enum MaxlabError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("compatibility violation: {}", format_traces(.0))]
    Compatibility(Vec<TraceViolation>),

    #[error("frequency {lambda} above the grid Nyquist band {max}")]
    AboveNyquist { lambda: f64, max: f64 },

    #[error("branch {branch} requested with |xi~_{branch}| = {value:.4} below cutoff {cutoff}")]
    BranchCutoff { branch: usize, value: f64, cutoff: f64 },

    #[error("ellipticity lost: {0}")]
    Ellipticity(String),

    #[error("time step {dt} exceeds the stability bound {max}")]
    Cfl { dt: f64, max: f64 },

    #[error("constitutive inversion failed: {0}")]
    Inversion(String),

    #[error("support margin violated: {0}")]
    SupportMargin(String),

    #[error("inadmissible exponents: {0}")]
    Inadmissible(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("dense quantization refused: {points} points exceeds guard {guard}")]
    CostGuard { points: usize, guard: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn format_traces(v: &[TraceViolation]) -> String {
    v.iter()
        .map(|t| format!("{}={:.3e}", t.component, t.trace))
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T> = std::result::Result<T, MaxlabError>;

pub(crate) fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(MaxlabError::NonFinite(what.to_string()))
    }
}
