use homog_numerics::NumericsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown preset `{0}` (expected `grid` or `grid-diag`)")]
    UnknownPreset(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    InvalidGraph(String),

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("link {0} not mesh-alignable")]
    NotAlignable(usize),

    #[error("A^hom not elliptic; supply --macro-spectrum or use grid-diag (smallest eigenvalue {0:e})")]
    NotElliptic(f64),

    #[error("truss system is singular beyond translations ({0} zero modes)")]
    IllPosedTruss(usize),

    #[error("s = {s} lies within 1e-9 of the pole {pole}")]
    NearPole { s: f64, pole: f64 },

    #[error("beta(s) is anisotropic at s = {s} (relative deviation {deviation:e})")]
    Anisotropic { s: f64, deviation: f64 },

    #[error("no sign change of b on ({lo}, {hi}); the mode truncation is probably too small")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("rods under-resolved: half-width spans {layers:.2} elements, need at least 2")]
    Underresolved { layers: f64 },

    #[error("eigen residual {residual:e} above tolerance {tol:e}")]
    Residual { residual: f64, tol: f64 },

    #[error(transparent)]
    Numerics(#[from] NumericsError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        message: message.into(),
    }
}
