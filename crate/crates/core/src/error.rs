use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("Legendre recurrence overflow at l={l}, m={m}, u={u} (|value| > {cap:e})")]
    Overflow { l: usize, m: usize, u: Complex64, cap: f64 },

    #[error("singularity at u={u}: {what}")]
    Singularity { u: Complex64, what: String },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("feedback matrix is ill-conditioned (estimated rcond {rcond:.3e} < floor {floor:.3e})")]
    IllConditioned { rcond: f64, floor: f64 },

    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("corrupt file: {0}")]
    Format(String),

    #[error("frequency {requested} Hz not present; available: {available:?}")]
    MissingFrequency { requested: f64, available: Vec<f64> },

    #[error("synthetic GSM generation failed: {0}")]
    Synthesis(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
