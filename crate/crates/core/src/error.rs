use thiserror::Error;

/// Errors raised by the tensor kernel, the energy model, the scans and the solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("deformation gradient has non-positive determinant {det:e}")]
    NonPositiveDeterminant { det: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("invariant point ({i1}, {i2}) lies outside D(i1,i2): i1^2 - 4 i2 = {discriminant:e}")]
    OutsideDomain { i1: f64, i2: f64, discriminant: f64 },

    #[error("invariant point too close to the equal-eigenvalue curve (relative gap {relative_gap:e})")]
    TooCloseToGamma2 { relative_gap: f64 },

    #[error("argument outside the domain of {function}: {detail}")]
    Domain { function: &'static str, detail: String },

    #[error("finite-difference stencil left GL+ at step {step:e}")]
    StencilLeftDomain { step: f64 },

    #[error("unsupported dimension {0} (expected 2 or 3)")]
    UnsupportedDimension(usize),

    #[error("invalid mesh dimensions: {0}")]
    InvalidDimensions(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("state has infinite energy (an element has det grad phi <= 0)")]
    InfeasibleState,

    #[error("no initial field with finite energy after {attempts} blending attempts")]
    NoFeasibleStart { attempts: usize },

    #[error("could not construct a constraint-satisfying tuple after {retries} retries")]
    ConstraintConstructionFailed { retries: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
