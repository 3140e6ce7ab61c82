use num_complex::Complex64;
use thiserror::Error;

/// Failure of a single pointwise evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    #[error("evaluation on the singular locus of {what} at z = {at}")]
    Singular { what: &'static str, at: Complex64 },
    #[error("non-finite value at z = {at}")]
    NonFinite { at: Complex64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("contour too close to a singularity: {0}")]
    BoundaryTooClose(String),
    #[error("pole scan failed: {0}")]
    PoleScan(String),
    #[error("residue contour failed: {0}")]
    Residue(String),
    #[error("pole tracking ambiguous: {0}")]
    Tracking(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("not converged: {0}")]
    NonConvergent(String),
    #[error("unknown deformation id `{0}`")]
    UnknownSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
