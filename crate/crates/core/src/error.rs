use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the level-set toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {z} is outside the open unit disc")]
    Domain { z: Complex64 },

    #[error("map evaluation hit a pole or produced a non-finite value at {z}")]
    Pole { z: Complex64 },

    #[error("|f(z)| = {modulus} at z = {z}; hyperbolic quantities of f(z) are undefined")]
    ImageOnBoundary { z: Complex64, modulus: f64 },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invalid level problem: {0}")]
    InvalidProblem(String),

    #[error("boundary empty or touches the unit circle only (no sign change of u on any scan ray)")]
    NotFound,

    #[error("gradient of u vanishes at {z} (|du/dz̄| = {modulus:e})")]
    SingularGradient { z: Complex64, modulus: f64 },

    #[error("curve tangent vanishes (|γ'| = {modulus:e})")]
    SingularTangent { modulus: f64 },

    #[error("point {z} is not on the level curve (u = {residual:e})")]
    OffCurve { z: Complex64, residual: f64 },

    #[error("tracer exceeded {0} steps")]
    MaxSteps(usize),

    #[error("corrector failed to converge near {z}")]
    CorrectorFailed { z: Complex64 },

    #[error("fixed-point iteration did not converge for w = {w}")]
    NoConvergence { w: Complex64 },

    #[error("implicit derivative denominator |1 - w f'(ψ)| = {modulus:e} is too small")]
    NearSingular { modulus: f64 },

    #[error("{check} does not apply: {reason}")]
    RequirementMismatch { check: String, reason: String },

    #[error("curve is an open arc; hyperbolic perimeter is infinite")]
    OpenCurve,

    #[error("operation needs a closed curve sampled on a uniform angular grid")]
    NotUniform,

    #[error("radius search aborted after {0} bisection steps")]
    Abort(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
