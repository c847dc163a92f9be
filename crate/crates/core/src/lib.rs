//! Hyperbolic geometry of the level sets `|f(z)|² − λ|z|² + λ − 1 = 0` of
//! holomorphic self-maps of the unit disk.
//!
//! The boundary `∂_𝔻Ω_λ(f)` of `Ω_λ(f) = {z ∈ 𝔻 : |f(z)|² > λ|z|² − λ + 1}`
//! is traced numerically, its Euclidean and hyperbolic curvature is
//! evaluated from the implicit equation, and curvature bounds, hyperbolic
//! measures and convexity of the scaled family `Ω(rf)` are checked against
//! closed forms.

pub mod error;
pub mod numeric;
pub mod holomap;
pub mod levelset;
pub mod curvature;
pub mod fixedpoint;
pub mod bounds;
pub mod measures;
pub mod convexity;
pub mod corpus;

pub use error::{Error, Result};
pub use holomap::{parse, BlaschkeProduct, BlaschkeZero, HoloMap, Jet};
pub use levelset::{trace, LevelProblem, Parametrization, TraceOptions, TracedCurve, TracedSample, Wirtinger};
pub use curvature::{CurvaturePair, ParametricCurve};
pub use fixedpoint::FixedPointMap;
pub use bounds::{evaluate_bound, full_report, BoundId, BoundReport};
pub use measures::{measure, verify_section7, MeasureSet, Section7Check};
pub use convexity::{certify, radius_of_convexity, ConvexityCertificate, ConvexityRadius, Verdict};
pub use corpus::{default_corpus, CorpusEntry, MapClass};
pub use num_complex::Complex64;
