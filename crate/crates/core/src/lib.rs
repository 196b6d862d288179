//! Numerical laboratory for Mock Fourier series on self-affine spectral measures.
//!
//! The crate builds self-affine measures from expansive integer matrices and
//! digit sets, validates Hadamard triples `(R, B, L)`, enumerates τ-scaled
//! spectra, evaluates Mock Dirichlet kernels in three modes (direct sum,
//! factored product, orbit logs), and estimates the divergence indicator
//! `Δ(m_τ,b)` by exact-rational quadrature and by Birkhoff orbit averages.
//!
//! Layering, bottom to top:
//!
//! * [`rational`] — small exact linear algebra over arbitrary-precision rationals;
//! * [`affine_ifs`] — expansive matrices, digit words/streams, symbolic encoding,
//!   cylinder quadrature and doubling diagnostics for the invariant measure;
//! * [`hadamard`] — triple validation, spectrum levels, the measure transform;
//! * [`mock_fourier`] — the trig polynomial `m_τ`, Dirichlet kernels,
//!   coefficients, partial sums, and the L⁰ metric;
//! * [`divergence`] — Δ estimators, kernel growth rates, maximal-operator
//!   tail curves, and the divergence classification verdict.
//!
//! Everything seeded is a pure function of its arguments: identical inputs
//! reproduce bit-identical outputs, including under internal parallelism.

pub mod affine_ifs;
pub mod divergence;
pub mod hadamard;
pub mod mock_fourier;
pub mod rational;
pub mod util;

/// Default cap on enumerated nodes / spectrum elements (2^20).
pub const DEFAULT_BUDGET: usize = 1 << 20;

/// Crate-wide error type; variants name the violated contract.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is not expansive: an eigenvalue has modulus {modulus:.12} <= 1 + 1e-9")]
    NotExpansive { modulus: f64 },
    #[error("matrix is singular (zero determinant)")]
    Singular,
    #[error("matrix must be square, got {rows} rows of width {cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("digit set needs at least 2 pairwise distinct vectors")]
    DegenerateDigitSet,
    #[error("digit index {index} out of range for digit set of size {size}")]
    BadDigitIndex { index: usize, size: usize },
    #[error("digit {digit:?} is not a member of the digit set")]
    UnknownDigit { digit: Vec<i64> },
    #[error("cannot shift a word of length {len} by {k}")]
    ShiftPastEnd { len: usize, k: usize },
    #[error("(R - I) is singular; the digit has no fixed anchor")]
    SingularShift,
    #[error("{requested} items would exceed the budget of {budget}")]
    BudgetExceeded { requested: u128, budget: usize },
    #[error("non-finite integrand value at node {index} (word {word:?})")]
    NonFinite { index: usize, word: Vec<usize> },
    #[error("|B| = {b} and |L| = {l}; the unitarity matrix needs equal cardinalities")]
    CardinalityMismatch { b: usize, l: usize },
    #[error("unitarity defect {defect:.3e} exceeds the acceptance tolerance {tol:.1e}")]
    NotHadamard { defect: f64, tol: f64 },
    #[error("scale tau must be a nonzero integer")]
    ZeroScale,
    #[error("spectrum level {level} degenerate: {distinct} distinct elements of {expected} expected")]
    DegenerateSpectrum {
        level: usize,
        distinct: usize,
        expected: usize,
    },
    #[error(
        "estimators disagree for digit {digit:?}: quadrature {quadrature:.6} vs orbit {birkhoff:.6} \
         (tolerance {tolerance:.6}); verdict withheld"
    )]
    MethodDisagreement {
        digit: Vec<i64>,
        quadrature: f64,
        birkhoff: f64,
        tolerance: f64,
    },
    #[error("estimate unreliable: {reason}")]
    Unreliable { reason: String },
    #[error(
        "classification in dimension {dim} requires a symmetric matrix (spectra and orbits are \
         identified through R = R^t); symmetry is vacuous only in dimension 1"
    )]
    NonSymmetric { dim: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
