//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("family mismatch: expected `{expected}`, got `{got}`")]
    FamilyMismatch { expected: String, got: String },

    #[error("evaluation returned a non-finite value for `{element}`")]
    NonFinite { element: String },

    #[error("length evaluation returned a negative value for `{element}`")]
    NegativeLength { element: String },

    #[error("series provider returned a negative value at n = {n}")]
    NegativeSeries { n: u64 },

    #[error("subadditivity violated: a({n} + {m}) > a({n}) + a({m})")]
    SubadditivityViolation { n: u64, m: u64 },

    #[error("doubling budget must be >= 1")]
    BadBudget,

    #[error("gcd({m}, {n}) does not divide {k}: no conjugator witness along this construction")]
    DivisibilityObstruction { m: String, n: String, k: String },

    #[error("element `{element}` does not have order {order}")]
    NotTorsion { element: String, order: u64 },

    #[error("matrix is not Anosov: |tr| = {tr} <= 2")]
    NotAnosov { tr: String },

    #[error("matrix is not parabolic: {reason}")]
    NotParabolic { reason: String },

    #[error("matrix determinant is {det}, expected {expected}")]
    BadDeterminant { det: String, expected: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("matrix is not unitriangular")]
    NotUnitriangular,

    #[error("n must be >= 3 for elementary-matrix relations, got {0}")]
    RankTooSmall(usize),

    #[error("BFS memory budget exceeded: ball size reached {ball_size}")]
    MemoryBudget { ball_size: usize },

    #[error("digit search exhausted its state bound ({explored} states explored)")]
    DigitSearchExhausted { explored: usize },

    #[error("numerical overflow in schedule at level j = {level}")]
    Overflow { level: u32 },

    #[error("circle lift is not strictly increasing")]
    NotIncreasing,

    #[error("circle lift must satisfy f(1) = f(0) + 1")]
    BadLiftPeriod,

    #[error("composition degenerated: all components reduce to zero")]
    DegenerateComposition,

    #[error("polynomial size budget exceeded ({terms} terms)")]
    PolyBudget { terms: usize },

    #[error("certificate step {step}: {reason}")]
    CertStep { step: usize, reason: String },

    #[error("certificate conclusion not entailed: {0}")]
    CertConclusion(String),

    #[error("unknown family tag `{0}`")]
    UnknownFamily(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
