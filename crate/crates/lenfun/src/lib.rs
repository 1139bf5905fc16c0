//! Exact arithmetic, machine-checkable vanishing certificates and numerical
//! estimators for length functions on groups.
//!
//! A length function `l : G -> [0, oo)` satisfies
//!
//! 1. `l(g^n) = |n| * l(g)` for all integers `n`,
//! 2. `l(h g h^-1) = l(g)` for all `h`,
//! 3. `l(ab) <= l(a) + l(b)` whenever `ab = ba`.
//!
//! The crate provides, per group family, exact normal-form arithmetic
//! ([`heisenberg`], [`polycyclic`], [`qmatrix`]), a certificate language whose
//! verifier derives `l(target) = 0` from the three axioms plus exact group
//! identities ([`cert`], [`verify`]), subadditive (Fekete) upper-bound
//! schedules ([`fekete`]), word metrics by breadth-first search
//! ([`wordmetric`]) and dynamical estimators for rotation numbers and
//! dynamical degrees ([`circle`], [`monomial`], [`ratmap`]).
//!
//! All certificate-path arithmetic is arbitrary-precision rational; floating
//! point appears only in clearly marked bracketed estimators.

pub mod axioms;
pub mod cert;
// staged: circle, distortion, jordan, monomial, poly, polygcd, ratmap,
// sl2, stable_norm, steinberg, wordmetric
pub mod error;
pub mod exec;
pub mod fekete;
pub mod group;
pub mod heisenberg;
pub mod imatrix;
pub mod polycyclic;
pub mod qmatrix;
pub mod qnum;
pub mod verify;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
