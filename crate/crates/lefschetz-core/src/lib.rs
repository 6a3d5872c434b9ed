//! Desk-scale computational model of delocalized higher index pairings on
//! flat crystallographic quotients.
//!
//! The crate implements, over `M = R^n` with a proper cocompact action of a
//! crystallographic group `Γ = L ⋊ F`:
//!
//! * exact affine group arithmetic, word metrics and Cayley-ball enumeration
//!   ([`group`]);
//! * cutoff partitions of unity, fixed-point sets and quadrature ([`manifold`]);
//! * the delocalized group-cochain complex, the cyclic complex of `CΓ` and the
//!   chain map between them ([`cochain`]);
//! * invariant and extended Alexander-Spanier complexes with all connecting
//!   chain maps, homotopies, and kernel pairings ([`ascomplex`]);
//! * graded exterior algebra with matrix coefficients, characteristic-form
//!   series and Getzler-order bookkeeping ([`forms`]);
//! * flat heat kernels, Mehler kernels, projector entry kernels and the
//!   rational constants entering the fixed-point formula ([`heat`]);
//! * the top-level fixed-point evaluators and the verification suite
//!   ([`lefschetz`]).
//!
//! Numerical work is deterministic: quadrature nodes, low-discrepancy points
//! and reduction orders are all fixed, so reports are reproducible bit for bit
//! across runs and thread counts.

pub mod ascomplex;
pub mod cochain;
pub mod config;
pub mod exec;
pub mod forms;
pub mod group;
pub mod heat;
pub mod lefschetz;
pub mod manifold;
pub mod report;

pub use num_complex::Complex64;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("group mismatch: {0}")]
    GroupMismatch(String),
    #[error("unreachable within radius {radius}: {what}")]
    RadiusExceeded { what: String, radius: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("covering failure: {0}")]
    Covering(String),
    #[error("non-finite sample: {0}")]
    NonFinite(String),
    #[error("tail bound {bound:.3e} exceeds budget {budget:.3e}; increase radius or t")]
    TailBudget { bound: f64, budget: f64 },
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
