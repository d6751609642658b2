//! Topological degree and degree spectrum of shifts of finite type on
//! matrix-presented monoids.
//!
//! A monoid `G = <s_1..s_d | R_A>` is described by a binary `d x d` matrix
//! `A` with `s_i s_j = s_i` exactly when `A(i, j) = 0`. A one-step `G`-SFT
//! is given by `d` binary transition matrices over a `k`-letter alphabet,
//! one per generator. This crate reduces words to canonical form, builds
//! Cayley-graph balls and follower automata, counts blocks exactly with
//! arbitrary precision, and computes the topological degree together with
//! the full attainable degree spectrum.

pub mod cayley;
pub mod combinatorics;
pub mod degree;
pub mod followers;
pub(crate) mod poly;
pub mod presentation;
pub mod problem;
pub mod sft;
pub mod spectrum;

pub use cayley::{BallGraph, FiniteRepresentation, FollowerAutomaton};
pub use combinatorics::{CharPoly, PeriodicFamily, XiSequence};
pub use degree::{DegreeResult, SimpleSubsystem, Snre, SymbolClass};
pub use presentation::{GeneratorId, MonoidPresentation, Word};
pub use sft::{BlockCountVector, EssentialSet, SftRules};
pub use spectrum::{AlphaVector, SpectrumSet};

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("monoid has no finite representation")]
    InfiniteRepresentation,
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("undefined term: {0}")]
    Undefined(String),
}

pub type Result<T> = std::result::Result<T, Error>;
