//! Exact computation of zero-sum invariants of finite abelian groups.
//!
//! Every invariant handled here is the threshold of a monotone property of
//! sequences: the least `t` such that every sequence of length at least `t`
//! has the property. The [`search`] module computes such thresholds exactly
//! and returns an extremal certificate; [`omega`] describes families
//! `Ω ⊆ B(G)` whose "has a subsequence in Ω" property yields `d_Ω(G)`.

pub mod dp;
pub mod error;
pub mod group;
pub mod invariants;
pub mod omega;
pub mod search;
pub mod sequence;
pub mod structure;

pub use error::{Error, Result};
pub use group::{Element, Group};
pub use sequence::SequenceForm;

/// Toolkit version recorded in persisted results.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
