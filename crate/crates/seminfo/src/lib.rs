//! Semantic information theory over synonymously partitioned alphabets.
//!
//! A synonymous partition maps each semantic symbol to the set (a *cell*) of
//! syntactic symbols that express it. This crate models such partitions and
//! provides, on top of them:
//!
//! - [`model`]: alphabets, distributions, partitions, joint models, channels;
//! - [`measures`]: classical (bits) and semantic (sebits) entropies and
//!   mutual informations, including the up/down semantic mutual informations
//!   and chain-rule audits;
//! - [`baselines`]: Blahut-Arimoto channel capacity and rate-distortion;
//! - [`semlimits`]: semantic channel capacity and semantic rate-distortion
//!   via multi-start projected gradient search with exhaustive grid oracles
//!   at small sizes;
//! - [`typicality`]: synonymous typical sets, exhaustive enumeration, and
//!   Monte Carlo estimates of the asymptotic equipartition behavior;
//! - [`codingsim`]: Monte Carlo simulators for semantic source coding and
//!   semantic channel coding;
//! - [`cli`]: the JSON problem-file front end used by the `seminfo` binary.
//!
//! Conventions: all logarithms are base 2, `0 log 0 = 0`, input probability
//! vectors may deviate from normalization by at most `1e-9` and are then
//! renormalized exactly, and zero-probability symbols are legal and kept.

pub mod baselines;
pub mod cli;
pub mod codingsim;
pub mod measures;
pub mod model;
pub mod optim;
pub mod semlimits;
pub mod typicality;

#[cfg(test)]
pub(crate) mod testkit;

pub use model::{
    Alphabet, Channel, Distribution, JointModel, SemanticVariable, SynonymousPartition,
};
