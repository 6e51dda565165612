//! Transition-based parsing of discontinuous constituency trees.
//!
//! The crate provides four gap-based transition systems (merge-label-gap in
//! unlexicalized and lexicalized form, and shift-reduce-gap in both forms),
//! deterministic static oracles for them, a bi-LSTM scorer with joint
//! morphological tagging trained by averaged SGD, greedy decoding, and
//! treebank evaluation.

pub mod decoder;
pub mod features;
pub mod metrics;
pub mod nn;
pub mod oracle;
pub mod synth;
pub mod token_set;
pub mod transition;
pub mod trainer;
pub mod treebank;

pub use token_set::TokenSet;
