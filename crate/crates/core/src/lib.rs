//! Sequence-labeling toolkit: a bidirectional LSTM tagger with sparse
//! word-shape features, plus corruption-based pretraining of the word
//! embedding table.
//!
//! The crate is organized bottom-up:
//! - [`nn`]: dense matrix kernels, activations, a portable RNG, SGD
//!   parameters, and finite-difference gradient checking.
//! - [`text`]: corpus IO, token normalization, vocabularies, tag sets,
//!   and sparse extra features.
//! - [`model`]: the LSTM cell and the bidirectional tagger network with
//!   full backpropagation and a binary serialization format.
//! - [`pretrain`]: corruption-based embedding pretraining and the text
//!   embedding interchange format.
//! - [`train`]: supervised training loops, evaluation, hidden-size
//!   sweeps, and feature ablations.
//!
//! Everything is deterministic given a seed: training twice with the same
//! configuration produces byte-identical model files.

pub mod error;
pub mod model;
pub mod nn;
pub mod pretrain;
pub mod synth;
pub mod text;
pub mod train;

pub use error::{Error, Result};
pub use nn::Matrix;
