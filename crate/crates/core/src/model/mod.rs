//! Network components: LSTM cell, bidirectional tagger, serialization.

mod lstm;
mod serial;
mod tagger;

pub use lstm::{CellTrace, LstmCell};
pub use serial::{from_bytes, load_model, save_model, to_bytes};
pub use tagger::{
    BlstmLayer, EmbeddingTable, FeatureProjection, ForwardTrace, NetConfig, NllObjective,
    SoftmaxOutput, TaggerModel,
};
