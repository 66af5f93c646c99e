//! Multilayer perceptrons, Adam, and checkpoint records.

mod adam;
mod checkpoint;
mod mlp;

pub use adam::{AdamConfig, AdamState};
pub use checkpoint::{Checkpoint, NetworkRecord, ParamRecord, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use mlp::{BoundMlp, HiddenActivation, Mlp, MlpSpec, OutputActivation, LEAKY_SLOPE};
