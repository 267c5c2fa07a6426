//! Feedforward networks, reverse-mode gradients, and the Adam optimizer
//! used to train the coefficient generators.

mod adam;
mod mlp;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use mlp::{finite_difference_check, Activation, MlpParams, NetworkArch, Tape};
