//! Multi-layer spiking networks: construction from presets and the
//! network-level forward/backward passes used by training and evaluation.

mod network;
mod pass;
mod preset;

pub use network::Network;
pub use pass::{ct_backward, ct_forward, dc_backward, dc_forward, CtTape, DcTape};
pub use preset::{preset, LayerSpec, LossTarget, NeuronModel, PresetSpec, Task, PRESET_IDS};
