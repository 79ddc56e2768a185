//! Discrete-time spiking neural networks trained with a straight-through
//! estimator, fixed-point inference, and a cycle-level model of an
//! event-driven accelerator.
//!
//! Modules, bottom-up:
//!
//! * [`nn`]: dense/conv/pool layers, squared hinge loss, dropout, Adam.
//! * [`spiking`]: the DC and CT neuron models and their backward rules.
//! * [`data`]: IDX and AER loaders, spike encoders, synthetic moving bars.
//! * [`model`] and [`train`]: network presets, training loops, evaluation
//!   sweeps and checkpoints.
//! * [`quant`]: per-layer symmetric weight quantization and integer inference.
//! * [`hwsim`]: priority-encoder scheduler, layer engines and the
//!   handshaking pipeline, with activity counters and an energy model.
//! * [`metrics`]: line-per-record metrics files.

pub mod data;
pub mod error;
pub mod hwsim;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod quant;
pub mod spiking;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
pub use tensor::Tensor;
