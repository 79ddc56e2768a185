//! Post-training weight quantization and integer inference.
//!
//! Spikes are binary, so only weights, biases and thresholds are scaled.
//! Accumulation runs in a 24-bit signed register; leaving its range is an
//! error rather than a wrap.

mod layer;
mod model;
mod sweep;

pub(crate) use layer::accumulate;
pub use layer::{
    integer_injection, quantize_layer, quantized_forward_ct, quantized_forward_dc, weight_limit,
    IntNeuronState, QuantizedLayer, ACCUMULATOR_BITS, MAX_BITS, MIN_BITS,
};
pub use model::{QuantizedModel, QuantizedStep, QUANT_VERSION};
pub use sweep::{
    evaluate_quantized_ct, evaluate_quantized_dc, float_accuracy, precision_sweep,
    prediction_agreement, SweepData, SweepRow,
};
