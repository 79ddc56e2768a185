//! Cycle-level model of an event-driven SNN accelerator.
//!
//! Each layer engine latches a spike frame, walks its active inputs with a
//! priority encoder (one weight row per cycle, all postsynaptic neurons
//! updated in parallel), then adds the bias, checks thresholds and hands the
//! output to the next layer. A step with `k` active inputs costs `k + O`
//! cycles, `O` = latch + bias/fire + handshake (1 + 2 + 1 by default).
//! Layers overlap across time steps under the done / data_fetched handshake.

mod engine;
mod pipeline;
mod report;
mod scheduler;
mod trace;

pub use engine::{Activity, LayerCounters, LayerEngine, Phase, PhaseCycles};
pub use pipeline::{
    pipeline_simulate, simulate_sequences, ActivityCounters, PipelineSim, SimConfig, SimResult,
};
pub use report::{
    estimate_energy, report_sparsity, wall_time_us, EnergyCoefficients, EnergyReport,
    SparsityReport, DEFAULT_FREQUENCY_MHZ,
};
pub use scheduler::{priority_encode_next, SchedulerState};
pub use trace::{write_trace, TraceLine};
