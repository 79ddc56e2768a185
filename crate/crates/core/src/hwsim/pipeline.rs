//! Layer-pipelined simulation with done / data_fetched handshaking.
//!
//! All inter-layer signals are registered: an inbox write or a fetch made
//! in cycle `c` becomes visible to the neighbour in cycle `c + 1`. Layer
//! `l` starts step `t` only when its inbox holds the step-`t` frame from
//! layer `l − 1` and layer `l + 1` has fetched the step-`t − 1` frame. The
//! input source is always ready.

use super::engine::{Activity, LayerCounters, LayerEngine, Phase, PhaseCycles};
use super::trace::TraceLine;
use crate::error::{Error, Result};
use crate::quant::QuantizedModel;
use crate::spiking::SpikeFrame;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub phases: PhaseCycles,
    pub record_trace: bool,
    /// Safety stop; exceeding it is reported as a deadlock.
    pub max_cycles: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            phases: PhaseCycles::default(),
            record_trace: false,
            max_cycles: 1 << 32,
        }
    }
}

/// Activity of a completed run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActivityCounters {
    pub total_cycles: u64,
    pub layers: Vec<LayerCounters>,
    /// Fan-in of every layer, for sparsity reports.
    pub fan_in: Vec<usize>,
    /// Fan-out of every layer.
    pub width: Vec<usize>,
}

impl ActivityCounters {
    /// Steps processed by layer 0.
    pub fn steps(&self) -> usize {
        self.layers.first().map_or(0, |l| l.active_per_step.len())
    }

    /// Sums counters of runs executed back to back on the same model.
    pub fn merge(&mut self, other: &ActivityCounters) -> Result<()> {
        if self.layers.is_empty() {
            *self = other.clone();
            return Ok(());
        }
        if self.fan_in != other.fan_in || self.width != other.width {
            return Err(Error::Validation(
                "cannot merge counters of different models".into(),
            ));
        }
        self.total_cycles += other.total_cycles;
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weight_row_fetches += b.weight_row_fetches;
            a.accumulate_ops += b.accumulate_ops;
            a.neuron_fire_checks += b.neuron_fire_checks;
            a.integrating_cycles += b.integrating_cycles;
            a.overhead_cycles += b.overhead_cycles;
            a.stall_cycles += b.stall_cycles;
            a.idle_cycles += b.idle_cycles;
            a.active_per_step.extend_from_slice(&b.active_per_step);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// `frames[l][t]`: output of layer `l` at step `t`.
    pub frames: Vec<Vec<SpikeFrame>>,
    /// `potentials[l][t]`: pre-reset membrane potentials.
    pub potentials: Vec<Vec<Vec<i64>>>,
    pub counters: ActivityCounters,
    pub trace: Vec<TraceLine>,
}

impl SimResult {
    pub fn output_frames(&self) -> &[SpikeFrame] {
        self.frames.last().map_or(&[], Vec::as_slice)
    }
}

pub struct PipelineSim {
    engines: Vec<LayerEngine>,
    inputs: Vec<SpikeFrame>,
    /// `inbox[l]` feeds layer `l`; slot 0 is unused (the source is always ready).
    inbox: Vec<Option<SpikeFrame>>,
    /// Steps fetched by each layer.
    fetched: Vec<usize>,
    cycle: u64,
    cfg: SimConfig,
    frames: Vec<Vec<SpikeFrame>>,
    potentials: Vec<Vec<Vec<i64>>>,
    trace: Vec<TraceLine>,
    #[cfg(test)]
    pub(crate) drop_fetch_signal: Option<usize>,
}

impl PipelineSim {
    pub fn new(model: &QuantizedModel, inputs: &[SpikeFrame], cfg: SimConfig) -> Result<Self> {
        cfg.phases.validate()?;
        let steps = inputs.len();
        let engines = model
            .layers
            .iter()
            .enumerate()
            .map(|(i, l)| LayerEngine::new(i, l.clone(), model.neuron, steps, cfg.phases))
            .collect::<Result<Vec<_>>>()?;
        if engines.is_empty() {
            return Err(Error::Config("model has no layers".into()));
        }
        if let Some(f) = inputs.iter().find(|f| f.width() != model.input_len()) {
            return Err(Error::Config(format!(
                "input frame has {} bits, model expects {}",
                f.width(),
                model.input_len()
            )));
        }
        let n = engines.len();
        Ok(Self {
            engines,
            inputs: inputs.to_vec(),
            inbox: vec![None; n],
            fetched: vec![0; n],
            cycle: 0,
            cfg,
            frames: vec![Vec::with_capacity(steps); n],
            potentials: vec![Vec::with_capacity(steps); n],
            trace: Vec::new(),
            #[cfg(test)]
            drop_fetch_signal: None,
        })
    }

    pub fn cycle_count(&self) -> u64 {
        self.cycle
    }

    pub fn is_finished(&self) -> bool {
        self.engines.iter().all(LayerEngine::is_done)
    }

    fn state_dump(&self) -> String {
        self.engines
            .iter()
            .map(|e| {
                format!(
                    "layer {}: {} step {}/{} inbox {} fetched {}",
                    e.id,
                    e.phase,
                    e.step,
                    e.steps,
                    if self.inbox[e.id].is_some() {
                        "full"
                    } else {
                        "empty"
                    },
                    self.fetched[e.id]
                )
            })
            .collect::<Vec<_>>()
            .join("; ")
    }

    /// Advances every engine by one cycle.
    pub fn step_cycle(&mut self) -> Result<()> {
        let n = self.engines.len();
        // registered view of the handshake signals at the start of the cycle
        let inbox_full: Vec<bool> = self.inbox.iter().map(Option::is_some).collect();
        let fetched = self.fetched.clone();
        let mut progressed = false;
        let mut writes: Vec<(usize, SpikeFrame)> = Vec::new();
        for l in 0..n {
            let t = self.engines[l].step;
            let input = if self.engines[l].phase != Phase::Idle {
                None
            } else {
                let upstream_done = if l == 0 {
                    t < self.inputs.len()
                } else {
                    inbox_full[l]
                };
                let downstream_free = l + 1 == n || fetched[l + 1] >= t;
                if upstream_done && downstream_free {
                    Some(if l == 0 {
                        self.inputs[t].clone()
                    } else {
                        self.inbox[l].clone().expect("checked full")
                    })
                } else {
                    None
                }
            };
            let phase_before = self.engines[l].phase;
            let act = self.engines[l].cycle(input.as_ref())?;
            let mut consumed = None;
            match act {
                Activity::Stalled | Activity::Finished => {}
                Activity::Fetched => {
                    progressed = true;
                    if l > 0 {
                        self.inbox[l] = None;
                    }
                    #[cfg(test)]
                    let dropped = self.drop_fetch_signal == Some(l);
                    #[cfg(not(test))]
                    let dropped = false;
                    if !dropped {
                        self.fetched[l] += 1;
                    }
                }
                Activity::Integrated(i) => {
                    progressed = true;
                    consumed = Some(i);
                }
                Activity::Latching | Activity::BiasFire | Activity::Handshake => progressed = true,
                Activity::Completed(frame, v) => {
                    progressed = true;
                    if l + 1 < n {
                        if inbox_full[l + 1] {
                            return Err(Error::State(format!(
                                "cycle {}: layer {l} would overwrite the occupied inbox of layer {}",
                                self.cycle,
                                l + 1
                            )));
                        }
                        writes.push((l + 1, frame.clone()));
                    }
                    self.frames[l].push(frame);
                    self.potentials[l].push(v);
                }
            }
            if self.cfg.record_trace {
                let phase = match phase_before {
                    Phase::Idle if input.is_some() => Phase::Latch,
                    p => p,
                };
                self.trace.push(TraceLine {
                    cycle: self.cycle,
                    layer: l,
                    phase: phase.name(),
                    index: consumed,
                });
            }
        }
        for (l, frame) in writes {
            self.inbox[l] = Some(frame);
        }
        if !progressed && !self.is_finished() {
            return Err(Error::Deadlock {
                cycle: self.cycle,
                trace: self.state_dump(),
            });
        }
        self.cycle += 1;
        Ok(())
    }

    pub fn run(mut self) -> Result<SimResult> {
        while !self.is_finished() {
            if self.cycle >= self.cfg.max_cycles {
                return Err(Error::Deadlock {
                    cycle: self.cycle,
                    trace: format!("cycle limit reached; {}", self.state_dump()),
                });
            }
            self.step_cycle()?;
        }
        let counters = ActivityCounters {
            total_cycles: self.cycle,
            fan_in: self.engines.iter().map(|e| e.layer.fan_in).collect(),
            width: self.engines.iter().map(|e| e.layer.out).collect(),
            layers: self.engines.into_iter().map(|e| e.counters).collect(),
        };
        Ok(SimResult {
            frames: self.frames,
            potentials: self.potentials,
            counters,
            trace: self.trace,
        })
    }
}

/// Simulates one input sequence from reset.
pub fn pipeline_simulate(
    model: &QuantizedModel,
    inputs: &[SpikeFrame],
    cfg: &SimConfig,
) -> Result<SimResult> {
    PipelineSim::new(model, inputs, cfg.clone())?.run()
}

/// Simulates several sequences back to back (state reset in between) and
/// sums their counters.
pub fn simulate_sequences(
    model: &QuantizedModel,
    sequences: &[Vec<SpikeFrame>],
    cfg: &SimConfig,
) -> Result<(Vec<SimResult>, ActivityCounters)> {
    let mut total = ActivityCounters::default();
    let mut results = Vec::with_capacity(sequences.len());
    for s in sequences {
        let r = pipeline_simulate(model, s, cfg)?;
        total.merge(&r.counters)?;
        results.push(r);
    }
    Ok((results, total))
}
