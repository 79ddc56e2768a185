//! One layer's datapath: serial presynaptic integration with all
//! postsynaptic neurons updated in parallel.

use std::fmt;

use super::scheduler::SchedulerState;
use crate::error::{Error, Result};
use crate::model::NeuronModel;
use crate::quant::{accumulate, QuantizedLayer};
use crate::spiking::SpikeFrame;

/// Fixed per-step phase lengths, in cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseCycles {
    pub latch: u32,
    pub bias_fire: u32,
    pub handshake: u32,
}

impl Default for PhaseCycles {
    fn default() -> Self {
        Self {
            latch: 1,
            bias_fire: 2,
            handshake: 1,
        }
    }
}

impl PhaseCycles {
    /// Per-step cycles outside integration.
    pub fn overhead(&self) -> u64 {
        u64::from(self.latch) + u64::from(self.bias_fire) + u64::from(self.handshake)
    }

    pub fn validate(&self) -> Result<()> {
        if self.latch == 0 || self.bias_fire == 0 || self.handshake == 0 {
            return Err(Error::Config(format!(
                "every phase needs at least one cycle, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Idle,
    Latch,
    Integrating,
    BiasFire,
    WaitingHandshake,
    Done,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Idle => "idle",
            Phase::Latch => "latch",
            Phase::Integrating => "integrating",
            Phase::BiasFire => "bias_fire",
            Phase::WaitingHandshake => "handshake",
            Phase::Done => "done",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What an engine did in one cycle.
#[derive(Debug, Clone, PartialEq)]
pub enum Activity {
    /// Waiting for its start conditions with steps still to run.
    Stalled,
    /// All steps finished.
    Finished,
    /// Latched an input frame (first latch cycle).
    Fetched,
    Latching,
    /// Consumed one presynaptic index.
    Integrated(usize),
    BiasFire,
    Handshake,
    /// Last handshake cycle: the step's output frame and pre-reset potentials.
    Completed(SpikeFrame, Vec<i64>),
}

/// Per-layer activity counters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LayerCounters {
    pub weight_row_fetches: u64,
    pub accumulate_ops: u64,
    pub neuron_fire_checks: u64,
    pub integrating_cycles: u64,
    pub overhead_cycles: u64,
    pub stall_cycles: u64,
    pub idle_cycles: u64,
    /// Active presynaptic inputs at every processed step.
    pub active_per_step: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct LayerEngine {
    pub id: usize,
    pub layer: QuantizedLayer,
    pub neuron: NeuronModel,
    pub membrane: Vec<i64>,
    pub phase: Phase,
    /// Index of the step being processed, or the next one when idle.
    pub step: usize,
    pub steps: usize,
    pub counters: LayerCounters,
    phases: PhaseCycles,
    scheduler: SchedulerState,
    phase_left: u32,
    pending: Option<(SpikeFrame, Vec<i64>)>,
}

impl LayerEngine {
    pub fn new(
        id: usize,
        layer: QuantizedLayer,
        neuron: NeuronModel,
        steps: usize,
        phases: PhaseCycles,
    ) -> Result<Self> {
        phases.validate()?;
        let out = layer.out;
        Ok(Self {
            id,
            layer,
            neuron,
            membrane: vec![0; out],
            phase: if steps == 0 { Phase::Done } else { Phase::Idle },
            step: 0,
            steps,
            counters: LayerCounters::default(),
            phases,
            scheduler: SchedulerState::new(Vec::new()),
            phase_left: 0,
            pending: None,
        })
    }

    pub fn is_done(&self) -> bool {
        self.phase == Phase::Done
    }

    fn enter_after_latch(&mut self) {
        if self.scheduler.has_next() {
            self.phase = Phase::Integrating;
        } else {
            self.phase = Phase::BiasFire;
            self.phase_left = self.phases.bias_fire;
        }
    }

    /// Advances one cycle. `start` carries the input frame when both
    /// handshake conditions hold and the engine is idle.
    pub fn cycle(&mut self, start: Option<&SpikeFrame>) -> Result<Activity> {
        match self.phase {
            Phase::Done => {
                self.counters.idle_cycles += 1;
                Ok(Activity::Finished)
            }
            Phase::Idle => {
                let Some(frame) = start else {
                    self.counters.stall_cycles += 1;
                    return Ok(Activity::Stalled);
                };
                if frame.width() != self.layer.fan_in {
                    return Err(Error::Config(format!(
                        "layer {} expects {} inputs, frame has {}",
                        self.id,
                        self.layer.fan_in,
                        frame.width()
                    )));
                }
                self.counters.overhead_cycles += 1;
                self.counters.active_per_step.push(frame.popcount() as u64);
                self.scheduler = SchedulerState::new(frame.bits.clone());
                if self.neuron == NeuronModel::Dc {
                    self.membrane.fill(0);
                }
                self.phase_left = self.phases.latch - 1;
                if self.phase_left == 0 {
                    self.enter_after_latch();
                } else {
                    self.phase = Phase::Latch;
                }
                Ok(Activity::Fetched)
            }
            Phase::Latch => {
                self.counters.overhead_cycles += 1;
                self.phase_left -= 1;
                if self.phase_left == 0 {
                    self.enter_after_latch();
                }
                Ok(Activity::Latching)
            }
            Phase::Integrating => {
                let i = self.scheduler.priority_encode_next().ok_or_else(|| {
                    Error::State(format!(
                        "layer {} integrating with no pending index",
                        self.id
                    ))
                })?;
                let fan_in = self.layer.fan_in;
                for (o, v) in self.membrane.iter_mut().enumerate() {
                    let w = self.layer.weights_q[o * fan_in + i];
                    *v = accumulate(*v, i64::from(w), self.id, o)?;
                }
                self.counters.weight_row_fetches += 1;
                self.counters.accumulate_ops += self.layer.out as u64;
                self.counters.integrating_cycles += 1;
                if !self.scheduler.has_next() {
                    self.phase = Phase::BiasFire;
                    self.phase_left = self.phases.bias_fire;
                }
                Ok(Activity::Integrated(i))
            }
            Phase::BiasFire => {
                self.counters.overhead_cycles += 1;
                self.phase_left -= 1;
                if self.phase_left == 0 {
                    self.bias_and_fire()?;
                    self.phase = Phase::WaitingHandshake;
                    self.phase_left = self.phases.handshake;
                }
                Ok(Activity::BiasFire)
            }
            Phase::WaitingHandshake => {
                self.counters.overhead_cycles += 1;
                self.phase_left -= 1;
                if self.phase_left > 0 {
                    return Ok(Activity::Handshake);
                }
                let (frame, v) = self.pending.take().ok_or_else(|| {
                    Error::State(format!("layer {} has no output to hand over", self.id))
                })?;
                self.step += 1;
                self.phase = if self.step == self.steps {
                    Phase::Done
                } else {
                    Phase::Idle
                };
                Ok(Activity::Completed(frame, v))
            }
        }
    }

    fn bias_and_fire(&mut self) -> Result<()> {
        let mut v_pre = Vec::with_capacity(self.layer.out);
        let mut bits = Vec::with_capacity(self.layer.out);
        for (o, v) in self.membrane.iter_mut().enumerate() {
            let pre = accumulate(*v, i64::from(self.layer.bias_q[o]), self.id, o)?;
            let fire = pre > self.layer.theta_q;
            *v = match self.neuron {
                NeuronModel::Ct if fire => accumulate(pre, -self.layer.theta_q, self.id, o)?,
                _ => pre,
            };
            v_pre.push(pre);
            bits.push(fire);
        }
        self.counters.accumulate_ops += self.layer.out as u64;
        self.counters.neuron_fire_checks += self.layer.out as u64;
        self.pending = Some((SpikeFrame::new(bits, self.step), v_pre));
        Ok(())
    }
}
