//! Temporal binning of address events into binary frames.

use super::aer::{EventRecord, Polarity};
use super::{SequenceMeta, SpikeFrameSequence};
use crate::error::{Error, Result};
use crate::spiking::SpikeFrame;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarityFilter {
    On,
    Off,
    Both,
}

impl PolarityFilter {
    fn accepts(self, p: Polarity) -> bool {
        match self {
            PolarityFilter::On => p == Polarity::On,
            PolarityFilter::Off => p == Polarity::Off,
            PolarityFilter::Both => true,
        }
    }
}

/// Binning parameters: `steps` equal half-open bins over `[0, window_us)`
/// on a `width × height` sensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinSpec {
    pub steps: usize,
    pub window_us: u64,
    pub polarity: PolarityFilter,
    pub width: usize,
    pub height: usize,
}

impl BinSpec {
    /// Bin of timestamp `t`, or `None` when `t ≥ window_us`.
    pub fn bin_of(&self, t: u64) -> Option<usize> {
        (t < self.window_us)
            .then(|| ((t as u128 * self.steps as u128) / self.window_us as u128) as usize)
    }
}

/// Frame `b` has bit `y·width + x` set iff at least one accepted event of
/// that pixel falls in `[b·window/T, (b+1)·window/T)`.
pub fn bin_events_to_frames(
    events: &[EventRecord],
    spec: &BinSpec,
    meta: SequenceMeta,
) -> Result<SpikeFrameSequence> {
    if spec.steps == 0 || spec.window_us == 0 {
        return Err(Error::Validation(format!(
            "binning needs steps ≥ 1 and window > 0 (got {} and {})",
            spec.steps, spec.window_us
        )));
    }
    let width = spec.width * spec.height;
    let mut frames: Vec<SpikeFrame> = (0..spec.steps)
        .map(|t| SpikeFrame::silent(width, t))
        .collect();
    for e in events.iter().filter(|e| spec.polarity.accepts(e.polarity)) {
        let (x, y) = (usize::from(e.x), usize::from(e.y));
        if x >= spec.width || y >= spec.height {
            return Err(Error::Validation(format!(
                "event at ({x}, {y}) outside {}x{} sensor",
                spec.width, spec.height
            )));
        }
        if let Some(b) = spec.bin_of(u64::from(e.timestamp_us)) {
            frames[b].bits[y * spec.width + x] = true;
        }
    }
    Ok(SpikeFrameSequence { frames, meta })
}
