//! Dataset ingestion and spike encoding.

mod aer;
mod augment;
mod encode;
mod events;
mod idx;
mod moving_bar;
mod nmnist;
mod split;

pub use aer::{encode_aer, load_aer_events, parse_aer, EventRecord, Polarity};
pub use augment::{augment_with_reversal, reverse_time_augment};
pub use encode::bernoulli_encode;
pub use events::{bin_events_to_frames, BinSpec, PolarityFilter};
pub use idx::{
    load_idx, load_mnist_dir, read_idx_images, read_idx_labels, write_idx_images, write_idx_labels,
    IdxImages, ImageSample,
};
pub use moving_bar::{moving_bar_dataset, synth_moving_bar, BarNoise};
pub use nmnist::{load_nmnist_dir, nmnist_bin_spec, NMNIST_SIDE};
pub use split::DatasetSplit;

use crate::spiking::SpikeFrame;

/// Motion direction tag of a temporal sample. Class index: up = 0, down = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }

    pub fn class_index(self) -> usize {
        match self {
            Direction::Up => 0,
            Direction::Down => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SequenceMeta {
    pub sample_id: u64,
    pub direction: Direction,
    /// Digit class, when the sequence comes from a labelled image.
    pub label: Option<u8>,
}

/// `T` binary frames of equal width plus provenance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpikeFrameSequence {
    pub frames: Vec<SpikeFrame>,
    pub meta: SequenceMeta,
}

impl SpikeFrameSequence {
    pub fn steps(&self) -> usize {
        self.frames.len()
    }

    pub fn width(&self) -> usize {
        self.frames.first().map_or(0, SpikeFrame::width)
    }
}
