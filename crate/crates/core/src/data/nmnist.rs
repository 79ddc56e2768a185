//! N-MNIST directory layout: `<root>/<digit>/<sample>.bin`, each file an
//! AER stream. Only the first saccade is used: on-events in the first
//! 100 ms, binned into 16 steps on the 34×34 sensor.

use std::fs;
use std::path::Path;

use super::aer::load_aer_events;
use super::events::{bin_events_to_frames, BinSpec, PolarityFilter};
use super::{Direction, SequenceMeta, SpikeFrameSequence};
use crate::error::{Error, Result};

pub const NMNIST_SIDE: usize = 34;

pub fn nmnist_bin_spec(steps: usize) -> BinSpec {
    BinSpec {
        steps,
        window_us: 100_000,
        polarity: PolarityFilter::On,
        width: NMNIST_SIDE,
        height: NMNIST_SIDE,
    }
}

/// Loads every `<digit>/*.bin` under `root` in sorted path order. The first
/// saccade moves the digit down, so every sequence is tagged `Down`.
pub fn load_nmnist_dir(root: &Path, spec: &BinSpec) -> Result<Vec<SpikeFrameSequence>> {
    let mut out = Vec::new();
    for digit in 0u8..10 {
        let dir = root.join(digit.to_string());
        if !dir.is_dir() {
            continue;
        }
        let mut files: Vec<_> = fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "bin"))
            .collect();
        files.sort();
        for f in files {
            let events = load_aer_events(&f)?;
            let meta = SequenceMeta {
                sample_id: out.len() as u64,
                direction: Direction::Down,
                label: Some(digit),
            };
            out.push(bin_events_to_frames(&events, spec, meta)?);
        }
    }
    if out.is_empty() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("no <digit>/*.bin event files under {}", root.display()),
        )));
    }
    Ok(out)
}
