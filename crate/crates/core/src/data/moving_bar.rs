//! Synthetic moving-bar sequences: a horizontal bar moves one row per step
//! on a `grid × grid` sensor, wrapping around. Distinguishing up from down
//! needs the frame order; any single frame looks the same for both.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Direction, SequenceMeta, SpikeFrameSequence};
use crate::error::{Error, Result};
use crate::spiking::SpikeFrame;

/// Firing probabilities of bar pixels and background pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarNoise {
    pub bar: f64,
    pub background: f64,
}

impl BarNoise {
    pub const NONE: BarNoise = BarNoise {
        bar: 1.0,
        background: 0.0,
    };
}

impl Default for BarNoise {
    fn default() -> Self {
        Self {
            bar: 0.9,
            background: 0.02,
        }
    }
}

fn bar_row(start: usize, t: usize, grid: usize, direction: Direction) -> usize {
    match direction {
        Direction::Down => (start + t) % grid,
        Direction::Up => (start + grid - t % grid) % grid,
    }
}

/// `n_samples` sequences of `steps` frames, all moving in `direction`, each
/// from a random start row. Sample ids count up from `first_id`.
pub fn synth_moving_bar(
    n_samples: usize,
    steps: usize,
    grid: usize,
    direction: Direction,
    noise: BarNoise,
    first_id: u64,
    rng: &mut impl Rng,
) -> Result<Vec<SpikeFrameSequence>> {
    if grid == 0 || steps > grid {
        return Err(Error::Validation(format!(
            "moving bar needs 0 < steps ≤ grid (steps {steps}, grid {grid})"
        )));
    }
    let mut out = Vec::with_capacity(n_samples);
    for n in 0..n_samples {
        let start = rng.random_range(0..grid);
        let frames = (0..steps)
            .map(|t| {
                let row = bar_row(start, t, grid, direction);
                let bits = (0..grid * grid)
                    .map(|i| {
                        let p = if i / grid == row {
                            noise.bar
                        } else {
                            noise.background
                        };
                        p >= 1.0 || (p > 0.0 && rng.random::<f64>() < p)
                    })
                    .collect();
                SpikeFrame::new(bits, t)
            })
            .collect();
        out.push(SpikeFrameSequence {
            frames,
            meta: SequenceMeta {
                sample_id: first_id + n as u64,
                direction,
                label: None,
            },
        });
    }
    Ok(out)
}

/// Balanced, shuffled two-direction set, reproducible from its arguments.
/// The first half of the ids moves down, the second half up.
pub fn moving_bar_dataset(
    seed: u64,
    n_samples: usize,
    steps: usize,
    grid: usize,
) -> Result<Vec<SpikeFrameSequence>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let down = n_samples / 2;
    let mut set = synth_moving_bar(
        down,
        steps,
        grid,
        Direction::Down,
        BarNoise::default(),
        0,
        &mut rng,
    )?;
    set.extend(synth_moving_bar(
        n_samples - down,
        steps,
        grid,
        Direction::Up,
        BarNoise::default(),
        down as u64,
        &mut rng,
    )?);
    set.shuffle(&mut rng);
    Ok(set)
}
