use super::SpikeFrameSequence;

/// Plays a sequence backwards: frames reversed, step indices renumbered,
/// direction tag flipped.
pub fn reverse_time_augment(seq: &SpikeFrameSequence) -> SpikeFrameSequence {
    let frames = seq
        .frames
        .iter()
        .rev()
        .enumerate()
        .map(|(t, f)| {
            let mut f = f.clone();
            f.step_index = t;
            f
        })
        .collect();
    let mut meta = seq.meta.clone();
    meta.direction = meta.direction.flipped();
    SpikeFrameSequence { frames, meta }
}

/// The original set followed by the reversed copy of every sequence.
pub fn augment_with_reversal(set: &[SpikeFrameSequence]) -> Vec<SpikeFrameSequence> {
    set.iter()
        .cloned()
        .chain(set.iter().map(reverse_time_augment))
        .collect()
}
