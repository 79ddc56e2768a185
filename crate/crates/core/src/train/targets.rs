//! ±1 target vectors and grouped argmax readout.

use crate::data::{Direction, ImageSample, SequenceMeta};
use crate::error::{Error, Result};
use crate::model::Task;

/// Digit and motion target groups of a dual-task output layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualTaskTargets {
    pub digit: [f64; 10],
    pub motion: [f64; 2],
}

impl DualTaskTargets {
    pub fn new(digit: u8, direction: Direction) -> Result<Self> {
        if digit > 9 {
            return Err(Error::Validation(format!(
                "digit label {digit} outside 0..=9"
            )));
        }
        let mut t = Self {
            digit: [-1.0; 10],
            motion: [-1.0; 2],
        };
        t.digit[digit as usize] = 1.0;
        t.motion[direction.class_index()] = 1.0;
        Ok(t)
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.digit.iter().chain(&self.motion).copied().collect()
    }
}

pub fn output_width(tasks: &[Task]) -> usize {
    tasks.iter().map(|t| t.classes()).sum()
}

/// Concatenated one-hot ±1 groups, one per task.
pub fn class_targets(tasks: &[Task], classes: &[usize]) -> Result<Vec<f64>> {
    if tasks.len() != classes.len() {
        return Err(Error::dim(
            "class per task",
            &[tasks.len()],
            &[classes.len()],
        ));
    }
    let mut out = Vec::with_capacity(output_width(tasks));
    for (&task, &c) in tasks.iter().zip(classes) {
        if c >= task.classes() {
            return Err(Error::Validation(format!(
                "class {c} outside the {} {} classes",
                task.classes(),
                task.name()
            )));
        }
        out.extend((0..task.classes()).map(|k| if k == c { 1.0 } else { -1.0 }));
    }
    Ok(out)
}

/// Index of the largest score; ties go to the lowest index.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Per-task argmax over consecutive output groups.
pub fn group_argmax(scores: &[f64], tasks: &[Task]) -> Vec<usize> {
    let mut offset = 0;
    tasks
        .iter()
        .map(|t| {
            let k = argmax(&scores[offset..offset + t.classes()]);
            offset += t.classes();
            k
        })
        .collect()
}

pub fn image_classes(sample: &ImageSample, tasks: &[Task]) -> Result<Vec<usize>> {
    tasks
        .iter()
        .map(|t| match t {
            Task::Digit => Ok(sample.label as usize),
            Task::Motion => Err(Error::Config("static images carry no motion label".into())),
        })
        .collect()
}

pub fn sequence_classes(meta: &SequenceMeta, tasks: &[Task]) -> Result<Vec<usize>> {
    tasks
        .iter()
        .map(|t| match t {
            Task::Digit => meta.label.map(usize::from).ok_or_else(|| {
                Error::Validation(format!("sequence {} has no digit label", meta.sample_id))
            }),
            Task::Motion => Ok(meta.direction.class_index()),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_targets_have_one_positive_per_group() {
        let t = DualTaskTargets::new(3, Direction::Down).unwrap();
        assert_eq!(t.digit.iter().filter(|&&x| x == 1.0).count(), 1);
        assert_eq!(t.digit[3], 1.0);
        assert_eq!(t.motion, [-1.0, 1.0]);
        let v = class_targets(&[Task::Digit, Task::Motion], &[3, 1]).unwrap();
        assert_eq!(v, t.to_vec());
        assert!(DualTaskTargets::new(10, Direction::Up).is_err());
    }

    #[test]
    fn all_zero_scores_pick_index_zero() {
        assert_eq!(
            group_argmax(&[0.0; 12], &[Task::Digit, Task::Motion]),
            vec![0, 0]
        );
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
    }
}
