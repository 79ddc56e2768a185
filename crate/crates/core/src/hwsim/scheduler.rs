//! Priority-encoder spike scheduler.

/// Serializes a spike vector into ascending active indices, one per call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchedulerState {
    pub spike_vector: Vec<bool>,
    pub cursor: usize,
}

impl SchedulerState {
    pub fn new(spike_vector: Vec<bool>) -> Self {
        Self {
            spike_vector,
            cursor: 0,
        }
    }

    /// Whether another index is pending; the encoder's valid line.
    pub fn has_next(&self) -> bool {
        self.spike_vector[self.cursor.min(self.spike_vector.len())..]
            .iter()
            .any(|&b| b)
    }

    /// Lowest set index at or after the cursor; `None` once exhausted.
    pub fn priority_encode_next(&mut self) -> Option<usize> {
        let rest = self.spike_vector.get(self.cursor..)?;
        let offset = rest.iter().position(|&b| b)?;
        let idx = self.cursor + offset;
        self.cursor = idx + 1;
        Some(idx)
    }
}

pub fn priority_encode_next(state: &mut SchedulerState) -> Option<usize> {
    state.priority_encode_next()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn drain(bits: &[u8]) -> Vec<usize> {
        let mut s = SchedulerState::new(bits.iter().map(|&b| b == 1).collect());
        std::iter::from_fn(|| s.priority_encode_next()).collect()
    }

    #[test]
    fn examples() {
        assert_eq!(drain(&[0, 1, 0, 1]), vec![1, 3]);
        assert_eq!(drain(&[0, 0, 0]), Vec::<usize>::new());
        assert_eq!(drain(&[1, 1, 1, 1]), vec![0, 1, 2, 3]);
        assert!(!SchedulerState::new(vec![]).has_next());
    }

    proptest! {
        #[test]
        fn matches_brute_force_scan(bits in proptest::collection::vec(any::<bool>(), 0..200)) {
            let expected: Vec<usize> = (0..bits.len()).filter(|&i| bits[i]).collect();
            let mut s = SchedulerState::new(bits.clone());
            let mut got = Vec::new();
            while s.has_next() {
                got.push(s.priority_encode_next().unwrap());
            }
            prop_assert_eq!(s.priority_encode_next(), None);
            prop_assert_eq!(got, expected);
        }
    }
}
