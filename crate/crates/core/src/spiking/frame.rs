/// Binary firing vector of one layer at one discrete time step.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpikeFrame {
    pub bits: Vec<bool>,
    pub step_index: usize,
}

impl SpikeFrame {
    pub fn new(bits: Vec<bool>, step_index: usize) -> Self {
        Self { bits, step_index }
    }

    pub fn silent(width: usize, step_index: usize) -> Self {
        Self::new(vec![false; width], step_index)
    }

    /// Frame from a 0/1 vector; any nonzero value counts as a spike.
    pub fn from_values(values: &[f64], step_index: usize) -> Self {
        Self::new(values.iter().map(|&v| v != 0.0).collect(), step_index)
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Ascending indices of the set bits.
    pub fn active_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn to_values(&self) -> Vec<f64> {
        self.bits
            .iter()
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect()
    }
}
