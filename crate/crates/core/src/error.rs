use std::io;

/// Errors raised across the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {context}: expected {expected:?}, got {actual:?}")]
    Dimension {
        context: &'static str,
        expected: Vec<usize>,
        actual: Vec<usize>,
    },

    #[error("invalid value: {0}")]
    Validation(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("accumulator overflow in layer {layer}, neuron {neuron} (value {value})")]
    Overflow {
        layer: usize,
        neuron: usize,
        value: i64,
    },

    #[error("malformed file: {0}")]
    Format(String),

    #[error("truncated data: {context}: expected {expected} bytes, found {actual}")]
    Length {
        context: String,
        expected: usize,
        actual: usize,
    },

    #[error("invalid state: {0}")]
    State(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("pipeline deadlock at cycle {cycle}: {trace}")]
    Deadlock { cycle: u64, trace: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn dim(context: &'static str, expected: &[usize], actual: &[usize]) -> Self {
        Error::Dimension {
            context,
            expected: expected.to_vec(),
            actual: actual.to_vec(),
        }
    }
}
