use crate::error::{Error, Result};

/// Disjoint train / validation / test partitions.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit<T> {
    pub train: Vec<T>,
    pub validation: Vec<T>,
    pub test: Vec<T>,
}

impl<T> DatasetSplit<T> {
    /// Holds out the last `n_validation` training samples for validation,
    /// e.g. 50k/10k for the MNIST training file.
    pub fn holdout_tail(mut train: Vec<T>, n_validation: usize, test: Vec<T>) -> Result<Self> {
        if n_validation > train.len() {
            return Err(Error::Validation(format!(
                "validation size {n_validation} exceeds {} training samples",
                train.len()
            )));
        }
        let validation = train.split_off(train.len() - n_validation);
        Ok(Self {
            train,
            validation,
            test,
        })
    }

    /// Consecutive slices of one pool: `[0, n_train)`, then validation, then test.
    pub fn consecutive(
        mut pool: Vec<T>,
        n_train: usize,
        n_validation: usize,
        n_test: usize,
    ) -> Result<Self> {
        let need = n_train + n_validation + n_test;
        if need > pool.len() {
            return Err(Error::Validation(format!(
                "split needs {need} samples, pool has {}",
                pool.len()
            )));
        }
        pool.truncate(need);
        let test = pool.split_off(n_train + n_validation);
        let validation = pool.split_off(n_train);
        Ok(Self {
            train: pool,
            validation,
            test,
        })
    }
}
