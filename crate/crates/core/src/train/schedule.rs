//! Exponential learning-rate decay between two endpoints.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrSchedule {
    pub lr_start: f64,
    pub lr_end: f64,
    pub total_epochs: usize,
}

impl LrSchedule {
    pub fn new(lr_start: f64, lr_end: f64, total_epochs: usize) -> Self {
        Self {
            lr_start,
            lr_end,
            total_epochs,
        }
    }

    pub fn lr(&self, epoch: usize) -> f64 {
        lr_exponential_decay(epoch as f64, self)
    }
}

/// `lr_start·(lr_end/lr_start)^(e/(E−1))`; `lr_start` when `E < 2`.
///
/// Fractional epochs are accepted; epochs outside `[0, E−1]` clamp to the
/// endpoints. The endpoints are returned exactly.
pub fn lr_exponential_decay(epoch: f64, s: &LrSchedule) -> f64 {
    if s.total_epochs < 2 || epoch <= 0.0 {
        return s.lr_start;
    }
    let last = (s.total_epochs - 1) as f64;
    if epoch >= last {
        return s.lr_end;
    }
    s.lr_start * (s.lr_end / s.lr_start).powf(epoch / last)
}
