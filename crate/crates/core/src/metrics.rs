//! Per-iteration records emitted by training and evaluation runs.

use serde::{Deserialize, Serialize};

use crate::channel::RsrpCategory;

/// Users bucketed by their best terrestrial RSRP.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RsrpCounts {
    pub good: usize,
    pub fair: usize,
    pub poor: usize,
    pub no_signal: usize,
}

impl RsrpCounts {
    pub fn add(&mut self, cat: RsrpCategory) {
        match cat {
            RsrpCategory::Good => self.good += 1,
            RsrpCategory::Fair => self.fair += 1,
            RsrpCategory::Poor => self.poor += 1,
            RsrpCategory::NoSignal => self.no_signal += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.good + self.fair + self.poor + self.no_signal
    }
}

/// One row of a training or evaluation trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationMetrics {
    pub iteration: usize,
    pub reward: f64,
    pub loss: f64,
    pub epsilon: f64,
    pub rsrp: RsrpCounts,
    pub served: usize,
    pub leo_served: usize,
}
