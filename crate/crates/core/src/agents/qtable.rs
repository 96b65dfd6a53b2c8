//! Tabular Q-learning baseline over a discretized control state.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Sparse action-value table; absent entries read as zero.
///
/// State keys come from quantizing each normalized state component onto a
/// small grid (per-sector power and tilt levels for the network environment).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    values: BTreeMap<u64, BTreeMap<u16, f64>>,
    num_actions: usize,
    /// Quantization levels applied cyclically across state components.
    quantization: Vec<usize>,
}

impl QTable {
    pub fn new(num_actions: usize, quantization: Vec<usize>) -> Self {
        debug_assert!(num_actions > 0 && !quantization.is_empty());
        Self {
            values: BTreeMap::new(),
            num_actions,
            quantization,
        }
    }

    /// Discretize a normalized state vector into a table key.
    pub fn key(&self, state: &[f64]) -> u64 {
        let mut key = 0u64;
        for (i, &x) in state.iter().enumerate() {
            let levels = self.quantization[i % self.quantization.len()] as u64;
            let level = ((x.clamp(0.0, 1.0) * (levels - 1) as f64).round() as u64).min(levels - 1);
            key = key.wrapping_mul(levels).wrapping_add(level);
        }
        key
    }

    pub fn get(&self, key: u64, action: usize) -> f64 {
        self.values
            .get(&key)
            .and_then(|row| row.get(&(action as u16)))
            .copied()
            .unwrap_or(0.0)
    }

    /// Best action value in a state; unvisited actions count as zero.
    pub fn max_value(&self, key: u64) -> f64 {
        match self.values.get(&key) {
            None => 0.0,
            Some(row) => {
                let best = row.values().copied().fold(f64::NEG_INFINITY, f64::max);
                if row.len() < self.num_actions {
                    best.max(0.0)
                } else {
                    best
                }
            }
        }
    }

    /// Greedy action; exact ties resolve to the lowest index.
    pub fn argmax(&self, key: u64) -> usize {
        let mut best = 0;
        let mut best_v = f64::NEG_INFINITY;
        for a in 0..self.num_actions {
            let v = self.get(key, a);
            if v > best_v {
                best = a;
                best_v = v;
            }
        }
        best
    }

    /// One temporal-difference backup:
    /// `Q <- Q + alpha (r + gamma max_a' Q(next, a') - Q)`, with the lookahead
    /// dropped on terminal transitions. Returns the updated value.
    pub fn update(
        &mut self,
        key: u64,
        action: usize,
        reward: f64,
        next_key: u64,
        terminal: bool,
        alpha: f64,
        gamma: f64,
    ) -> f64 {
        let target = if terminal {
            reward
        } else {
            reward + gamma * self.max_value(next_key)
        };
        let q = self.get(key, action);
        let updated = q + alpha * (target - q);
        self.values
            .entry(key)
            .or_default()
            .insert(action as u16, updated);
        updated
    }

    pub fn visited_states(&self) -> usize {
        self.values.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_entries_read_zero() {
        let t = QTable::new(9, vec![8, 15]);
        assert_eq!(t.get(123, 4), 0.0);
        assert_eq!(t.max_value(123), 0.0);
        assert_eq!(t.argmax(123), 0);
    }

    #[test]
    fn update_hand_calculation() {
        let mut t = QTable::new(4, vec![4]);
        // Q = 0, r = 1, gamma = 0.9, next max = 0, alpha = 0.5 -> 0.5.
        let v = t.update(0, 1, 1.0, 99, false, 0.5, 0.9);
        assert_eq!(v, 0.5);
        assert_eq!(t.get(0, 1), 0.5);
    }

    #[test]
    fn terminal_with_full_rate_sets_reward() {
        let mut t = QTable::new(4, vec![4]);
        t.update(7, 2, -3.0, 0, true, 1.0, 0.99);
        assert_eq!(t.get(7, 2), -3.0);
    }

    #[test]
    fn self_loop_converges_to_discounted_fixed_point() {
        let mut t = QTable::new(1, vec![4]);
        let (r, gamma, alpha) = (1.0, 0.9, 0.5);
        for _ in 0..200 {
            t.update(5, 0, r, 5, false, alpha, gamma);
        }
        let fixed_point = r / (1.0 - gamma);
        assert!((t.get(5, 0) - fixed_point).abs() < 1e-6);
    }

    #[test]
    fn key_quantization_is_stable_and_distinguishes_levels() {
        let t = QTable::new(9, vec![8, 15]);
        let a = t.key(&[0.0, 0.0, 0.5, 0.5, 1.0, 1.0]);
        assert_eq!(a, t.key(&[0.0, 0.0, 0.5, 0.5, 1.0, 1.0]));
        // Small jitter within a cell maps to the same key.
        assert_eq!(a, t.key(&[0.01, 0.01, 0.49, 0.51, 0.999, 0.99]));
        // A full level step does not.
        assert_ne!(a, t.key(&[0.0, 0.0, 0.5, 0.5, 1.0, 0.9]));
        // Out-of-range values clamp instead of wrapping.
        assert_eq!(
            t.key(&[-0.2, 0.0, 0.5, 0.5, 1.2, 1.0]),
            t.key(&[0.0, 0.0, 0.5, 0.5, 1.0, 1.0])
        );
    }

    #[test]
    fn argmax_tie_breaks_low() {
        let mut t = QTable::new(3, vec![4]);
        t.update(1, 2, 1.0, 0, true, 1.0, 0.9);
        t.update(1, 1, 1.0, 0, true, 1.0, 0.9);
        assert_eq!(t.argmax(1), 1);
    }
}
