//! Dense action-value network with rectified-linear hidden layers, trained
//! by plain gradient descent (adaptive-moment variant behind config).
//!
//! Written against flat `Vec<f64>` storage; no tensor library. Parameters are
//! addressable by flat index so tests can difference the loss directly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Affine layer: `y = W x + b`, `W` stored row-major `(out, in)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl Linear {
    fn forward_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for row in 0..self.out_dim {
            let w = &self.w[row * self.in_dim..(row + 1) * self.in_dim];
            let mut acc = self.b[row];
            for (wi, xi) in w.iter().zip(x) {
                acc += wi * xi;
            }
            out.push(acc);
        }
    }
}

/// Per-layer gradient accumulators, same shapes as the parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<(Vec<f64>, Vec<f64>)>,
}

/// Multi-layer action-value network. Hidden layers use rectified-linear
/// activations; the output layer is linear, one value per action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QNetwork {
    pub layers: Vec<Linear>,
}

impl QNetwork {
    /// Build a network with the given layer widths, e.g. `[6, 128, 128, 729]`.
    /// Weights start uniform in `(-sqrt(6/fan_in), sqrt(6/fan_in))`, biases at
    /// zero.
    pub fn new<R: Rng>(dims: &[usize], rng: &mut R) -> Self {
        assert!(dims.len() >= 2, "need at least input and output widths");
        let layers = dims
            .windows(2)
            .map(|d| {
                let (in_dim, out_dim) = (d[0], d[1]);
                let bound = (6.0 / in_dim as f64).sqrt();
                Linear {
                    w: (0..in_dim * out_dim)
                        .map(|_| rng.gen_range(-bound..bound))
                        .collect(),
                    b: vec![0.0; out_dim],
                    in_dim,
                    out_dim,
                }
            })
            .collect();
        Self { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.in_dim)
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.out_dim)
    }

    /// Action values for one state.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(SimError::ShapeMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.forward_into(&cur, &mut next);
            if i != last {
                for v in next.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Forward pass keeping every layer's (post-activation) output; index 0
    /// is the input itself.
    fn forward_activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::with_capacity(layer.out_dim);
            layer.forward_into(acts.last().unwrap(), &mut out);
            if i != last {
                for v in out.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            acts.push(out);
        }
        acts
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients {
            layers: self
                .layers
                .iter()
                .map(|l| (vec![0.0; l.w.len()], vec![0.0; l.b.len()]))
                .collect(),
        }
    }

    /// Mean-squared loss of the chosen-action values against `targets`, with
    /// its gradient. `states[i]`'s value at `actions[i]` is regressed onto
    /// `targets[i]`; the other outputs receive no gradient.
    pub fn loss_and_grad(
        &self,
        states: &[&[f64]],
        actions: &[usize],
        targets: &[f64],
    ) -> Result<(f64, Gradients)> {
        if states.is_empty() || states.len() != actions.len() || states.len() != targets.len() {
            return Err(SimError::ShapeMismatch {
                expected: states.len(),
                got: actions.len().min(targets.len()),
            });
        }
        let batch = states.len() as f64;
        let mut grads = self.zero_gradients();
        let mut loss = 0.0;

        for ((state, &action), &target) in states.iter().zip(actions).zip(targets) {
            if state.len() != self.input_dim() {
                return Err(SimError::ShapeMismatch {
                    expected: self.input_dim(),
                    got: state.len(),
                });
            }
            let acts = self.forward_activations(state);
            let out = acts.last().unwrap();
            if action >= out.len() {
                return Err(SimError::ActionOutOfRange {
                    index: action,
                    limit: out.len(),
                });
            }
            let diff = out[action] - target;
            loss += diff * diff;

            // d(mean loss)/d(output) is nonzero only at the chosen action.
            let mut delta = vec![0.0; out.len()];
            delta[action] = 2.0 * diff / batch;

            for (li, layer) in self.layers.iter().enumerate().rev() {
                let input = &acts[li];
                let (gw, gb) = &mut grads.layers[li];
                for row in 0..layer.out_dim {
                    let d = delta[row];
                    if d != 0.0 {
                        let gw_row = &mut gw[row * layer.in_dim..(row + 1) * layer.in_dim];
                        for (g, xi) in gw_row.iter_mut().zip(input) {
                            *g += d * xi;
                        }
                        gb[row] += d;
                    }
                }
                if li > 0 {
                    let mut prev = vec![0.0; layer.in_dim];
                    for row in 0..layer.out_dim {
                        let d = delta[row];
                        if d != 0.0 {
                            let w_row = &layer.w[row * layer.in_dim..(row + 1) * layer.in_dim];
                            for (p, wi) in prev.iter_mut().zip(w_row) {
                                *p += d * wi;
                            }
                        }
                    }
                    // Rectifier gate: the stored activation is zero exactly
                    // where the unit was clipped.
                    for (p, &a) in prev.iter_mut().zip(&acts[li]) {
                        if a <= 0.0 {
                            *p = 0.0;
                        }
                    }
                    delta = prev;
                }
            }
        }
        Ok((loss / batch, grads))
    }

    /// Plain gradient-descent update.
    pub fn apply_sgd(&mut self, grads: &Gradients, lr: f64) {
        for (layer, (gw, gb)) in self.layers.iter_mut().zip(&grads.layers) {
            for (w, g) in layer.w.iter_mut().zip(gw) {
                *w -= lr * g;
            }
            for (b, g) in layer.b.iter_mut().zip(gb) {
                *b -= lr * g;
            }
        }
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Flat parameter accessors (weights then biases, layer by layer); used
    /// by the finite-difference checks and the adaptive-moment optimizer.
    pub fn get_param(&self, mut idx: usize) -> f64 {
        for l in &self.layers {
            if idx < l.w.len() {
                return l.w[idx];
            }
            idx -= l.w.len();
            if idx < l.b.len() {
                return l.b[idx];
            }
            idx -= l.b.len();
        }
        panic!("parameter index out of range");
    }

    pub fn set_param(&mut self, mut idx: usize, value: f64) {
        for l in &mut self.layers {
            if idx < l.w.len() {
                l.w[idx] = value;
                return;
            }
            idx -= l.w.len();
            if idx < l.b.len() {
                l.b[idx] = value;
                return;
            }
            idx -= l.b.len();
        }
        panic!("parameter index out of range");
    }

    /// Flat view of a gradient set, aligned with the parameter indexing.
    pub fn flatten_grads(grads: &Gradients) -> Vec<f64> {
        let mut out = Vec::new();
        for (gw, gb) in &grads.layers {
            out.extend_from_slice(gw);
            out.extend_from_slice(gb);
        }
        out
    }
}

/// Index of the maximal value; exact ties resolve to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}
