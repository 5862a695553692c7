//! Small feed-forward value approximator with hand-rolled gradients.
//!
//! Two rectifier hidden layers; parameters live in one flat vector so
//! gradient buffers, SGD steps, finite-difference checks, and checkpoints
//! all share the same layout: `[w1 | b1 | w2 | b2 | w3 | b3]`, weights
//! row-major.

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mlp {
    pub input: usize,
    pub hidden: usize,
    pub output: usize,
    pub params: Vec<f64>,
}

/// Forward-pass activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct Cache {
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    pub q: Vec<f64>,
}

impl Mlp {
    pub fn new(input: usize, hidden: usize, output: usize, rng: &mut impl Rng) -> Self {
        let n = hidden * input + hidden + hidden * hidden + hidden + output * hidden + output;
        let mut params = vec![0.0; n];
        // Uniform Xavier init per layer; biases start at zero.
        let mut offset = 0;
        for (fan_in, fan_out, rows, cols) in [
            (input, hidden, hidden, input),
            (hidden, hidden, hidden, hidden),
            (hidden, output, output, hidden),
        ] {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for k in 0..rows * cols {
                params[offset + k] = rng.gen_range(-limit..limit);
            }
            offset += rows * cols + rows; // skip the zeroed bias block
        }
        Self {
            input,
            hidden,
            output,
            params,
        }
    }

    fn offsets(&self) -> (usize, usize, usize, usize, usize) {
        let w1 = 0;
        let b1 = w1 + self.hidden * self.input;
        let w2 = b1 + self.hidden;
        let b2 = w2 + self.hidden * self.hidden;
        let w3 = b2 + self.hidden;
        // b3 = w3 + output*hidden
        (w1, b1, w2, b2, w3)
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.forward_cached(x).q
    }

    pub fn forward_cached(&self, x: &[f64]) -> Cache {
        debug_assert_eq!(x.len(), self.input);
        let (w1, b1, w2, b2, w3) = self.offsets();
        let b3 = w3 + self.output * self.hidden;
        let p = &self.params;

        let mut a1 = vec![0.0; self.hidden];
        for r in 0..self.hidden {
            let row = w1 + r * self.input;
            let mut z = p[b1 + r];
            for (k, &xv) in x.iter().enumerate() {
                z += p[row + k] * xv;
            }
            a1[r] = z.max(0.0);
        }
        let mut a2 = vec![0.0; self.hidden];
        for r in 0..self.hidden {
            let row = w2 + r * self.hidden;
            let mut z = p[b2 + r];
            for (k, &av) in a1.iter().enumerate() {
                z += p[row + k] * av;
            }
            a2[r] = z.max(0.0);
        }
        let mut q = vec![0.0; self.output];
        for r in 0..self.output {
            let row = w3 + r * self.hidden;
            let mut z = p[b3 + r];
            for (k, &av) in a2.iter().enumerate() {
                z += p[row + k] * av;
            }
            q[r] = z;
        }
        Cache { a1, a2, q }
    }

    /// Accumulate into `grad` the gradient of `(q[action] - y)^2` for one
    /// sample. `grad` must have `n_params()` entries.
    pub fn accumulate_grad(
        &self,
        x: &[f64],
        cache: &Cache,
        action: usize,
        y: f64,
        grad: &mut [f64],
    ) {
        let (w1o, b1o, w2o, b2o, w3o) = self.offsets();
        let b3o = w3o + self.output * self.hidden;
        let p = &self.params;
        let g = 2.0 * (cache.q[action] - y);

        // Output layer: only the taken action's row gets gradient.
        let row3 = w3o + action * self.hidden;
        for k in 0..self.hidden {
            grad[row3 + k] += g * cache.a2[k];
        }
        grad[b3o + action] += g;

        // Backprop into the second hidden layer.
        let mut dz2 = vec![0.0; self.hidden];
        for k in 0..self.hidden {
            if cache.a2[k] > 0.0 {
                dz2[k] = g * p[row3 + k];
            }
        }
        for r in 0..self.hidden {
            if dz2[r] != 0.0 {
                let row = w2o + r * self.hidden;
                for k in 0..self.hidden {
                    grad[row + k] += dz2[r] * cache.a1[k];
                }
                grad[b2o + r] += dz2[r];
            }
        }

        // And into the first.
        let mut dz1 = vec![0.0; self.hidden];
        for k in 0..self.hidden {
            if cache.a1[k] > 0.0 {
                let mut acc = 0.0;
                for r in 0..self.hidden {
                    if dz2[r] != 0.0 {
                        acc += dz2[r] * p[w2o + r * self.hidden + k];
                    }
                }
                dz1[k] = acc;
            }
        }
        for r in 0..self.hidden {
            if dz1[r] != 0.0 {
                let row = w1o + r * self.input;
                for (k, &xv) in x.iter().enumerate() {
                    grad[row + k] += dz1[r] * xv;
                }
                grad[b1o + r] += dz1[r];
            }
        }
    }

    pub fn sgd_step(&mut self, grad: &[f64], lr: f64) {
        for (p, g) in self.params.iter_mut().zip(grad.iter()) {
            *p -= lr * g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn squared_loss(net: &Mlp, x: &[f64], action: usize, y: f64) -> f64 {
        let q = net.forward(x);
        (q[action] - y) * (q[action] - y)
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut net = Mlp::new(7, 16, 4, &mut rng);
        let x: Vec<f64> = (0..7).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let action = 2;
        let y = 0.7;

        let cache = net.forward_cached(&x);
        let mut grad = vec![0.0; net.n_params()];
        net.accumulate_grad(&x, &cache, action, y, &mut grad);

        let eps = 1e-6;
        let mut max_rel: f64 = 0.0;
        let mut checked = 0;
        for idx in 0..net.n_params() {
            let orig = net.params[idx];
            net.params[idx] = orig + eps;
            let up = squared_loss(&net, &x, action, y);
            net.params[idx] = orig - eps;
            let down = squared_loss(&net, &x, action, y);
            net.params[idx] = orig;
            let numeric = (up - down) / (2.0 * eps);
            let denom = numeric.abs().max(grad[idx].abs()).max(1e-8);
            let rel = (numeric - grad[idx]).abs() / denom;
            // Skip entries sitting exactly on a rectifier kink.
            if numeric.abs() > 1e-10 || grad[idx].abs() > 1e-10 {
                max_rel = max_rel.max(rel);
                checked += 1;
            }
        }
        assert!(checked > 100);
        assert!(max_rel < 1e-4, "max relative error {max_rel}");
    }

    #[test]
    fn sgd_descends_on_fixed_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut net = Mlp::new(4, 16, 3, &mut rng);
        let x = [0.3, -0.2, 0.9, 0.5];
        let before = squared_loss(&net, &x, 1, 2.0);
        for _ in 0..200 {
            let cache = net.forward_cached(&x);
            let mut grad = vec![0.0; net.n_params()];
            net.accumulate_grad(&x, &cache, 1, 2.0, &mut grad);
            net.sgd_step(&grad, 0.01);
        }
        let after = squared_loss(&net, &x, 1, 2.0);
        assert!(after < before * 0.01, "{before} -> {after}");
    }

    #[test]
    fn init_is_deterministic_per_seed() {
        let a = Mlp::new(5, 8, 3, &mut ChaCha8Rng::seed_from_u64(9));
        let b = Mlp::new(5, 8, 3, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a.params, b.params);
    }
}
