//! Minimal dense feed-forward network with explicit reverse-mode gradients.
//!
//! Hidden layers use tanh; the final layer is linear. The actor applies a
//! softmax on top of the linear output and the critic reads it directly, so
//! one network type serves both. Buffers are plain `Vec<f64>` kept in
//! row-major (out_dim x in_dim) layout.

use alloc::vec;
use alloc::vec::Vec;
// With std in the crate graph (tests), inherent f64 methods shadow this trait.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::rng::RandomSource;

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// Row-major weights, shape (out_dim, in_dim).
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl Layer {
    fn xavier(in_dim: usize, out_dim: usize, scale: f64, rng: &mut RandomSource) -> Self {
        let bound = scale * (6.0 / (in_dim + out_dim) as f64).sqrt();
        let w = (0..in_dim * out_dim)
            .map(|_| rng.uniform_in(-bound, bound))
            .collect();
        Self {
            w,
            b: vec![0.0; out_dim],
            in_dim,
            out_dim,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

/// Post-activation outputs of every layer from the latest forward pass.
#[derive(Debug, Clone, Default)]
pub struct Activations {
    outputs: Vec<Vec<f64>>,
}

impl Activations {
    pub fn output(&self) -> &[f64] {
        self.outputs.last().expect("forward pass not run")
    }
}

/// Parameter gradients with the same shapes as the network; accumulated
/// with `+=` until explicitly zeroed.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub d_w: Vec<Vec<f64>>,
    pub d_b: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(mlp: &Mlp) -> Self {
        Self {
            d_w: mlp.layers.iter().map(|l| vec![0.0; l.w.len()]).collect(),
            d_b: mlp.layers.iter().map(|l| vec![0.0; l.b.len()]).collect(),
        }
    }

    pub fn zero(&mut self) {
        for w in &mut self.d_w {
            w.fill(0.0);
        }
        for b in &mut self.d_b {
            b.fill(0.0);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for w in &mut self.d_w {
            for v in w.iter_mut() {
                *v *= factor;
            }
        }
        for b in &mut self.d_b {
            for v in b.iter_mut() {
                *v *= factor;
            }
        }
    }
}

impl Mlp {
    /// Xavier-uniform init with a down-scaled final layer so initial policy
    /// logits start near zero (close-to-uniform softmax).
    pub fn new(dims: &[usize], rng: &mut RandomSource) -> Self {
        assert!(dims.len() >= 2, "need at least input and output dims");
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, pair)| {
                let scale = if i == last { 0.01 } else { 1.0 };
                Layer::xavier(pair[0], pair[1], scale, rng)
            })
            .collect();
        Self { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().expect("empty mlp").in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("empty mlp").out_dim
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim()];
        dims.extend(self.layers.iter().map(|l| l.out_dim));
        dims
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn params_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.w.iter().chain(l.b.iter()).all(|v| v.is_finite()))
    }

    /// Forward pass caching per-layer activations for the backward pass.
    /// Returns the final (linear) output slice.
    pub fn forward<'a>(&self, input: &[f64], acts: &'a mut Activations) -> &'a [f64] {
        debug_assert_eq!(input.len(), self.input_dim());
        if acts.outputs.len() != self.layers.len() {
            acts.outputs = self.layers.iter().map(|l| vec![0.0; l.out_dim]).collect();
        }
        let n_layers = self.layers.len();
        for (idx, layer) in self.layers.iter().enumerate() {
            let (before, rest) = acts.outputs.split_at_mut(idx);
            let x: &[f64] = if idx == 0 { input } else { &before[idx - 1] };
            let out = &mut rest[0];
            let hidden = idx + 1 < n_layers;
            for o in 0..layer.out_dim {
                let row = &layer.w[o * layer.in_dim..(o + 1) * layer.in_dim];
                let mut z = layer.b[o];
                for (wi, xi) in row.iter().zip(x.iter()) {
                    z += wi * xi;
                }
                out[o] = if hidden { z.tanh() } else { z };
            }
        }
        acts.output()
    }

    /// Accumulate parameter gradients for an upstream gradient `d_output`
    /// on the linear output, reusing the activations of the latest
    /// `forward` call with the same `input`.
    pub fn backward(
        &self,
        input: &[f64],
        acts: &Activations,
        d_output: &[f64],
        grads: &mut Gradients,
    ) {
        debug_assert_eq!(d_output.len(), self.output_dim());
        debug_assert_eq!(acts.outputs.len(), self.layers.len());
        let n_layers = self.layers.len();
        let mut d_z: Vec<f64> = d_output.to_vec();
        for idx in (0..n_layers).rev() {
            let layer = &self.layers[idx];
            let x: &[f64] = if idx == 0 {
                input
            } else {
                &acts.outputs[idx - 1]
            };
            // d_z currently holds dL/d(post-activation); hidden layers fold
            // in the tanh derivative 1 - y^2.
            if idx + 1 < n_layers {
                let y = &acts.outputs[idx];
                for (dz, yi) in d_z.iter_mut().zip(y.iter()) {
                    *dz *= 1.0 - yi * yi;
                }
            }
            let dw = &mut grads.d_w[idx];
            let db = &mut grads.d_b[idx];
            for o in 0..layer.out_dim {
                db[o] += d_z[o];
                let row = &mut dw[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (w, xi) in row.iter_mut().zip(x.iter()) {
                    *w += d_z[o] * xi;
                }
            }
            if idx > 0 {
                let mut d_x = vec![0.0; layer.in_dim];
                for o in 0..layer.out_dim {
                    let row = &layer.w[o * layer.in_dim..(o + 1) * layer.in_dim];
                    for (dx, wi) in d_x.iter_mut().zip(row.iter()) {
                        *dx += d_z[o] * wi;
                    }
                }
                d_z = d_x;
            }
        }
    }
}

/// Serializable snapshot of one network's dimensions and parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub dims: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl From<&Mlp> for MlpParams {
    fn from(mlp: &Mlp) -> Self {
        Self {
            dims: mlp.dims(),
            weights: mlp.layers.iter().map(|l| l.w.clone()).collect(),
            biases: mlp.layers.iter().map(|l| l.b.clone()).collect(),
        }
    }
}

impl MlpParams {
    pub fn into_mlp(self) -> Result<Mlp, &'static str> {
        if self.dims.len() < 2
            || self.weights.len() != self.dims.len() - 1
            || self.biases.len() != self.dims.len() - 1
        {
            return Err("inconsistent layer counts");
        }
        let mut layers = Vec::with_capacity(self.weights.len());
        for (i, (w, b)) in self.weights.into_iter().zip(self.biases).enumerate() {
            let (in_dim, out_dim) = (self.dims[i], self.dims[i + 1]);
            if w.len() != in_dim * out_dim || b.len() != out_dim {
                return Err("parameter tensor shape mismatch");
            }
            layers.push(Layer {
                w,
                b,
                in_dim,
                out_dim,
            });
        }
        Ok(Mlp { layers })
    }
}

/// First-order adaptive-moment optimizer state for one network.
#[derive(Debug, Clone)]
pub struct Adam {
    m_w: Vec<Vec<f64>>,
    v_w: Vec<Vec<f64>>,
    m_b: Vec<Vec<f64>>,
    v_b: Vec<Vec<f64>>,
    t: u64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl Adam {
    pub fn new(mlp: &Mlp) -> Self {
        Self {
            m_w: mlp.layers.iter().map(|l| vec![0.0; l.w.len()]).collect(),
            v_w: mlp.layers.iter().map(|l| vec![0.0; l.w.len()]).collect(),
            m_b: mlp.layers.iter().map(|l| vec![0.0; l.b.len()]).collect(),
            v_b: mlp.layers.iter().map(|l| vec![0.0; l.b.len()]).collect(),
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step(&mut self, mlp: &mut Mlp, grads: &Gradients, lr: f64) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for (idx, layer) in mlp.layers.iter_mut().enumerate() {
            Self::step_tensor(
                &mut layer.w,
                &grads.d_w[idx],
                &mut self.m_w[idx],
                &mut self.v_w[idx],
                lr,
                self.beta1,
                self.beta2,
                self.eps,
                bc1,
                bc2,
            );
            Self::step_tensor(
                &mut layer.b,
                &grads.d_b[idx],
                &mut self.m_b[idx],
                &mut self.v_b[idx],
                lr,
                self.beta1,
                self.beta2,
                self.eps,
                bc1,
                bc2,
            );
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn step_tensor(
        params: &mut [f64],
        grads: &[f64],
        m: &mut [f64],
        v: &mut [f64],
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
        bc1: f64,
        bc2: f64,
    ) {
        for i in 0..params.len() {
            let g = grads[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * g;
            v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}
