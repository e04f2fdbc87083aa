//! Fully connected tanh network with a linear output layer and hand-written
//! backpropagation over a flat parameter vector.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

/// Layer widths including input and output, e.g. `[54, 64, 64, 8]`.
/// Parameters are stored layer by layer as a row-major `out × in` weight
/// matrix followed by the `out` biases.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Post-activation values of every layer from one forward pass.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    activations: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("at least the input layer")
    }
}

pub fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl Mlp {
    /// Glorot-uniform weights, zero biases; the output layer's weights are
    /// multiplied by `output_scale`.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], output_scale: f64, rng: &mut R) -> Mlp {
        assert!(sizes.len() >= 2, "need input and output sizes");
        let mut params = Vec::with_capacity(param_count(sizes));
        let layers = sizes.len() - 1;
        for (l, w) in sizes.windows(2).enumerate() {
            let (fan_in, fan_out) = (w[0], w[1]);
            let mut bound = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
            if l + 1 == layers {
                bound *= output_scale;
            }
            for _ in 0..fan_in * fan_out {
                params.push(rng.gen_range(-1.0..=1.0) * bound);
            }
            params.resize(params.len() + fan_out, 0.0);
        }
        Mlp {
            sizes: sizes.to_vec(),
            params,
        }
    }

    pub fn from_params(sizes: &[usize], params: Vec<f64>) -> Option<Mlp> {
        if sizes.len() < 2 || params.len() != param_count(sizes) {
            return None;
        }
        Some(Mlp {
            sizes: sizes.to_vec(),
            params,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn input_len(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_len(&self) -> usize {
        *self.sizes.last().expect("nonempty")
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        self.forward_cached(input).activations.pop().expect("output layer")
    }

    pub fn forward_cached(&self, input: &[f64]) -> ForwardCache {
        debug_assert_eq!(input.len(), self.input_len());
        let layers = self.sizes.len() - 1;
        let mut activations = Vec::with_capacity(layers + 1);
        activations.push(input.to_vec());
        let mut offset = 0;
        for l in 0..layers {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[offset..offset + n_in * n_out];
            let b = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            let x = &activations[l];
            let mut out = vec![0.0; n_out];
            for (o, row) in w.chunks_exact(n_in).enumerate() {
                let mut acc = b[o];
                for (wi, xi) in row.iter().zip(x) {
                    acc += wi * xi;
                }
                out[o] = if l + 1 < layers { libm::tanh(acc) } else { acc };
            }
            offset += n_in * n_out + n_out;
            activations.push(out);
        }
        ForwardCache { activations }
    }

    /// Accumulate `∂loss/∂params` into `grads` given `∂loss/∂output`.
    pub fn backward(&self, cache: &ForwardCache, grad_output: &[f64], grads: &mut [f64]) {
        debug_assert_eq!(grads.len(), self.params.len());
        let layers = self.sizes.len() - 1;
        let mut offsets = Vec::with_capacity(layers);
        let mut offset = 0;
        for w in self.sizes.windows(2) {
            offsets.push(offset);
            offset += w[0] * w[1] + w[1];
        }
        // gradient w.r.t. the pre-activation of the current layer
        let mut delta = grad_output.to_vec();
        for l in (0..layers).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let off = offsets[l];
            let x = &cache.activations[l];
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                let row = &mut grads[off + o * n_in..off + (o + 1) * n_in];
                for (g, xi) in row.iter_mut().zip(x) {
                    *g += d * xi;
                }
                grads[off + n_in * n_out + o] += d;
            }
            if l == 0 {
                break;
            }
            let w = &self.params[off..off + n_in * n_out];
            let mut prev = vec![0.0; n_in];
            for (o, row) in w.chunks_exact(n_in).enumerate() {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                for (p, wi) in prev.iter_mut().zip(row) {
                    *p += d * wi;
                }
            }
            // tanh'(a) = 1 - tanh(a)^2, and x holds tanh(a) for hidden layers
            for (p, xi) in prev.iter_mut().zip(x) {
                *p *= 1.0 - xi * xi;
            }
            delta = prev;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::episode_rng;

    #[test]
    fn param_layout() {
        let net = Mlp::new(&[3, 5, 2], 1.0, &mut episode_rng(0));
        assert_eq!(net.params().len(), 3 * 5 + 5 + 5 * 2 + 2);
        assert!(Mlp::from_params(&[3, 5, 2], vec![0.0; 3]).is_none());
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut net = Mlp::new(&[3, 4, 4, 2], 1.0, &mut episode_rng(1));
        for (i, p) in net.params_mut().iter_mut().enumerate() {
            *p += 0.01 * (i % 7) as f64;
        }
        let x = [0.3, -0.7, 0.2];
        // loss = 1.5*y0 - 0.5*y1
        let gout = [1.5, -0.5];
        let cache = net.forward_cached(&x);
        let mut grads = vec![0.0; net.params().len()];
        net.backward(&cache, &gout, &mut grads);
        let h = 1e-6;
        for (i, g) in grads.iter().enumerate() {
            let mut plus = net.clone();
            plus.params_mut()[i] += h;
            let mut minus = net.clone();
            minus.params_mut()[i] -= h;
            let lp = plus.forward(&x);
            let lm = minus.forward(&x);
            let fp = 1.5 * lp[0] - 0.5 * lp[1];
            let fm = 1.5 * lm[0] - 0.5 * lm[1];
            let fd = (fp - fm) / (2.0 * h);
            assert!((fd - g).abs() < 1e-7, "param {i}: {fd} vs {g}");
        }
    }
}
