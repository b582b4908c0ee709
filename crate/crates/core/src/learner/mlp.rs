use rand::Rng;

use crate::error::{Error, Result};

/// Dense network with `tanh` hidden layers and a linear output layer.
///
/// Parameters live in one flat vector: for each layer the row-major weight
/// matrix (`out × in`) followed by the bias vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Layer activations kept from a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct Trace {
    /// `acts[0]` is the input; `acts[l]` the post-activation output of layer `l`.
    acts: Vec<Vec<f64>>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("trace holds the input")
    }
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl Mlp {
    /// Xavier-uniform weights, zero biases.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        validate_sizes(sizes)?;
        let mut params = Vec::with_capacity(param_count(sizes));
        for w in sizes.windows(2) {
            let limit = (6.0 / (w[0] + w[1]) as f64).sqrt();
            params.extend((0..w[0] * w[1]).map(|_| rng.random_range(-limit..limit)));
            params.extend(std::iter::repeat_n(0.0, w[1]));
        }
        Ok(Self { sizes: sizes.to_vec(), params })
    }

    pub fn from_params(sizes: &[usize], params: Vec<f64>) -> Result<Self> {
        validate_sizes(sizes)?;
        let want = param_count(sizes);
        if params.len() != want {
            return Err(Error::ShapeMismatch(format!("{} parameters for an architecture needing {want}", params.len())));
        }
        Ok(Self { sizes: sizes.to_vec(), params })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("validated nonempty")
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.trace(x).acts.pop().expect("trace holds the input")
    }

    pub fn trace(&self, x: &[f64]) -> Trace {
        debug_assert_eq!(x.len(), self.sizes[0]);
        let layers = self.sizes.len() - 1;
        let mut acts = Vec::with_capacity(layers + 1);
        acts.push(x.to_vec());
        let mut offset = 0;
        for l in 0..layers {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[offset..offset + n_in * n_out];
            let b = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            offset += n_in * n_out + n_out;
            let input = &acts[l];
            let out: Vec<f64> = (0..n_out)
                .map(|o| {
                    let z = b[o] + w[o * n_in..(o + 1) * n_in].iter().zip(input).map(|(a, b)| a * b).sum::<f64>();
                    if l + 1 < layers {
                        z.tanh()
                    } else {
                        z
                    }
                })
                .collect();
            acts.push(out);
        }
        Trace { acts }
    }

    /// Accumulate `d(out·grad_out)/dθ` into `grad_params`; return the input gradient.
    pub fn backward(&self, trace: &Trace, grad_out: &[f64], grad_params: &mut [f64]) -> Vec<f64> {
        let layers = self.sizes.len() - 1;
        let mut offsets = Vec::with_capacity(layers);
        let mut offset = 0;
        for l in 0..layers {
            offsets.push(offset);
            offset += self.sizes[l] * self.sizes[l + 1] + self.sizes[l + 1];
        }
        let mut delta = grad_out.to_vec();
        for l in (0..layers).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            if l + 1 < layers {
                // Output of a hidden layer went through tanh.
                for (d, a) in delta.iter_mut().zip(&trace.acts[l + 1]) {
                    *d *= 1.0 - a * a;
                }
            }
            let off = offsets[l];
            let input = &trace.acts[l];
            let w = &self.params[off..off + n_in * n_out];
            let mut next = vec![0.0; n_in];
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                let row = &mut grad_params[off + o * n_in..off + (o + 1) * n_in];
                for ((g, x), (nx, wv)) in row.iter_mut().zip(input).zip(next.iter_mut().zip(&w[o * n_in..(o + 1) * n_in])) {
                    *g += d * x;
                    *nx += d * wv;
                }
                grad_params[off + n_in * n_out + o] += d;
            }
            delta = next;
        }
        delta
    }
}

fn validate_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(Error::ShapeMismatch(format!("layer sizes {sizes:?}")));
    }
    Ok(())
}
