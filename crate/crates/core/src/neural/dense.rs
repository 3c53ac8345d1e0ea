use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tensor::Tensor2;
use super::training::softmax;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Identity,
    Relu,
    Tanh,
    Softmax,
}

/// Fully connected layer `y = g(W x + b)` with `W` stored as out × in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub weight: Tensor2,
    pub bias: Tensor2,
    pub activation: Activation,
}

#[derive(Debug, Clone)]
pub struct DenseCache {
    pub input: Vec<f64>,
    pub output: Vec<f64>,
}

impl Dense {
    pub fn new<R: Rng>(inputs: usize, outputs: usize, activation: Activation, rng: &mut R) -> Self {
        Dense {
            weight: Tensor2::uniform(outputs, inputs, inputs, rng),
            bias: Tensor2::uniform(outputs, 1, inputs, rng),
            activation,
        }
    }

    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Dense {
            weight: Tensor2::zeros(outputs, inputs),
            bias: Tensor2::zeros(outputs, 1),
            activation,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weight.cols
    }

    pub fn outputs(&self) -> usize {
        self.weight.rows
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.inputs() {
            return Err(Error::shape(self.inputs(), x.len()));
        }
        Ok(self.forward_cached(x).output)
    }

    pub fn forward_cached(&self, x: &[f64]) -> DenseCache {
        let mut z = self.bias.data.clone();
        self.weight.matvec_add(x, &mut z);
        let output = match self.activation {
            Activation::Identity => z,
            Activation::Relu => z.into_iter().map(|v| v.max(0.0)).collect(),
            Activation::Tanh => z.into_iter().map(f64::tanh).collect(),
            Activation::Softmax => softmax(&z),
        };
        DenseCache {
            input: x.to_vec(),
            output,
        }
    }

    /// Accumulates parameter gradients into `grads = [dW, db]` and returns
    /// the gradient with respect to the input.
    pub fn backward(&self, cache: &DenseCache, dy: &[f64], grads: &mut [Tensor2]) -> Vec<f64> {
        let dz: Vec<f64> = match self.activation {
            Activation::Identity => dy.to_vec(),
            Activation::Relu => dy
                .iter()
                .zip(&cache.output)
                .map(|(g, y)| if *y > 0.0 { *g } else { 0.0 })
                .collect(),
            Activation::Tanh => dy
                .iter()
                .zip(&cache.output)
                .map(|(g, y)| g * (1.0 - y * y))
                .collect(),
            Activation::Softmax => {
                let s: f64 = dy.iter().zip(&cache.output).map(|(g, y)| g * y).sum();
                dy.iter()
                    .zip(&cache.output)
                    .map(|(g, y)| y * (g - s))
                    .collect()
            }
        };
        grads[0].outer_add(&dz, &cache.input);
        for (b, g) in grads[1].data.iter_mut().zip(&dz) {
            *b += g;
        }
        let mut dx = vec![0.0; self.inputs()];
        self.weight.matvec_t_add(&dz, &mut dx);
        dx
    }

    pub fn params(&self) -> [&Tensor2; 2] {
        [&self.weight, &self.bias]
    }

    pub fn params_mut(&mut self) -> [&mut Tensor2; 2] {
        [&mut self.weight, &mut self.bias]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_layer_is_zero() {
        let d = Dense::zeros(3, 2, Activation::Identity);
        assert_eq!(d.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
        assert!(d.forward(&[1.0]).is_err());
    }

    #[test]
    fn softmax_of_equal_logits_is_uniform() {
        let d = Dense::zeros(5, 14, Activation::Softmax);
        let y = d.forward(&[0.3; 5]).unwrap();
        for v in y {
            assert!((v - 1.0 / 14.0).abs() < 1e-15);
        }
    }
}
