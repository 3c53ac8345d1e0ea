use serde::{Deserialize, Serialize};

use super::tensor::Tensor2;

/// First and second moment estimates for one parameter tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamWState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

/// Adam with decoupled weight decay.
///
/// Each step applies `θ ← θ·(1 − lr·λ) − lr·m̂/(√v̂ + ε)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamW {
    pub lr: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    pub state: Vec<AdamWState>,
}

impl AdamW {
    pub fn new(lr: f64, weight_decay: f64) -> Self {
        AdamW {
            lr,
            weight_decay,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            state: Vec::new(),
        }
    }

    pub fn update(&mut self, params: &mut [&mut Tensor2], grads: &[Tensor2]) {
        if self.state.len() != params.len() {
            self.state = params
                .iter()
                .map(|p| AdamWState {
                    m: vec![0.0; p.data.len()],
                    v: vec![0.0; p.data.len()],
                })
                .collect();
        }
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        let decay = 1.0 - self.lr * self.weight_decay;
        for ((p, g), st) in params.iter_mut().zip(grads).zip(&mut self.state) {
            for k in 0..p.data.len() {
                let gk = g.data[k];
                st.m[k] = self.beta1 * st.m[k] + (1.0 - self.beta1) * gk;
                st.v[k] = self.beta2 * st.v[k] + (1.0 - self.beta2) * gk * gk;
                let mhat = st.m[k] / bc1;
                let vhat = st.v[k] / bc2;
                p.data[k] = p.data[k] * decay - self.lr * mhat / (vhat.sqrt() + self.eps);
            }
        }
    }
}

/// Rescales gradients so their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_global_norm(grads: &mut [Tensor2], max_norm: f64) -> f64 {
    let norm = grads.iter().map(Tensor2::sum_sq).sum::<f64>().sqrt();
    if norm > max_norm && norm.is_finite() {
        let s = max_norm / norm;
        grads.iter_mut().for_each(|g| g.scale(s));
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_only_decays() {
        let mut p = Tensor2::from_vec(1, 2, vec![1.0, -2.0]);
        let g = Tensor2::zeros(1, 2);
        let mut opt = AdamW::new(0.01, 0.1);
        opt.update(&mut [&mut p], std::slice::from_ref(&g));
        assert!((p.data[0] - (1.0 - 0.01 * 0.1)).abs() < 1e-15);
        assert!((p.data[1] + 2.0 * (1.0 - 0.01 * 0.1)).abs() < 1e-15);

        let mut q = Tensor2::from_vec(1, 1, vec![3.0]);
        let mut opt = AdamW::new(0.01, 0.0);
        opt.update(&mut [&mut q], &[Tensor2::zeros(1, 1)]);
        assert_eq!(q.data[0], 3.0);
    }

    #[test]
    fn quadratic_descends_monotonically() {
        let mut w = Tensor2::from_vec(1, 1, vec![1.0]);
        let mut opt = AdamW::new(0.01, 0.0);
        let mut prev = 1.0f64;
        for step in 0..100 {
            let g = Tensor2::from_vec(1, 1, vec![2.0 * w.data[0]]);
            opt.update(&mut [&mut w], &[g]);
            if step >= 1 {
                assert!(w.data[0].abs() < prev);
            }
            prev = w.data[0].abs();
        }
        assert!(prev < 0.5);
    }

    #[test]
    fn clipping_bounds_norm() {
        let mut g = vec![Tensor2::from_vec(1, 2, vec![3.0, 4.0])];
        let before = clip_global_norm(&mut g, 1.0);
        assert_eq!(before, 5.0);
        assert!((g[0].sum_sq().sqrt() - 1.0).abs() < 1e-12);
    }
}
