use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tensor::Tensor2;
use crate::error::{Error, Result};

/// LSTM cell parameters with gates stacked in the order input, forget,
/// candidate, output: `W` is 4H × D, `U` is 4H × H and `b` is 4H × 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmCellParams {
    pub w: Tensor2,
    pub u: Tensor2,
    pub b: Tensor2,
}

/// Values kept from one forward step for the backward pass.
#[derive(Debug, Clone)]
pub struct LstmStepCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub gates: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct LstmCache {
    pub steps: Vec<LstmStepCache>,
}

/// A single LSTM layer unrolled over a sequence, starting from zero state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmLayer {
    pub cell: LstmCellParams,
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl LstmLayer {
    pub fn new<R: Rng>(inputs: usize, hidden: usize, rng: &mut R) -> Self {
        let w = Tensor2::uniform(4 * hidden, inputs, hidden, rng);
        let u = Tensor2::uniform(4 * hidden, hidden, hidden, rng);
        let mut b = Tensor2::uniform(4 * hidden, 1, hidden, rng);
        for v in &mut b.data[hidden..2 * hidden] {
            *v = 1.0;
        }
        LstmLayer {
            cell: LstmCellParams { w, u, b },
        }
    }

    pub fn inputs(&self) -> usize {
        self.cell.w.cols
    }

    pub fn hidden(&self) -> usize {
        self.cell.u.cols
    }

    /// One cell step `(h_t, c_t)` from `(x_t, h_prev, c_prev)`.
    pub fn cell_step(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if x.len() != self.inputs() {
            return Err(Error::shape(self.inputs(), x.len()));
        }
        for s in [h_prev, c_prev] {
            if s.len() != self.hidden() {
                return Err(Error::shape(self.hidden(), s.len()));
            }
        }
        let (h, c, _, _) = self.step(x, h_prev, c_prev);
        Ok((h, c))
    }

    fn step(&self, x: &[f64], h: &[f64], c: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let hd = self.hidden();
        let mut gates = self.cell.b.data.clone();
        self.cell.w.matvec_add(x, &mut gates);
        self.cell.u.matvec_add(h, &mut gates);
        for v in &mut gates[..2 * hd] {
            *v = sigmoid(*v);
        }
        for v in &mut gates[2 * hd..3 * hd] {
            *v = v.tanh();
        }
        for v in &mut gates[3 * hd..] {
            *v = sigmoid(*v);
        }
        let mut c_new = vec![0.0; hd];
        let mut tanh_c = vec![0.0; hd];
        let mut h_new = vec![0.0; hd];
        for k in 0..hd {
            c_new[k] = gates[hd + k] * c[k] + gates[k] * gates[2 * hd + k];
            tanh_c[k] = c_new[k].tanh();
            h_new[k] = gates[3 * hd + k] * tanh_c[k];
        }
        (h_new, c_new, gates, tanh_c)
    }

    /// Hidden states for every step, without keeping a cache.
    pub fn forward(&self, xs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let hd = self.hidden();
        let mut h = vec![0.0; hd];
        let mut c = vec![0.0; hd];
        let mut out = Vec::with_capacity(xs.len());
        for x in xs {
            let (hn, cn, _, _) = self.step(x, &h, &c);
            h = hn;
            c = cn;
            out.push(h.clone());
        }
        out
    }

    pub fn forward_cached(&self, xs: &[Vec<f64>]) -> (Vec<Vec<f64>>, LstmCache) {
        let hd = self.hidden();
        let mut h = vec![0.0; hd];
        let mut c = vec![0.0; hd];
        let mut out = Vec::with_capacity(xs.len());
        let mut steps = Vec::with_capacity(xs.len());
        for x in xs {
            let (hn, cn, gates, tanh_c) = self.step(x, &h, &c);
            steps.push(LstmStepCache {
                x: x.clone(),
                h_prev: std::mem::replace(&mut h, hn),
                c_prev: std::mem::replace(&mut c, cn),
                gates,
                tanh_c,
            });
            out.push(h.clone());
        }
        (out, LstmCache { steps })
    }

    /// Backpropagation through time. `dhs[t]` is the loss gradient arriving
    /// at the hidden output of step `t`; gradients for `[W, U, b]` are
    /// accumulated into `grads` and input gradients are returned per step.
    pub fn backward(&self, cache: &LstmCache, dhs: &[Vec<f64>], grads: &mut [Tensor2]) -> Vec<Vec<f64>> {
        let hd = self.hidden();
        let d_in = self.inputs();
        let n = cache.steps.len();
        let mut dxs = vec![vec![0.0; d_in]; n];
        let mut dh_next = vec![0.0; hd];
        let mut dc_next = vec![0.0; hd];
        let mut dgates = vec![0.0; 4 * hd];
        for t in (0..n).rev() {
            let s = &cache.steps[t];
            let g = &s.gates;
            for k in 0..hd {
                let dh = dhs[t][k] + dh_next[k];
                let (i, f, cand, o) = (g[k], g[hd + k], g[2 * hd + k], g[3 * hd + k]);
                let tc = s.tanh_c[k];
                let dc = dc_next[k] + dh * o * (1.0 - tc * tc);
                dgates[k] = dc * cand * i * (1.0 - i);
                dgates[hd + k] = dc * s.c_prev[k] * f * (1.0 - f);
                dgates[2 * hd + k] = dc * i * (1.0 - cand * cand);
                dgates[3 * hd + k] = dh * tc * o * (1.0 - o);
                dc_next[k] = dc * f;
            }
            grads[0].outer_add(&dgates, &s.x);
            grads[1].outer_add(&dgates, &s.h_prev);
            for (b, d) in grads[2].data.iter_mut().zip(&dgates) {
                *b += d;
            }
            self.cell.w.matvec_t_add(&dgates, &mut dxs[t]);
            dh_next.iter_mut().for_each(|v| *v = 0.0);
            self.cell.u.matvec_t_add(&dgates, &mut dh_next);
        }
        dxs
    }

    pub fn params(&self) -> [&Tensor2; 3] {
        [&self.cell.w, &self.cell.u, &self.cell.b]
    }

    pub fn params_mut(&mut self) -> [&mut Tensor2; 3] {
        [&mut self.cell.w, &mut self.cell.u, &mut self.cell.b]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn forget_bias_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let l = LstmLayer::new(2, 3, &mut rng);
        assert_eq!(&l.cell.b.data[3..6], &[1.0, 1.0, 1.0]);
        assert_eq!(l.cell.w.rows, 12);
    }

    #[test]
    fn zero_cell_and_saturated_gates() {
        let mut l = LstmLayer::new(2, 3, &mut ChaCha8Rng::seed_from_u64(4));
        for p in l.params_mut() {
            p.data.iter_mut().for_each(|v| *v = 0.0);
        }
        let (h, c) = l.cell_step(&[0.0, 0.0], &[0.0; 3], &[0.0; 3]).unwrap();
        assert_eq!(h, vec![0.0; 3]);
        assert_eq!(c, vec![0.0; 3]);
        // input gate → 0, forget gate → 1
        for k in 0..3 {
            l.cell.b.data[k] = -800.0;
            l.cell.b.data[3 + k] = 800.0;
        }
        let prev = [0.3, -0.7, 2.0];
        let (_, c) = l.cell_step(&[1.0, -1.0], &[0.5, 0.1, -0.2], &prev).unwrap();
        assert_eq!(c, prev.to_vec());
        assert!(l.cell_step(&[1.0], &[0.0; 3], &[0.0; 3]).is_err());
    }

    #[test]
    fn cached_and_plain_forward_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let l = LstmLayer::new(1, 4, &mut rng);
        let xs: Vec<Vec<f64>> = (0..6).map(|t| vec![(t as f64).sin()]).collect();
        let (a, cache) = l.forward_cached(&xs);
        assert_eq!(a, l.forward(&xs));
        assert_eq!(cache.steps.len(), 6);
        assert!(a.iter().flatten().all(|v| v.abs() < 1.0));
    }
}
