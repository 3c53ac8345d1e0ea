//! Minimal dense/LSTM machinery with hand-written backward passes, AdamW,
//! inverted dropout, early stopping and a finite-difference gradient check.
//!
//! Everything runs in f64 on one thread per model instance; parameters of
//! a model are exposed as an ordered list of [`Tensor2`] so the optimiser,
//! the gradient checker and checkpoints can treat every model alike.

mod checkpoint;
mod dense;
mod gradcheck;
mod lstm;
mod optim;
mod tensor;
mod training;

pub use checkpoint::{Checkpoint, NamedTensor, CHECKPOINT_SCHEMA_VERSION};
pub use dense::{Activation, Dense, DenseCache};
pub use gradcheck::{grad_check, grad_check_vec, GradCheckReport, FD_STEP};
pub use lstm::{LstmCache, LstmCellParams, LstmLayer, LstmStepCache};
pub use optim::{clip_global_norm, AdamW, AdamWState};
pub use tensor::Tensor2;
pub use training::{dropout_mask, early_stop, softmax, EarlyStopping, StopDecision};

/// A model whose trainable state is an ordered list of tensors.
pub trait Parameterized {
    fn params(&self) -> Vec<&Tensor2>;
    fn params_mut(&mut self) -> Vec<&mut Tensor2>;
    fn param_names(&self) -> Vec<String>;

    /// Zero tensors shaped like the parameters, for gradient accumulation.
    fn zero_grads(&self) -> Vec<Tensor2> {
        self.params().iter().map(|p| Tensor2::zeros(p.rows, p.cols)).collect()
    }

    fn n_params(&self) -> usize {
        self.params().iter().map(|p| p.data.len()).sum()
    }
}
