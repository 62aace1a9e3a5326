//! Minimal reverse-mode automatic differentiation: a vector-level tape,
//! dense SeLU blocks and Adam.

pub mod adam;
pub mod dense;
pub mod gradcheck;
pub mod tape;
pub mod tensor;

pub use adam::AdamState;
pub use dense::{Activation, BoundBlock, DenseBlock, INIT_STD};
pub use gradcheck::{finite_diff_check, rel_err, GradReport};
pub use tape::{selu, Gradients, Tape, Var, SELU_ALPHA, SELU_LAMBDA};
pub use tensor::Tensor;
