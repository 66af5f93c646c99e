//! Minimal reverse-mode automatic differentiation over dense tensors.

mod gradcheck;
mod tape;
mod tensor;

pub use gradcheck::{gradient_check, gradient_check_entries, DEFAULT_STEP};
pub use tape::{OpKind, Tape, Var};
pub use tensor::Tensor;

pub(crate) use tape::{log_sigmoid, sigmoid};
