pub mod autodiff;
pub mod data;
pub mod error;
pub mod eval;
pub mod nn;
mod rng;
pub mod scalar;
pub mod trigan;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Tensor64 = autodiff::Tensor<f64>;
pub type Tensor32 = autodiff::Tensor<f32>;
pub type Mlp64 = nn::Mlp<f64>;
pub type Mlp32 = nn::Mlp<f32>;
pub type TriGanModel64 = trigan::TriGanModel<f64>;
pub type TriGanModel32 = trigan::TriGanModel<f32>;
pub type TripleGanSModel64 = trigan::TripleGanSModel<f64>;
pub type TripleGanSModel32 = trigan::TripleGanSModel<f32>;
pub type GameModel64 = trigan::GameModel<f64>;
pub type GameModel32 = trigan::GameModel<f32>;
