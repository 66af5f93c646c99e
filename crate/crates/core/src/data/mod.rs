//! Ground-truth toy joint distribution, semi-supervised splitting and
//! dataset persistence.

mod dataset;
mod mixture;

pub use dataset::{split_semi_supervised, PairDataset, PairRow, CSV_HEADER};
pub use mixture::{mixture_pdf, sample_mixture, GaussianMixtureSpec, MixtureComponent};
