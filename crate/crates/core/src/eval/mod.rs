//! Divergences on grids, closed-form optimal discriminators, kernel
//! two-sample statistics and ranking metrics.

mod divergence;
mod grid;
mod mmd;
mod oracle;
mod ranking;
mod report;

pub use divergence::{entropy, jsd, jsd_multi};
pub use grid::{histogram2d, Grid, GridDensity, Range};
pub use mmd::{median_heuristic, mmd2, Bandwidth, MEDIAN_SUBSAMPLE};
pub use oracle::{grid_value, optimal_discriminators, triple_gan_s_optimal_discriminator, DiscriminatorGrids};
pub use ranking::{dcg_at_k, ndcg_at_k, precision_at_k, RankingInstance};
pub use report::EvalReport;
