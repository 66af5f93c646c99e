use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

use super::dataset::{PairDataset, PairRow};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

impl MixtureComponent {
    /// Lower Cholesky factor `[[l00, 0], [l10, l11]]` of the covariance.
    pub fn cholesky(&self) -> Result<[[f64; 2]; 2]> {
        let [[a, b], [b2, c]] = self.cov;
        if (b - b2).abs() > 1e-12 * (a.abs() + c.abs()).max(1.0) {
            return Err(Error::contract(
                "covariance",
                format!("{:?} is not symmetric", self.cov),
            ));
        }
        if a.is_nan() || a <= 0.0 {
            return Err(Error::contract(
                "covariance",
                format!("{:?} is not positive-definite", self.cov),
            ));
        }
        let l00 = a.sqrt();
        let l10 = b / l00;
        let rem = c - l10 * l10;
        if rem.is_nan() || rem <= 0.0 {
            return Err(Error::contract(
                "covariance",
                format!("{:?} is not positive-definite", self.cov),
            ));
        }
        Ok([[l00, 0.0], [l10, rem.sqrt()]])
    }

    /// Bivariate normal density at `p`.
    pub fn density(&self, p: [f64; 2]) -> f64 {
        let [[a, b], [_, c]] = self.cov;
        let det = a * c - b * b;
        let dx = p[0] - self.mean[0];
        let dy = p[1] - self.mean[1];
        let quad = (c * dx * dx - 2.0 * b * dx * dy + a * dy * dy) / det;
        (-0.5 * quad).exp() / (2.0 * std::f64::consts::PI * det.sqrt())
    }
}

/// Ground-truth joint distribution over `(x, y)` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixtureSpec {
    pub components: Vec<MixtureComponent>,
}

impl Default for GaussianMixtureSpec {
    /// Four equal-weight elongated Gaussians arranged as a `#`: two thin
    /// horizontal bars at `y = +-1.5` and two thin vertical bars at
    /// `x = +-1.5`.
    fn default() -> Self {
        let horizontal = [[3.0, 0.0], [0.0, 0.025]];
        let vertical = [[0.025, 0.0], [0.0, 3.0]];
        let c = |mean, cov| MixtureComponent {
            weight: 0.25,
            mean,
            cov,
        };
        GaussianMixtureSpec {
            components: vec![
                c([0.0, 1.5], horizontal),
                c([-1.5, 0.0], vertical),
                c([1.5, 0.0], vertical),
                c([0.0, -1.5], horizontal),
            ],
        }
    }
}

impl GaussianMixtureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::contract("mixture", "needs at least one component"));
        }
        let mut total = 0.0;
        for (i, comp) in self.components.iter().enumerate() {
            if !comp.weight.is_finite() || comp.weight <= 0.0 {
                return Err(Error::contract(
                    "mixture weight",
                    format!("component {i} weight {}", comp.weight),
                ));
            }
            total += comp.weight;
            comp.cholesky()?;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::contract("mixture weight", format!("weights sum to {total}")));
        }
        Ok(())
    }

    pub fn pdf(&self, p: [f64; 2]) -> f64 {
        self.components.iter().map(|c| c.weight * c.density(p)).sum()
    }

    /// Exactly `n_per_component` draws from every component, component-major.
    pub fn sample(&self, n_per_component: usize, seed: u64) -> Result<PairDataset> {
        if n_per_component == 0 {
            return Err(Error::contract("n-per-component", "must be at least 1"));
        }
        self.validate()?;
        let mut rng = stream_rng(seed, Stream::Data);
        let mut rows = Vec::with_capacity(n_per_component * self.components.len());
        for (k, comp) in self.components.iter().enumerate() {
            let l = comp.cholesky()?;
            for _ in 0..n_per_component {
                let u: f64 = StandardNormal.sample(&mut rng);
                let v: f64 = StandardNormal.sample(&mut rng);
                rows.push(PairRow {
                    x: comp.mean[0] + l[0][0] * u,
                    y: comp.mean[1] + l[1][0] * u + l[1][1] * v,
                    component: k,
                    paired: true,
                });
            }
        }
        PairDataset::new(rows)
    }
}

pub fn sample_mixture(spec: &GaussianMixtureSpec, n_per_component: usize, seed: u64) -> Result<PairDataset> {
    spec.sample(n_per_component, seed)
}

pub fn mixture_pdf(spec: &GaussianMixtureSpec, point: [f64; 2]) -> f64 {
    spec.pdf(point)
}
