use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::autodiff::Tensor;
use crate::data::PairDataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One minibatch: `M` pairs from the paired subset, `M` unpaired draws from
/// each marginal, and the noise for both generator calls.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch<T> {
    pub paired_x: Tensor<T>,
    pub paired_y: Tensor<T>,
    pub unpaired_x: Tensor<T>,
    pub unpaired_y: Tensor<T>,
    /// Noise fed to the `y -> x` generator alongside `unpaired_y`.
    pub noise_x: Tensor<T>,
    /// Noise fed to the `x -> y` generator alongside `unpaired_x`.
    pub noise_y: Tensor<T>,
}

impl<T: Scalar> Batch<T> {
    pub fn new(
        paired_x: Tensor<T>,
        paired_y: Tensor<T>,
        unpaired_x: Tensor<T>,
        unpaired_y: Tensor<T>,
        noise_x: Tensor<T>,
        noise_y: Tensor<T>,
    ) -> Result<Self> {
        let batch = Batch {
            paired_x,
            paired_y,
            unpaired_x,
            unpaired_y,
            noise_x,
            noise_y,
        };
        let m = batch.paired_x.rows();
        for t in batch.blocks() {
            if t.shape().len() != 2 || t.rows() != m {
                return Err(Error::Shape {
                    op: "batch",
                    left: batch.paired_x.shape().to_vec(),
                    right: t.shape().to_vec(),
                });
            }
        }
        if m == 0 {
            return Err(Error::contract("batch", "zero rows"));
        }
        Ok(batch)
    }

    fn blocks(&self) -> [&Tensor<T>; 6] {
        [
            &self.paired_x,
            &self.paired_y,
            &self.unpaired_x,
            &self.unpaired_y,
            &self.noise_x,
            &self.noise_y,
        ]
    }

    pub fn rows(&self) -> usize {
        self.paired_x.rows()
    }

    pub fn noise_width(&self) -> usize {
        self.noise_x.cols()
    }
}

/// Standard-normal `rows x width` matrix.
pub fn gaussian_noise<T: Scalar, R: Rng + ?Sized>(rows: usize, width: usize, rng: &mut R) -> Tensor<T> {
    let values = (0..rows * width)
        .map(|_| {
            let v: f64 = StandardNormal.sample(rng);
            T::lit(v)
        })
        .collect();
    Tensor::matrix(rows, width, values).expect("shape matches")
}

fn column<T: Scalar>(values: Vec<f64>) -> Tensor<T> {
    let n = values.len();
    Tensor::matrix(n, 1, values.into_iter().map(T::lit).collect()).expect("shape matches")
}

/// Draws minibatches for the scalar-pair toy data: pairs uniformly with
/// replacement from the paired subset, marginals uniformly with replacement
/// from every row.
#[derive(Clone, Debug)]
pub struct BatchSampler {
    paired: Vec<[f64; 2]>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    batch_size: usize,
    noise_width: usize,
}

impl BatchSampler {
    pub fn new(dataset: &PairDataset, batch_size: usize, noise_width: usize) -> Result<Self> {
        if batch_size == 0 {
            return Err(Error::contract("batch-size", "must be at least 1"));
        }
        let paired = dataset.paired_points();
        if paired.is_empty() {
            return Err(Error::contract(
                "paired-fraction",
                "dataset has no paired rows, so the real-pair term of the game is undefined",
            ));
        }
        Ok(BatchSampler {
            paired,
            xs: dataset.xs(),
            ys: dataset.ys(),
            batch_size,
            noise_width,
        })
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn sample<T: Scalar, R: Rng + ?Sized>(&self, rng: &mut R) -> Batch<T> {
        let m = self.batch_size;
        let mut px = Vec::with_capacity(m);
        let mut py = Vec::with_capacity(m);
        for _ in 0..m {
            let p = self.paired[rng.random_range(0..self.paired.len())];
            px.push(p[0]);
            py.push(p[1]);
        }
        let ux = (0..m).map(|_| self.xs[rng.random_range(0..self.xs.len())]).collect();
        let uy = (0..m).map(|_| self.ys[rng.random_range(0..self.ys.len())]).collect();
        let noise_x = gaussian_noise(m, self.noise_width, rng);
        let noise_y = gaussian_noise(m, self.noise_width, rng);
        Batch {
            paired_x: column(px),
            paired_y: column(py),
            unpaired_x: column(ux),
            unpaired_y: column(uy),
            noise_x,
            noise_y,
        }
    }
}
