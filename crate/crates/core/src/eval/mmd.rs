use crate::error::{Error, Result};

/// RBF kernel width selection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bandwidth {
    Fixed(f64),
    /// Median pairwise distance over the pooled sample, estimated from at
    /// most [`MEDIAN_SUBSAMPLE`] leading points of each set.
    MedianHeuristic,
}

pub const MEDIAN_SUBSAMPLE: usize = 500;

fn sq_dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Median pairwise distance over the leading points of both sets. Swapping
/// `a` and `b` yields the same multiset of distances.
pub fn median_heuristic(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let pool: Vec<[f64; 2]> = a
        .iter()
        .take(MEDIAN_SUBSAMPLE)
        .chain(b.iter().take(MEDIAN_SUBSAMPLE))
        .copied()
        .collect();
    let mut d = Vec::with_capacity(pool.len() * pool.len().saturating_sub(1) / 2);
    for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            d.push(sq_dist(pool[i], pool[j]).sqrt());
        }
    }
    if d.is_empty() {
        return 0.0;
    }
    d.sort_by(f64::total_cmp);
    let mid = d.len() / 2;
    if d.len() % 2 == 1 {
        d[mid]
    } else {
        0.5 * (d[mid - 1] + d[mid])
    }
}

fn mean_kernel(a: &[[f64; 2]], b: &[[f64; 2]], gamma: f64) -> f64 {
    let mut total = 0.0;
    for &u in a {
        let mut row = 0.0;
        for &v in b {
            row += (-gamma * sq_dist(u, v)).exp();
        }
        total += row;
    }
    total / (a.len() as f64 * b.len() as f64)
}

/// Biased (V-statistic) squared MMD under `k(u, v) = exp(-|u - v|^2 / (2 s^2))`.
pub fn mmd2(a: &[[f64; 2]], b: &[[f64; 2]], bandwidth: Bandwidth) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::contract("samples", "mmd2 needs two non-empty sample sets"));
    }
    let s = match bandwidth {
        Bandwidth::Fixed(s) => s,
        Bandwidth::MedianHeuristic => median_heuristic(a, b),
    };
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::contract("bandwidth", format!("{s} must be positive and finite")));
    }
    let gamma = 1.0 / (2.0 * s * s);
    let kaa = mean_kernel(a, a, gamma);
    let kbb = mean_kernel(b, b, gamma);
    let kab = mean_kernel(a, b, gamma);
    Ok((kaa + kbb - 2.0 * kab).max(0.0))
}
