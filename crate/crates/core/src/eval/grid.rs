use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[lo, hi]` covered by a grid axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::contract("range", format!("[{lo}, {hi}] is empty or not finite")));
        }
        Ok(Range { lo, hi })
    }

    fn cell(&self, v: f64, resolution: usize) -> usize {
        let t = (v - self.lo) / (self.hi - self.lo) * resolution as f64;
        if t <= 0.0 {
            0
        } else {
            (t.floor() as usize).min(resolution - 1)
        }
    }

    fn width(&self, resolution: usize) -> f64 {
        (self.hi - self.lo) / resolution as f64
    }
}

/// Grid geometry shared by every density that is compared cell-by-cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x: Range,
    pub y: Range,
    pub resolution: usize,
}

impl Grid {
    pub fn new(x: Range, y: Range, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::contract("resolution", format!("{resolution} < 2")));
        }
        Ok(Grid { x, y, resolution })
    }

    /// `[-5, 5]^2` at 64 x 64.
    pub fn toy() -> Self {
        Grid {
            x: Range { lo: -5.0, hi: 5.0 },
            y: Range { lo: -5.0, hi: 5.0 },
            resolution: 64,
        }
    }

    pub fn cells(&self) -> usize {
        self.resolution * self.resolution
    }

    /// Index of the cell containing `p`, clipping out-of-range points to
    /// the edge cells. Cells are half-open `[lo, hi)`; row-major with `y`
    /// as the row.
    pub fn cell_of(&self, p: [f64; 2]) -> usize {
        let ix = self.x.cell(p[0], self.resolution);
        let iy = self.y.cell(p[1], self.resolution);
        iy * self.resolution + ix
    }

    pub fn cell_center(&self, index: usize) -> [f64; 2] {
        let (iy, ix) = (index / self.resolution, index % self.resolution);
        let wx = self.x.width(self.resolution);
        let wy = self.y.width(self.resolution);
        [self.x.lo + (ix as f64 + 0.5) * wx, self.y.lo + (iy as f64 + 0.5) * wy]
    }
}

/// Normalized probability mass on a rectangular grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDensity {
    grid: Grid,
    mass: Vec<f64>,
}

impl GridDensity {
    /// Normalizes `mass` to total 1.
    pub fn new(grid: Grid, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != grid.cells() {
            return Err(Error::Shape {
                op: "grid density",
                left: vec![mass.len()],
                right: vec![grid.resolution, grid.resolution],
            });
        }
        if mass.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::contract("grid mass", "entries must be finite and non-negative"));
        }
        let total: f64 = mass.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::contract("grid mass", "total mass is zero"));
        }
        let mass = mass.into_iter().map(|m| m / total).collect();
        Ok(GridDensity { grid, mass })
    }

    /// Integrates a density over every cell with a `sub x sub` midpoint rule
    /// and normalizes the result.
    pub fn from_density(grid: Grid, sub: usize, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let sub = sub.max(1);
        let r = grid.resolution;
        let wx = grid.x.width(r) / sub as f64;
        let wy = grid.y.width(r) / sub as f64;
        let mut mass = vec![0.0; grid.cells()];
        for iy in 0..r {
            for ix in 0..r {
                let x0 = grid.x.lo + ix as f64 * grid.x.width(r);
                let y0 = grid.y.lo + iy as f64 * grid.y.width(r);
                let mut acc = 0.0;
                for sy in 0..sub {
                    for sx in 0..sub {
                        acc += f([x0 + (sx as f64 + 0.5) * wx, y0 + (sy as f64 + 0.5) * wy]);
                    }
                }
                mass[iy * r + ix] = acc * wx * wy;
            }
        }
        Self::new(grid, mass)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Weighted sum of densities on the same grid.
    pub fn mixture(parts: &[&GridDensity], weights: &[f64]) -> Result<Self> {
        check_same_grid(parts)?;
        if parts.len() != weights.len() || parts.is_empty() {
            return Err(Error::contract("weights", "one weight per density required"));
        }
        let mut mass = vec![0.0; parts[0].mass.len()];
        for (p, w) in parts.iter().zip(weights) {
            for (m, v) in mass.iter_mut().zip(&p.mass) {
                *m += w * v;
            }
        }
        Self::new(parts[0].grid, mass)
    }
}

pub(crate) fn check_same_grid(parts: &[&GridDensity]) -> Result<()> {
    if let Some(first) = parts.first() {
        if let Some(bad) = parts.iter().find(|p| p.grid != first.grid) {
            return Err(Error::Shape {
                op: "grid",
                left: vec![first.grid.resolution, first.grid.resolution],
                right: vec![bad.grid.resolution, bad.grid.resolution],
            });
        }
    }
    Ok(())
}

/// Bins samples into half-open cells (out-of-range points go to the edge
/// cells) and normalizes.
pub fn histogram2d(samples: &[[f64; 2]], grid: Grid) -> Result<GridDensity> {
    if samples.is_empty() {
        return Err(Error::contract("samples", "histogram of an empty sample set"));
    }
    if let Some(i) = samples.iter().position(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return Err(Error::numeric("histogram2d", format!("sample {i} is not finite")));
    }
    let mut counts = vec![0.0; grid.cells()];
    for p in samples {
        counts[grid.cell_of(*p)] += 1.0;
    }
    GridDensity::new(grid, counts)
}
