//! Closed-form optimal discriminators and the grid-integrated game value.

use crate::error::{Error, Result};

use super::grid::{check_same_grid, GridDensity};

/// Per-cell discriminator outputs on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscriminatorGrids {
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

/// `D1* = p / (p + p_x + p_y)` and `D2* = p_x / (p_x + p_y)`, with `0/0`
/// cells set to the equal-density limits `1/3` and `1/2`.
pub fn optimal_discriminators(p: &GridDensity, p_x: &GridDensity, p_y: &GridDensity) -> Result<DiscriminatorGrids> {
    check_same_grid(&[p, p_x, p_y])?;
    let (mut d1, mut d2) = (Vec::with_capacity(p.mass().len()), Vec::with_capacity(p.mass().len()));
    for ((&a, &b), &c) in p.mass().iter().zip(p_x.mass()).zip(p_y.mass()) {
        let s = a + b + c;
        d1.push(if s > 0.0 { a / s } else { 1.0 / 3.0 });
        let t = b + c;
        d2.push(if t > 0.0 { b / t } else { 0.5 });
    }
    Ok(DiscriminatorGrids { d1, d2 })
}

fn weighted_log(weight: f64, v: f64) -> f64 {
    // 0 * log(anything) contributes nothing
    if weight == 0.0 {
        0.0
    } else {
        weight * v.ln()
    }
}

/// Game value integrated over the grid:
/// `sum p ln D1 + p_x ln((1 - D1) D2) + p_y ln((1 - D1)(1 - D2))`.
pub fn grid_value(p: &GridDensity, p_x: &GridDensity, p_y: &GridDensity, disc: &DiscriminatorGrids) -> Result<f64> {
    check_same_grid(&[p, p_x, p_y])?;
    let n = p.mass().len();
    if disc.d1.len() != n || disc.d2.len() != n {
        return Err(Error::Shape {
            op: "grid_value",
            left: vec![disc.d1.len(), disc.d2.len()],
            right: vec![n],
        });
    }
    let mut v = 0.0;
    for c in 0..n {
        let (d1, d2) = (disc.d1[c], disc.d2[c]);
        v += weighted_log(p.mass()[c], d1);
        v += weighted_log(p_x.mass()[c], (1.0 - d1) * d2);
        v += weighted_log(p_y.mass()[c], (1.0 - d1) * (1.0 - d2));
    }
    Ok(v)
}

/// Optimal single discriminator of the two-term baseline:
/// `p / (p + (1 - alpha) p_x + alpha p_y)`, `1/2` where all three vanish.
pub fn triple_gan_s_optimal_discriminator(
    p: &GridDensity,
    p_x: &GridDensity,
    p_y: &GridDensity,
    alpha: f64,
) -> Result<Vec<f64>> {
    check_same_grid(&[p, p_x, p_y])?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::contract("alpha", format!("{alpha} is outside (0, 1)")));
    }
    Ok(p.mass()
        .iter()
        .zip(p_x.mass())
        .zip(p_y.mass())
        .map(|((&a, &b), &c)| {
            let fake = (1.0 - alpha) * b + alpha * c;
            if a + fake > 0.0 {
                a / (a + fake)
            } else {
                0.5
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{Grid, Range};

    fn g() -> Grid {
        Grid::new(Range::new(0.0, 1.0).unwrap(), Range::new(0.0, 1.0).unwrap(), 2).unwrap()
    }

    #[test]
    fn equal_densities_give_third_and_half() {
        let d = GridDensity::new(g(), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let opt = optimal_discriminators(&d, &d, &d).unwrap();
        assert!(opt.d1.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));
        assert!(opt.d2.iter().all(|v| *v == 0.5));
        let v = grid_value(&d, &d, &d, &opt).unwrap();
        assert!((v + 3.0 * 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_px_cell_gives_zero_d2() {
        let p = GridDensity::new(g(), vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let px = GridDensity::new(g(), vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let py = GridDensity::new(g(), vec![1.0, 1.0, 1.0, 0.0]).unwrap();
        let opt = optimal_discriminators(&p, &px, &py).unwrap();
        assert_eq!(opt.d2[0], 0.0);
        assert_eq!(opt.d2[3], 0.5);
        assert_eq!(opt.d1[3], 1.0);
    }

    #[test]
    fn baseline_optimum_is_half_on_mixture_match() {
        let px = GridDensity::new(g(), vec![0.4, 0.1, 0.3, 0.2]).unwrap();
        let py = GridDensity::new(g(), vec![0.1, 0.5, 0.1, 0.3]).unwrap();
        let p = GridDensity::mixture(&[&px, &py], &[0.7, 0.3]).unwrap();
        let d = triple_gan_s_optimal_discriminator(&p, &px, &py, 0.3).unwrap();
        assert!(d.iter().all(|v| (v - 0.5).abs() < 1e-12));
        assert!(triple_gan_s_optimal_discriminator(&p, &px, &py, 1.0).is_err());
    }
}
