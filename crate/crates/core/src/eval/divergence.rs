use crate::error::{Error, Result};

use super::grid::{check_same_grid, GridDensity};

/// `-sum m ln m` in nats with `0 ln 0 = 0`.
pub fn entropy(d: &GridDensity) -> f64 {
    d.mass().iter().filter(|m| **m > 0.0).map(|m| -m * m.ln()).sum()
}

fn check_weights(n: usize, weights: &[f64]) -> Result<()> {
    if n == 0 || weights.len() != n {
        return Err(Error::contract(
            "weights",
            format!("{} weights for {n} densities", weights.len()),
        ));
    }
    if weights.iter().any(|w| w.is_nan() || *w <= 0.0) {
        return Err(Error::contract("weights", "must be positive"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::contract("weights", format!("sum to {total}, not 1")));
    }
    Ok(())
}

/// Weighted Jensen-Shannon divergence `H(sum pi_i p_i) - sum pi_i H(p_i)` in
/// nats, accumulated cell by cell as `sum_i pi_i p_i ln(p_i / m)`. Cells where
/// every density agrees contribute exactly zero.
pub fn jsd_multi(densities: &[&GridDensity], weights: &[f64]) -> Result<f64> {
    check_same_grid(densities)?;
    check_weights(densities.len(), weights)?;
    let cells = densities[0].mass().len();
    let mut total = 0.0;
    for c in 0..cells {
        let first = densities[0].mass()[c];
        if densities.iter().all(|d| d.mass()[c] == first) {
            continue;
        }
        let m: f64 = densities.iter().zip(weights).map(|(d, w)| w * d.mass()[c]).sum();
        for (d, w) in densities.iter().zip(weights) {
            let p = d.mass()[c];
            if p > 0.0 {
                total += w * p * (p / m).ln();
            }
        }
    }
    Ok(total.max(0.0))
}

/// Two-distribution, equal-weight JSD.
pub fn jsd(p: &GridDensity, q: &GridDensity) -> Result<f64> {
    jsd_multi(&[p, q], &[0.5, 0.5])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{Grid, Range};

    fn g2() -> Grid {
        Grid::new(Range::new(0.0, 1.0).unwrap(), Range::new(0.0, 1.0).unwrap(), 2).unwrap()
    }

    fn onehot(i: usize) -> GridDensity {
        let mut m = vec![0.0; 4];
        m[i] = 1.0;
        GridDensity::new(g2(), m).unwrap()
    }

    #[test]
    fn identical_densities_give_zero() {
        let d = GridDensity::new(g2(), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let third = 1.0 / 3.0;
        assert_eq!(
            jsd_multi(&[&d, &d, &d], &[third, third, 1.0 - 2.0 * third]).unwrap(),
            0.0
        );
    }

    #[test]
    fn disjoint_supports() {
        let (a, b, c) = (onehot(0), onehot(1), onehot(3));
        let third = 1.0 / 3.0;
        let v = jsd_multi(&[&a, &b, &c], &[third, third, third]).unwrap();
        assert!((v - 3f64.ln()).abs() < 1e-12);
        assert!((jsd(&a, &b).unwrap() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn weights_validated() {
        let a = onehot(0);
        assert!(jsd_multi(&[&a, &a], &[0.5, 0.6]).is_err());
        assert!(jsd_multi(&[&a, &a], &[1.0]).is_err());
        assert!(jsd_multi(&[&a, &a], &[1.5, -0.5]).is_err());
    }

    #[test]
    fn grid_mismatch_rejected() {
        let a = onehot(0);
        let other = Grid::new(Range::new(0.0, 1.0).unwrap(), Range::new(0.0, 1.0).unwrap(), 3).unwrap();
        let b = GridDensity::new(other, vec![1.0; 9]).unwrap();
        assert!(matches!(jsd(&a, &b), Err(Error::Shape { .. })));
    }
}
