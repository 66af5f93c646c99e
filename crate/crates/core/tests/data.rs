use std::f64::consts::PI;

use proptest::prelude::*;
use trigan_core::data::{mixture_pdf, sample_mixture, GaussianMixtureSpec, PairDataset};
use trigan_core::eval::{histogram2d, Grid, GridDensity};

#[test]
fn sampler_agrees_with_density_in_total_variation() {
    let spec = GaussianMixtureSpec::default();
    let data = sample_mixture(&spec, 250_000, 11).unwrap();
    assert_eq!(data.len(), 1_000_000);
    let grid = Grid::toy();
    let hist = histogram2d(&data.points(), grid).unwrap();
    let truth = GridDensity::from_density(grid, 8, |p| spec.pdf(p)).unwrap();
    let tv: f64 = 0.5
        * hist
            .mass()
            .iter()
            .zip(truth.mass())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();
    assert!(tv < 0.02, "total variation {tv}");
}

#[test]
fn density_integrates_to_one() {
    let spec = GaussianMixtureSpec::default();
    let n = 512;
    let h = 16.0 / n as f64;
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = [-8.0 + (i as f64 + 0.5) * h, -8.0 + (j as f64 + 0.5) * h];
            total += mixture_pdf(&spec, p) * h * h;
        }
    }
    assert!((total - 1.0).abs() < 1e-2, "{total}");
}

#[test]
fn density_at_top_bar_centre_matches_term_by_term_sum() {
    // Axis-aligned components: each term is a product of two 1D normals.
    let normal = |v: f64, mean: f64, var: f64| (-(v - mean).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt();
    let (x, y) = (0.0, 1.5);
    let terms = [
        normal(x, 0.0, 3.0) * normal(y, 1.5, 0.025),
        normal(x, -1.5, 0.025) * normal(y, 0.0, 3.0),
        normal(x, 1.5, 0.025) * normal(y, 0.0, 3.0),
        normal(x, 0.0, 3.0) * normal(y, -1.5, 0.025),
    ];
    let expected: f64 = terms.iter().map(|t| 0.25 * t).sum();
    let got = mixture_pdf(&GaussianMixtureSpec::default(), [x, y]);
    assert!(
        (got - expected).abs() < 1e-14 * expected.max(1.0),
        "{got} vs {expected}"
    );
}

fn covariance(points: &[[f64; 2]]) -> ([f64; 2], [[f64; 2]; 2]) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let my = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let mut c = [[0.0; 2]; 2];
    for p in points {
        let d = [p[0] - mx, p[1] - my];
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] += d[i] * d[j] / (n - 1.0);
            }
        }
    }
    ([mx, my], c)
}

#[test]
fn first_component_covariance_is_recovered() {
    let data = sample_mixture(&GaussianMixtureSpec::default(), 5000, 3).unwrap();
    let first: Vec<[f64; 2]> = data
        .rows()
        .iter()
        .filter(|r| r.component == 0)
        .map(|r| [r.x, r.y])
        .collect();
    let (_, c) = covariance(&first);
    assert!((c[0][0] - 3.0).abs() < 0.3, "{c:?}");
    assert!((c[1][1] - 0.025).abs() < 0.0025, "{c:?}");
    // The off-diagonal target is 0; 10% of the geometric-mean scale.
    assert!(c[0][1].abs() < 0.1 * (3.0f64 * 0.025).sqrt(), "{c:?}");
}

#[test]
fn grand_mean_is_near_origin() {
    let data = sample_mixture(&GaussianMixtureSpec::default(), 5000, 8).unwrap();
    let (mean, c) = covariance(&data.points());
    for axis in 0..2 {
        let bound = 3.0 * (c[axis][axis] / 20_000.0).sqrt();
        assert!(mean[axis].abs() < bound, "{mean:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stratified_counts_differ_by_at_most_one(per in 1usize..60, fraction in 0.0f64..=1.0, seed in any::<u64>()) {
        let data = sample_mixture(&GaussianMixtureSpec::default(), per, seed).unwrap();
        let split = data.split_semi_supervised(fraction, seed).unwrap();
        let target = (fraction * data.len() as f64).round() as usize;
        prop_assert_eq!(split.paired_count(), target);
        let counts = split.paired_per_component();
        let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
        prop_assert!(hi - lo <= 1);
        if target.is_multiple_of(4) {
            prop_assert_eq!(lo, hi);
        }
        // Only the mask changes.
        prop_assert_eq!(split.points(), data.points());
    }

    #[test]
    fn csv_round_trip(per in 1usize..20, fraction in 0.0f64..=1.0, seed in any::<u64>()) {
        let data = sample_mixture(&GaussianMixtureSpec::default(), per, seed)
            .unwrap()
            .split_semi_supervised(fraction, seed)
            .unwrap();
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        prop_assert_eq!(PairDataset::read_csv(buf.as_slice()).unwrap(), data);
    }
}

#[test]
fn sampling_is_seeded() {
    let spec = GaussianMixtureSpec::default();
    assert_eq!(
        sample_mixture(&spec, 50, 1).unwrap(),
        sample_mixture(&spec, 50, 1).unwrap()
    );
    assert_ne!(
        sample_mixture(&spec, 50, 1).unwrap(),
        sample_mixture(&spec, 50, 2).unwrap()
    );
}
