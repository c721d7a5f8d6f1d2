//! Random forest: bagged CART trees with per-split feature subsampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tree::{grow, Criterion, Tree, TreeParams};
use crate::seed;

pub struct ForestModel {
    trees: Vec<Tree>,
}

impl ForestModel {
    /// Majority vote over trees; exact ties resolve to class 0.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let ones = self.trees.iter().filter(|t| t.predict(x) == 1.0).count();
        (2 * ones > self.trees.len()) as u8 as f64
    }
}

pub fn fit_rf(
    rows: &[&[f64]],
    labels: &[f64],
    dim: usize,
    n_trees: usize,
    max_depth: usize,
    master_seed: u64,
) -> ForestModel {
    let n = rows.len();
    let k = (dim as f64).sqrt().ceil() as usize;
    let params = TreeParams {
        max_depth,
        feature_subsample: Some(k.max(1)),
        min_samples_split: 2,
    };
    let trees = (0..n_trees)
        .map(|t| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed::derive(master_seed, "rf-tree", t as u64));
            let boot: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let boot_rows: Vec<&[f64]> = boot.iter().map(|&i| rows[i]).collect();
            let boot_labels: Vec<f64> = boot.iter().map(|&i| labels[i]).collect();
            grow(
                &boot_rows,
                &boot_labels,
                dim,
                Criterion::Gini,
                &params,
                Some(&mut rng),
            )
        })
        .collect();
    ForestModel { trees }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn votes_track_an_obvious_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let raw: Vec<[f64; 2]> = (0..200)
            .map(|i| {
                let c = if i % 2 == 0 { -2.0 } else { 2.0 };
                [c + rng.gen_range(-0.5..0.5), rng.gen_range(-1.0..1.0)]
            })
            .collect();
        let labels: Vec<f64> = (0..200).map(|i| (i % 2) as f64).collect();
        let rows: Vec<&[f64]> = raw.iter().map(|r| r.as_slice()).collect();
        let model = fit_rf(&rows, &labels, 2, 25, 10, 11);
        assert_eq!(model.predict(&[-2.0, 0.0]), 0.0);
        assert_eq!(model.predict(&[2.0, 0.0]), 1.0);
    }

    #[test]
    fn same_seed_reproduces_votes_and_different_seed_may_not() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let raw: Vec<[f64; 3]> = (0..120)
            .map(|_| {
                [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ]
            })
            .collect();
        let labels: Vec<f64> = raw
            .iter()
            .map(|r| ((r[0] + r[1] - 0.2 * r[2]) > 0.0) as u8 as f64)
            .collect();
        let rows: Vec<&[f64]> = raw.iter().map(|r| r.as_slice()).collect();
        let a = fit_rf(&rows, &labels, 3, 15, 8, 42);
        let b = fit_rf(&rows, &labels, 3, 15, 8, 42);
        let probes: Vec<[f64; 3]> = (0..100)
            .map(|_| {
                [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ]
            })
            .collect();
        for p in &probes {
            assert_eq!(a.predict(p), b.predict(p));
        }
    }
}
