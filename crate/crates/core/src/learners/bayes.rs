//! Gaussian naive Bayes for binary classification.
//!
//! Per-class feature variances are floored at 1e-9 times the feature's
//! variance over the whole training set, which keeps the likelihood finite
//! when a class is constant in some feature. A feature that is constant
//! across the entire training set gets unit variance in both classes, so
//! it adds the same log-likelihood to each class and drops out of the
//! decision.

pub struct GnbModel {
    log_prior: [f64; 2],
    mean: [Vec<f64>; 2],
    var: [Vec<f64>; 2],
}

const VAR_FLOOR_RATIO: f64 = 1e-9;

impl GnbModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let score = |c: usize| -> f64 {
            let mut s = self.log_prior[c];
            for (j, &xj) in x.iter().enumerate() {
                let v = self.var[c][j];
                let d = xj - self.mean[c][j];
                s += -0.5 * (2.0 * std::f64::consts::PI * v).ln() - d * d / (2.0 * v);
            }
            s
        };
        // Strict comparison: ties resolve to class 0.
        (score(1) > score(0)) as u8 as f64
    }
}

pub fn fit_gnb(rows: &[&[f64]], labels: &[f64], dim: usize) -> GnbModel {
    let n = rows.len() as f64;
    let mut count = [0.0f64; 2];
    let mut sum = [vec![0.0; dim], vec![0.0; dim]];
    let mut sumsq = [vec![0.0; dim], vec![0.0; dim]];
    let mut total_sum = vec![0.0; dim];
    let mut total_sumsq = vec![0.0; dim];
    for (x, &y) in rows.iter().zip(labels) {
        let c = (y == 1.0) as usize;
        count[c] += 1.0;
        for (j, &xj) in x.iter().enumerate() {
            sum[c][j] += xj;
            sumsq[c][j] += xj * xj;
            total_sum[j] += xj;
            total_sumsq[j] += xj * xj;
        }
    }
    let mut mean = [vec![0.0; dim], vec![0.0; dim]];
    let mut var = [vec![0.0; dim], vec![0.0; dim]];
    for j in 0..dim {
        let total_var = (total_sumsq[j] - total_sum[j] * total_sum[j] / n).max(0.0) / n;
        for c in 0..2 {
            mean[c][j] = sum[c][j] / count[c];
            let raw = (sumsq[c][j] - sum[c][j] * sum[c][j] / count[c]).max(0.0) / count[c];
            var[c][j] = if total_var == 0.0 {
                1.0
            } else {
                raw.max(VAR_FLOOR_RATIO * total_var)
            };
        }
    }
    GnbModel {
        log_prior: [(count[0] / n).ln(), (count[1] / n).ln()],
        mean,
        var,
    }
}
