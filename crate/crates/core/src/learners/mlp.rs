//! Single-hidden-layer perceptron (rectified-linear units) trained with
//! mini-batch Adam.
//!
//! Classification uses a sigmoid output with log loss and predicts hard
//! labels; regression uses a linear output with squared loss. Convergence
//! is a recorded diagnostic, not an error: the flag reports whether the
//! final full-data loss is finite and no worse than the starting loss.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct MlpModel {
    w1: Vec<f64>, // hidden x dim, row-major
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
    dim: usize,
    hidden: usize,
    classification: bool,
    pub converged: bool,
}

impl MlpModel {
    fn raw(&self, x: &[f64]) -> f64 {
        let mut out = self.b2;
        for h in 0..self.hidden {
            let mut z = self.b1[h];
            let row = &self.w1[h * self.dim..(h + 1) * self.dim];
            for (w, xi) in row.iter().zip(x) {
                z += w * xi;
            }
            if z > 0.0 {
                out += self.w2[h] * z;
            }
        }
        out
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let raw = self.raw(x);
        if self.classification {
            (raw > 0.0) as u8 as f64
        } else {
            raw
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Stable per-sample log loss for a raw score z and label y.
fn log_loss(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[allow(clippy::too_many_arguments)]
pub fn fit_mlp(
    rows: &[&[f64]],
    targets: &[f64],
    dim: usize,
    hidden: usize,
    epochs: usize,
    batch: usize,
    learning_rate: f64,
    classification: bool,
    seed: u64,
) -> MlpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let limit1 = (6.0 / dim as f64).sqrt();
    let limit2 = (6.0 / hidden as f64).sqrt();
    let mut model = MlpModel {
        w1: (0..hidden * dim).map(|_| rng.gen_range(-limit1..limit1)).collect(),
        b1: vec![0.0; hidden],
        w2: (0..hidden).map(|_| rng.gen_range(-limit2..limit2)).collect(),
        b2: 0.0,
        dim,
        hidden,
        classification,
        converged: false,
    };
    let n_params = hidden * dim + hidden + hidden + 1;
    let mut m = vec![0.0; n_params];
    let mut v = vec![0.0; n_params];
    let mut grad = vec![0.0; n_params];
    let mut step_count = 0u64;

    let full_loss = |model: &MlpModel| -> f64 {
        rows.iter()
            .zip(targets)
            .map(|(x, &y)| {
                let z = model.raw(x);
                if classification {
                    log_loss(z, y)
                } else {
                    (z - y) * (z - y)
                }
            })
            .sum::<f64>()
            / rows.len() as f64
    };
    let initial_loss = full_loss(&model);

    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut z1 = vec![0.0; hidden];
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch.max(1)) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / chunk.len() as f64;
            for &i in chunk {
                let x = rows[i];
                let y = targets[i];
                let mut out = model.b2;
                for h in 0..hidden {
                    let mut z = model.b1[h];
                    let row = &model.w1[h * dim..(h + 1) * dim];
                    for (w, xi) in row.iter().zip(x) {
                        z += w * xi;
                    }
                    z1[h] = z;
                    if z > 0.0 {
                        out += model.w2[h] * z;
                    }
                }
                let dout = scale
                    * if classification {
                        sigmoid(out) - y
                    } else {
                        2.0 * (out - y)
                    };
                let (gw1, rest) = grad.split_at_mut(hidden * dim);
                let (gb1, rest) = rest.split_at_mut(hidden);
                let (gw2, gb2) = rest.split_at_mut(hidden);
                gb2[0] += dout;
                for h in 0..hidden {
                    if z1[h] <= 0.0 {
                        continue;
                    }
                    gw2[h] += dout * z1[h];
                    let dz = dout * model.w2[h];
                    gb1[h] += dz;
                    for (g, xi) in gw1[h * dim..(h + 1) * dim].iter_mut().zip(x) {
                        *g += dz * xi;
                    }
                }
            }
            step_count += 1;
            let bc1 = 1.0 - BETA1.powi(step_count as i32);
            let bc2 = 1.0 - BETA2.powi(step_count as i32);
            let mut apply = |idx: usize, param: &mut f64| {
                let g = grad[idx];
                m[idx] = BETA1 * m[idx] + (1.0 - BETA1) * g;
                v[idx] = BETA2 * v[idx] + (1.0 - BETA2) * g * g;
                let mh = m[idx] / bc1;
                let vh = v[idx] / bc2;
                *param -= learning_rate * mh / (vh.sqrt() + ADAM_EPS);
            };
            for (i, p) in model.w1.iter_mut().enumerate() {
                apply(i, p);
            }
            let off = hidden * dim;
            for (i, p) in model.b1.iter_mut().enumerate() {
                apply(off + i, p);
            }
            let off = off + hidden;
            for (i, p) in model.w2.iter_mut().enumerate() {
                apply(off + i, p);
            }
            apply(n_params - 1, &mut model.b2);
        }
    }
    let final_loss = full_loss(&model);
    model.converged = final_loss.is_finite() && final_loss <= initial_loss;
    model
}
