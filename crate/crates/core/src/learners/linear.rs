//! L2-regularized logistic regression trained by full-batch gradient
//! descent with backtracking line search.

pub struct LogitModel {
    pub w: Vec<f64>,
    pub b: f64,
    pub converged: bool,
}

impl LogitModel {
    /// Hard label: 1 iff w·x + b > 0.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let score: f64 = self.w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + self.b;
        (score > 0.0) as u8 as f64
    }
}

const GRAD_TOL: f64 = 1e-6;
const MAX_ITERS: usize = 10_000;
const ARMIJO_C: f64 = 1e-4;

/// Stable log(1 + exp(z)).
fn log1p_exp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
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

pub fn fit_logit(rows: &[&[f64]], labels: &[f64], dim: usize, l2: f64) -> LogitModel {
    let n = rows.len() as f64;
    let loss = |w: &[f64], b: f64| -> f64 {
        let data: f64 = rows
            .iter()
            .zip(labels)
            .map(|(x, &y)| {
                let m: f64 = w.iter().zip(*x).map(|(wi, xi)| wi * xi).sum::<f64>() + b;
                log1p_exp(m) - y * m
            })
            .sum::<f64>()
            / n;
        data + 0.5 * l2 * w.iter().map(|wi| wi * wi).sum::<f64>()
    };
    let gradient = |w: &[f64], b: f64| -> (Vec<f64>, f64) {
        let mut gw = vec![0.0; dim];
        let mut gb = 0.0;
        for (x, &y) in rows.iter().zip(labels) {
            let m: f64 = w.iter().zip(*x).map(|(wi, xi)| wi * xi).sum::<f64>() + b;
            let r = sigmoid(m) - y;
            for (g, xi) in gw.iter_mut().zip(*x) {
                *g += r * xi;
            }
            gb += r;
        }
        for (g, wi) in gw.iter_mut().zip(w) {
            *g = *g / n + l2 * wi;
        }
        (gw, gb / n)
    };

    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut current = loss(&w, b);
    let mut step = 1.0f64;
    let mut converged = false;
    for _ in 0..MAX_ITERS {
        let (gw, gb) = gradient(&w, b);
        let inf_norm = gw
            .iter()
            .chain(std::iter::once(&gb))
            .fold(0.0f64, |m, g| m.max(g.abs()));
        if inf_norm < GRAD_TOL {
            converged = true;
            break;
        }
        let sq_norm = gw.iter().map(|g| g * g).sum::<f64>() + gb * gb;
        // Backtracking from twice the last accepted step.
        step = (step * 2.0).min(1e3);
        let mut accepted = false;
        while step > 1e-16 {
            let cand_w: Vec<f64> = w.iter().zip(&gw).map(|(wi, g)| wi - step * g).collect();
            let cand_b = b - step * gb;
            let cand_loss = loss(&cand_w, cand_b);
            if cand_loss <= current - ARMIJO_C * step * sq_norm {
                w = cand_w;
                b = cand_b;
                current = cand_loss;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    LogitModel { w, b, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn learns_a_one_dimensional_threshold() {
        let rows_data: Vec<[f64; 1]> = (-10..=10).map(|i| [i as f64 / 2.0]).collect();
        let rows: Vec<&[f64]> = rows_data.iter().map(|r| r.as_slice()).collect();
        let labels: Vec<f64> = rows_data.iter().map(|r| (r[0] > 0.0) as u8 as f64).collect();
        let model = fit_logit(&rows, &labels, 1, 1e-4);
        for (x, &y) in rows.iter().zip(&labels) {
            assert_eq!(model.predict(x), y);
        }
        assert!(model.w[0] > 0.0);
    }

    #[test]
    fn zero_gradient_start_converges_immediately_on_label_free_data() {
        // Both labels occur at both feature values, so the zero vector
        // already has zero gradient and the solver must report convergence
        // without moving.
        let rows_data = [[1.0], [1.0], [-1.0], [-1.0]];
        let rows: Vec<&[f64]> = rows_data.iter().map(|r| r.as_slice()).collect();
        let labels = [1.0, 0.0, 1.0, 0.0];
        let model = fit_logit(&rows, &labels, 1, 1e-4);
        assert!(model.converged);
        assert_eq!(model.w[0], 0.0);
        assert_eq!(model.b, 0.0);
    }
}
