//! Closed-form model of the shadow-training attack on the 1-D two-group
//! Gaussian family.
//!
//! The model treats overfitting as a closeness effect: a trained model
//! answers a query correctly with probability `pi_tr` when the query lands
//! within `epsilon` of one of its training points and with probability
//! `pi_te` otherwise. Under that abstraction the attack that guesses
//! "target" exactly when the answer is correct wins with probability
//! ½ + ½(pi_tr − pi_te)(f_t(Q) − f_s(Q)), where f_m(Q) is the probability
//! that a fresh query from Q falls within epsilon of model m's training
//! set. This module computes the f values exactly (interval-union measure)
//! or by Monte Carlo, evaluates the closed form, and cross-checks it with a
//! direct simulation.
//!
//! Throughout, the target model trains on the group-0 component D_0 (class
//! means at ±1) and the shadow model trains on the balanced mix D of D_0
//! and the shifted group-1 component D_1 (class means at ±1 + tau). All
//! component standard deviations are 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};
use rayon::prelude::*;
use std::io::{self, Write};

use crate::seed;

/// Standard normal CDF.
///
/// Uses the Zelen & Severo rational approximation (Abramowitz & Stegun
/// 26.2.17): Phi(x) = 1 - phi(x)·(b1 t + ... + b5 t^5) with
/// t = 1/(1 + 0.2316419 x), absolute error below 7.5e-8, reflected for
/// negative arguments.
pub fn normal_cdf(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - normal_cdf(-x);
    }
    const P: f64 = 0.231_641_9;
    const B: [f64; 5] = [
        0.319_381_530,
        -0.356_563_782,
        1.781_477_937,
        -1.821_255_978,
        1.330_274_429,
    ];
    let t = 1.0 / (1.0 + P * x);
    let poly = t * (B[0] + t * (B[1] + t * (B[2] + t * (B[3] + t * B[4]))));
    let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    1.0 - pdf * poly
}

/// Parameters of the overfitting model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryParams {
    pub tau: f64,
    pub epsilon: f64,
    pub n_train: usize,
    pub pi_tr: f64,
    pub pi_te: f64,
}

impl TheoryParams {
    pub fn validate(&self) {
        assert!(self.epsilon > 0.0, "epsilon must be positive");
        assert!(self.n_train > 0, "n_train must be positive");
        assert!((0.0..=1.0).contains(&self.pi_tr), "pi_tr must be a probability");
        assert!((0.0..=1.0).contains(&self.pi_te), "pi_te must be a probability");
        assert!(
            self.pi_tr > self.pi_te,
            "overfitting premise requires pi_tr > pi_te"
        );
    }
}

/// Query distribution for f evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryDist {
    /// The balanced mix of both groups.
    Full,
    /// Group 0 only: class means at -1 and +1.
    Group0,
    /// Group 1 only: class means at -1 + tau and 1 + tau.
    Group1,
}

impl QueryDist {
    /// Unit-variance Gaussian mixture components as (weight, mean) pairs.
    fn components(self, tau: f64) -> Vec<(f64, f64)> {
        match self {
            QueryDist::Group0 => vec![(0.5, -1.0), (0.5, 1.0)],
            QueryDist::Group1 => vec![(0.5, -1.0 + tau), (0.5, 1.0 + tau)],
            QueryDist::Full => vec![
                (0.25, -1.0),
                (0.25, 1.0),
                (0.25, -1.0 + tau),
                (0.25, 1.0 + tau),
            ],
        }
    }

    fn sample(self, tau: f64, rng: &mut ChaCha8Rng) -> f64 {
        let z = match self {
            QueryDist::Group0 => 0.0,
            QueryDist::Group1 => 1.0,
            QueryDist::Full => {
                if rng.gen::<f64>() < 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
        };
        let y: f64 = if rng.gen::<f64>() < 0.5 { 1.0 } else { 0.0 };
        let noise: f64 = StandardNormal.sample(rng);
        (2.0 * y - 1.0) + tau * z + noise
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosenessMethod {
    ExactIntervalUnion,
    MonteCarlo { trials: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosenessResult {
    pub f_value: f64,
    pub method: ClosenessMethod,
    pub mc_std_err: Option<f64>,
}

/// Merge the closeness intervals [p - eps, p + eps] into disjoint spans.
fn merged_intervals(points: &[f64], eps: f64) -> Vec<(f64, f64)> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut spans: Vec<(f64, f64)> = Vec::new();
    for &p in &sorted {
        let (lo, hi) = (p - eps, p + eps);
        match spans.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => spans.push((lo, hi)),
        }
    }
    spans
}

/// Probability that a query drawn from `query` lands within `epsilon` of
/// some training point.
pub fn closeness_probability(
    train_points: &[f64],
    query: QueryDist,
    tau: f64,
    epsilon: f64,
    method: ClosenessMethod,
) -> ClosenessResult {
    assert!(!train_points.is_empty(), "training set must be non-empty");
    assert!(epsilon > 0.0, "epsilon must be positive");
    match method {
        ClosenessMethod::ExactIntervalUnion => {
            // The full query distribution is the even mixture of the two
            // groups, so its measure is computed as exactly that mean —
            // the decomposition then holds to the last bit, not merely up
            // to a refactored summation order.
            if query == QueryDist::Full {
                let g0 =
                    closeness_probability(train_points, QueryDist::Group0, tau, epsilon, method);
                let g1 =
                    closeness_probability(train_points, QueryDist::Group1, tau, epsilon, method);
                return ClosenessResult {
                    f_value: 0.5 * (g0.f_value + g1.f_value),
                    method,
                    mc_std_err: None,
                };
            }
            let spans = merged_intervals(train_points, epsilon);
            let mut f = 0.0;
            for (w, mu) in query.components(tau) {
                for &(lo, hi) in &spans {
                    f += w * (normal_cdf(hi - mu) - normal_cdf(lo - mu));
                }
            }
            ClosenessResult {
                f_value: f.clamp(0.0, 1.0),
                method,
                mc_std_err: None,
            }
        }
        ClosenessMethod::MonteCarlo { trials, seed } => {
            assert!(trials > 0, "Monte Carlo needs at least one trial");
            let mut sorted = train_points.to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut hits = 0u64;
            for _ in 0..trials {
                let x = query.sample(tau, &mut rng);
                if within_epsilon(&sorted, x, epsilon) {
                    hits += 1;
                }
            }
            let p = hits as f64 / trials as f64;
            ClosenessResult {
                f_value: p,
                method,
                mc_std_err: Some((p * (1.0 - p) / trials as f64).sqrt()),
            }
        }
    }
}

/// Whether `x` lies within `eps` of any point in the ascending slice.
fn within_epsilon(sorted: &[f64], x: f64, eps: f64) -> bool {
    let idx = sorted.partition_point(|&p| p < x - eps);
    idx < sorted.len() && sorted[idx] <= x + eps
}

/// Win probability of the correctness-guessing attack given the realized f
/// values: ½ + ½(pi_tr − pi_te)(f_t − f_s).
pub fn attack_accuracy_closed_form(params: &TheoryParams, f_t: f64, f_s: f64) -> f64 {
    assert!((0.0..=1.0).contains(&f_t) && (0.0..=1.0).contains(&f_s));
    0.5 + 0.5 * (params.pi_tr - params.pi_te) * (f_t - f_s)
}

/// One simulated game: realized training sets plus the empirical win rate
/// of the guess-target-iff-correct rule.
#[derive(Debug, Clone)]
pub struct TheorySimulation {
    pub win_rate: f64,
    pub target_set: Vec<f64>,
    pub shadow_set: Vec<f64>,
}

/// Simulate the attack end-to-end: draw the target's training set from
/// D_0 and the shadow's from the balanced mix D, then play `n_trials`
/// rounds. Each round flips a fair coin for the model, queries a point
/// from `query`, marks it correct with probability `pi_tr` when the point
/// is within `epsilon` of that model's training set (`pi_te` otherwise),
/// and guesses "target" exactly on correct answers.
pub fn simulate_theory_attack_detailed(
    params: &TheoryParams,
    query: QueryDist,
    n_trials: u64,
    master_seed: u64,
) -> TheorySimulation {
    params.validate();
    assert!(n_trials >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(master_seed, "theory-sim", 0));
    let mut target_set = Vec::with_capacity(params.n_train);
    let mut shadow_set = Vec::with_capacity(params.n_train);
    for _ in 0..params.n_train {
        target_set.push(QueryDist::Group0.sample(params.tau, &mut rng));
    }
    for _ in 0..params.n_train {
        shadow_set.push(QueryDist::Full.sample(params.tau, &mut rng));
    }
    let mut sorted_target = target_set.clone();
    sorted_target.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut sorted_shadow = shadow_set.clone();
    sorted_shadow.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut wins = 0u64;
    for _ in 0..n_trials {
        let is_target = rng.gen::<f64>() < 0.5;
        let x = query.sample(params.tau, &mut rng);
        let close = if is_target {
            within_epsilon(&sorted_target, x, params.epsilon)
        } else {
            within_epsilon(&sorted_shadow, x, params.epsilon)
        };
        let p_correct = if close { params.pi_tr } else { params.pi_te };
        let correct = rng.gen::<f64>() < p_correct;
        let guess_target = correct;
        if guess_target == is_target {
            wins += 1;
        }
    }
    TheorySimulation {
        win_rate: wins as f64 / n_trials as f64,
        target_set,
        shadow_set,
    }
}

/// Empirical win rate of the simulated attack; see
/// [`simulate_theory_attack_detailed`].
pub fn simulate_theory_attack(
    params: &TheoryParams,
    query: QueryDist,
    n_trials: u64,
    master_seed: u64,
) -> f64 {
    simulate_theory_attack_detailed(params, query, n_trials, master_seed).win_rate
}

/// One row of the closeness curve: exact f values averaged over resampled
/// training sets. `mc_stderr` is the largest standard error of the three
/// reported means, a conservative uncertainty for trend checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryCurveRow {
    pub tau: f64,
    pub ft_d0: f64,
    pub ft_d1: f64,
    pub fs_d: f64,
    pub mc_stderr: f64,
}

/// Number of training-set resamples behind each curve row.
pub const CURVE_RESAMPLES: usize = 100;

/// Closeness curve over a tau grid: for each tau, average the exact
/// f_t(D_0), f_t(D_1) and f_s(D) over freshly drawn training sets.
pub fn theory_curve(
    epsilon: f64,
    n_train: usize,
    tau_grid: &[f64],
    master_seed: u64,
) -> Vec<TheoryCurveRow> {
    theory_curve_with_resamples(epsilon, n_train, tau_grid, CURVE_RESAMPLES, master_seed)
}

pub fn theory_curve_with_resamples(
    epsilon: f64,
    n_train: usize,
    tau_grid: &[f64],
    resamples: usize,
    master_seed: u64,
) -> Vec<TheoryCurveRow> {
    assert!(!tau_grid.is_empty(), "tau grid must be non-empty");
    assert!(epsilon > 0.0 && n_train > 0 && resamples > 0);
    tau_grid
        .par_iter()
        .enumerate()
        .map(|(i, &tau)| {
            let row_seed = seed::derive(master_seed, "theory-row", i as u64);
            let mut ft0 = Vec::with_capacity(resamples);
            let mut ft1 = Vec::with_capacity(resamples);
            let mut fs = Vec::with_capacity(resamples);
            for r in 0..resamples {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(seed::derive(row_seed, "resample", r as u64));
                let target: Vec<f64> = (0..n_train)
                    .map(|_| QueryDist::Group0.sample(tau, &mut rng))
                    .collect();
                let shadow: Vec<f64> = (0..n_train)
                    .map(|_| QueryDist::Full.sample(tau, &mut rng))
                    .collect();
                let exact = ClosenessMethod::ExactIntervalUnion;
                ft0.push(closeness_probability(&target, QueryDist::Group0, tau, epsilon, exact).f_value);
                ft1.push(closeness_probability(&target, QueryDist::Group1, tau, epsilon, exact).f_value);
                fs.push(closeness_probability(&shadow, QueryDist::Full, tau, epsilon, exact).f_value);
            }
            let stderr = |v: &[f64]| {
                let m = v.iter().sum::<f64>() / v.len() as f64;
                let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
                    / (v.len().saturating_sub(1).max(1)) as f64;
                (var / v.len() as f64).sqrt()
            };
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            TheoryCurveRow {
                tau,
                ft_d0: mean(&ft0),
                ft_d1: mean(&ft1),
                fs_d: mean(&fs),
                mc_stderr: stderr(&ft0).max(stderr(&ft1)).max(stderr(&fs)),
            }
        })
        .collect()
}

/// Write a curve as CSV with columns tau, ft_d0, ft_d1, fs_d, mc_stderr.
pub fn write_theory_csv<W: Write>(rows: &[TheoryCurveRow], out: &mut W) -> io::Result<()> {
    writeln!(out, "tau,ft_d0,ft_d1,fs_d,mc_stderr")?;
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.tau, r.ft_d0, r.ft_d1, r.fs_d, r.mc_stderr)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(tau: f64) -> TheoryParams {
        TheoryParams {
            tau,
            epsilon: 0.001,
            n_train: 1000,
            pi_tr: 1.0,
            pi_te: 0.5,
        }
    }

    #[test]
    fn normal_cdf_matches_reference_values() {
        // Reference values from standard tables.
        let cases = [
            (0.0, 0.5),
            (1.0, 0.841_344_746_068_542_9),
            (1.96, 0.975_002_104_851_779_5),
            (-2.0, 0.022_750_131_948_179_195),
            (3.5, 0.999_767_370_920_964_5),
        ];
        for (x, expected) in cases {
            assert_abs_diff_eq!(normal_cdf(x), expected, epsilon = 1e-7);
        }
    }

    #[test]
    fn exact_measure_matches_hand_merged_two_point_case() {
        // Points at 0.0 and 0.5 with eps = 0.3: intervals [-0.3, 0.3] and
        // [0.2, 0.8] overlap and merge to [-0.3, 0.8]. Under Group0 at
        // tau = 0 the measure is the average of the two class components.
        let f = closeness_probability(
            &[0.5, 0.0],
            QueryDist::Group0,
            0.0,
            0.3,
            ClosenessMethod::ExactIntervalUnion,
        )
        .f_value;
        let expected = 0.5 * (normal_cdf(0.8 + 1.0) - normal_cdf(-0.3 + 1.0))
            + 0.5 * (normal_cdf(0.8 - 1.0) - normal_cdf(-0.3 - 1.0));
        assert_abs_diff_eq!(f, expected, epsilon = 1e-12);

        // Disjoint case: points at -2 and 2 with eps = 0.5 stay separate.
        let f = closeness_probability(
            &[2.0, -2.0],
            QueryDist::Group0,
            0.0,
            0.5,
            ClosenessMethod::ExactIntervalUnion,
        )
        .f_value;
        let span = |lo: f64, hi: f64, mu: f64| normal_cdf(hi - mu) - normal_cdf(lo - mu);
        let expected = 0.5 * (span(-2.5, -1.5, -1.0) + span(1.5, 2.5, -1.0))
            + 0.5 * (span(-2.5, -1.5, 1.0) + span(1.5, 2.5, 1.0));
        assert_abs_diff_eq!(f, expected, epsilon = 1e-12);
    }

    #[test]
    fn tiny_epsilon_gives_vanishing_measure() {
        let f = closeness_probability(
            &[0.3, -0.4, 1.2],
            QueryDist::Full,
            1.0,
            1e-12,
            ClosenessMethod::ExactIntervalUnion,
        )
        .f_value;
        assert!(f < 1e-9, "f = {f}");
    }

    #[test]
    fn huge_epsilon_covers_everything() {
        let f = closeness_probability(
            &[0.0],
            QueryDist::Full,
            2.0,
            10.0,
            ClosenessMethod::ExactIntervalUnion,
        )
        .f_value;
        assert!(f > 1.0 - 1e-9, "f = {f}");
    }

    #[test]
    fn monte_carlo_agrees_with_exact_in_paper_setting() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let train: Vec<f64> = (0..1000).map(|_| QueryDist::Full.sample(2.0, &mut rng)).collect();
        let exact = closeness_probability(
            &train,
            QueryDist::Full,
            2.0,
            0.001,
            ClosenessMethod::ExactIntervalUnion,
        );
        let mc = closeness_probability(
            &train,
            QueryDist::Full,
            2.0,
            0.001,
            ClosenessMethod::MonteCarlo {
                trials: 1_000_000,
                seed: 55,
            },
        );
        let se = mc.mc_std_err.unwrap();
        assert!(
            (exact.f_value - mc.f_value).abs() <= 3.0 * se,
            "exact {} vs mc {} (se {})",
            exact.f_value,
            mc.f_value,
            se
        );
    }

    #[test]
    fn closed_form_arithmetic() {
        let p = TheoryParams {
            tau: 0.0,
            epsilon: 0.001,
            n_train: 1,
            pi_tr: 1.0,
            pi_te: 0.5,
        };
        assert_abs_diff_eq!(attack_accuracy_closed_form(&p, 0.4, 0.1), 0.575, epsilon = 1e-15);
        assert_abs_diff_eq!(attack_accuracy_closed_form(&p, 0.3, 0.3), 0.5, epsilon = 1e-15);
        let flat = TheoryParams { pi_tr: 0.7, pi_te: 0.7 - 1e-12, ..p };
        assert_abs_diff_eq!(attack_accuracy_closed_form(&flat, 0.9, 0.05), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn simulation_matches_closed_form_on_realized_sets() {
        let p = params(2.0);
        let n_trials = 1_000_000u64;
        let sim = simulate_theory_attack_detailed(&p, QueryDist::Full, n_trials, 101);
        let exact = ClosenessMethod::ExactIntervalUnion;
        let f_t = closeness_probability(&sim.target_set, QueryDist::Full, p.tau, p.epsilon, exact)
            .f_value;
        let f_s = closeness_probability(&sim.shadow_set, QueryDist::Full, p.tau, p.epsilon, exact)
            .f_value;
        let expected = attack_accuracy_closed_form(&p, f_t, f_s);
        let tol = 3.0 * (0.25f64 / n_trials as f64).sqrt();
        assert!(
            (sim.win_rate - expected).abs() <= tol,
            "sim {} vs formula {} (tol {})",
            sim.win_rate,
            expected,
            tol
        );
    }

    #[test]
    fn per_group_accuracies_bracket_half_at_large_tau() {
        let p = params(4.0);
        let acc0 = simulate_theory_attack(&p, QueryDist::Group0, 400_000, 7);
        let acc1 = simulate_theory_attack(&p, QueryDist::Group1, 400_000, 8);
        assert!(acc0 > 0.5, "group-0 accuracy {acc0}");
        assert!(acc1 < 0.5, "group-1 accuracy {acc1}");
    }

    #[test]
    fn per_group_accuracies_coincide_at_tau_zero() {
        let p = params(0.0);
        let acc0 = simulate_theory_attack(&p, QueryDist::Group0, 400_000, 9);
        let acc1 = simulate_theory_attack(&p, QueryDist::Group1, 400_000, 10);
        // Same law, independent randomness: difference is pure MC noise.
        assert!((acc0 - acc1).abs() < 3.0 * (2.0 * 0.25f64 / 400_000.0).sqrt());
    }

    #[test]
    fn full_query_measure_is_mean_of_group_measures() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let train: Vec<f64> = (0..500).map(|_| QueryDist::Group0.sample(1.5, &mut rng)).collect();
        let exact = ClosenessMethod::ExactIntervalUnion;
        let full = closeness_probability(&train, QueryDist::Full, 1.5, 0.05, exact).f_value;
        let g0 = closeness_probability(&train, QueryDist::Group0, 1.5, 0.05, exact).f_value;
        let g1 = closeness_probability(&train, QueryDist::Group1, 1.5, 0.05, exact).f_value;
        assert_abs_diff_eq!(full, 0.5 * (g0 + g1), epsilon = 1e-12);
    }

    #[test]
    fn curve_shows_group1_closeness_decay_and_shadow_balance() {
        let grid = [0.0, 1.0, 2.0, 3.0, 4.0];
        let rows = theory_curve_with_resamples(0.001, 1000, &grid, 100, 19);
        assert_eq!(rows.len(), grid.len());
        for w in rows.windows(2) {
            assert!(
                w[1].ft_d1 <= w[0].ft_d1 + 3.0 * (w[0].mc_stderr + w[1].mc_stderr),
                "ft_d1 rose from {} to {}",
                w[0].ft_d1,
                w[1].ft_d1
            );
        }
        // At tau = 0 target and shadow sets share one law, so all three
        // averages coincide up to resampling noise.
        let r0 = &rows[0];
        assert!((r0.ft_d0 - r0.fs_d).abs() < 5.0 * r0.mc_stderr.max(1e-6));
        assert!((r0.ft_d0 - r0.ft_d1).abs() < 5.0 * r0.mc_stderr.max(1e-6));
    }

    #[test]
    fn shadow_measure_is_group_blind_in_expectation() {
        // f_s evaluated under either group should agree once averaged over
        // shadow training resamples.
        let tau = 2.0;
        let resamples = 100;
        let mut g0 = Vec::new();
        let mut g1 = Vec::new();
        for r in 0..resamples {
            let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(23, "fs-balance", r));
            let shadow: Vec<f64> =
                (0..1000).map(|_| QueryDist::Full.sample(tau, &mut rng)).collect();
            let exact = ClosenessMethod::ExactIntervalUnion;
            g0.push(closeness_probability(&shadow, QueryDist::Group0, tau, 0.001, exact).f_value);
            g1.push(closeness_probability(&shadow, QueryDist::Group1, tau, 0.001, exact).f_value);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let sd = |v: &[f64], m: f64| {
            (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
        };
        let (m0, m1) = (mean(&g0), mean(&g1));
        let se = (sd(&g0, m0).powi(2) / resamples as f64 + sd(&g1, m1).powi(2) / resamples as f64)
            .sqrt();
        assert!((m0 - m1).abs() < 4.0 * se, "f_s means {m0} vs {m1} (se {se})");
    }

    #[test]
    fn csv_emission_has_expected_header_and_rows() {
        let rows = vec![TheoryCurveRow {
            tau: 1.0,
            ft_d0: 0.25,
            ft_d1: 0.125,
            fs_d: 0.2,
            mc_stderr: 0.001,
        }];
        let mut buf = Vec::new();
        write_theory_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "tau,ft_d0,ft_d1,fs_d,mc_stderr\n1,0.25,0.125,0.2,0.001\n");
    }
}
