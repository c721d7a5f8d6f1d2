//! The controlled audit experiment: control and shifted settings over many
//! independent runs, the percentile decision rule, and the end-to-end
//! distinguishing game.
//!
//! A control run plays auditor-against-itself: everything — the stand-in
//! target, the shadows, the query data — is drawn from the declared
//! distribution, so the resulting statistic samples the null. A shifted
//! run puts the audited model (trained on the alternative distribution, or
//! supplied from outside) in the target slot while the auditor's side
//! still works from the declared distribution. Thresholding shifted scores
//! at a percentile of the control scores turns the attack into a test with
//! a controlled false-positive rate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::{
    attack_accuracy, build_attack_dataset, build_group_pure_bundles, inter_group_attack_gap,
    train_attack_with, MetaOrientation,
};
use crate::data::{stratified_split, Dataset, FiveWaySplit, PartitionPlan, TaskKind};
use crate::dist::DistSpec;
use crate::error::{Error, Result};
use crate::learners::{performance, train, AlgorithmSpec, LearnerSpec, TrainedModel};
use crate::seed;
use crate::stats;

/// Version tag embedded in serialized reports.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Which score a run produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// Overall balanced attack accuracy (distribution-shift audits).
    OverallAccuracy,
    /// Attack accuracy on group-0 bundles minus group-1 bundles
    /// (group-directed shift audits).
    InterGroupGap,
}

/// Full experiment description.
#[derive(Debug, Clone)]
pub struct AuditConfig {
    pub statistic: Statistic,
    pub learner: AlgorithmSpec,
    /// The five-way split plan. Its seed field is ignored: every run
    /// derives its own split seed.
    pub partition: PartitionPlan,
    /// The declared distribution D.
    pub normative: DistSpec,
    /// The alternative D' that shifted runs train the audited model on.
    pub alternative: DistSpec,
    /// Points the auditor draws from D per run, split five ways.
    pub n_total: usize,
    pub n_control_runs: usize,
    pub n_shifted_runs: usize,
    /// Control percentile for the decision threshold.
    pub percentile: f64,
    /// Query points per attack bundle (and the meta-classifier's n_t).
    pub n_q: usize,
    /// Number of shadow models.
    pub n_s: usize,
    /// Training-set size for the audited model in shifted runs and games;
    /// `None` uses the target_train allotment. Data-availability sweeps
    /// set this so shrinking the auditor's sample leaves the audited
    /// model untouched.
    pub audited_train_size: Option<usize>,
    pub seed: u64,
}

impl AuditConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.percentile > 0.0 && self.percentile < 1.0) {
            return bad(format!(
                "percentile must lie strictly between 0 and 1, got {}",
                self.percentile
            ));
        }
        if self.n_control_runs < 10 {
            return bad(format!(
                "need at least 10 control runs for a meaningful percentile, got {}",
                self.n_control_runs
            ));
        }
        if self.n_shifted_runs < 1 {
            return bad("need at least 1 shifted run".to_string());
        }
        if self.n_q < 1 {
            return bad("n_q must be at least 1".to_string());
        }
        if self.n_s < 1 {
            return bad("n_s must be at least 1".to_string());
        }
        if self.audited_train_size == Some(0) {
            return bad("audited_train_size cannot be zero".to_string());
        }
        if self.n_total < 10 {
            return bad(format!("n_total {} is too small to split", self.n_total));
        }
        self.partition.validate()?;
        if self.partition.fractions.iter().any(|&f| f <= 0.0) {
            return bad("every partition needs a positive fraction".to_string());
        }
        self.normative.validate()?;
        self.alternative.validate()?;
        if self.normative.task() != self.alternative.task() {
            return Err(Error::TaskMismatch(
                "normative and alternative distributions have different tasks".to_string(),
            ));
        }
        if self.normative.dim() != self.alternative.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.normative.dim(),
                got: self.alternative.dim(),
            });
        }
        self.learner.validate()?;
        if !self.learner.supports(self.normative.task()) {
            return Err(Error::TaskMismatch(format!(
                "{} does not support {:?}",
                self.learner.name(),
                self.normative.task()
            )));
        }
        Ok(())
    }
}

/// Target-model bookkeeping for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    /// Target performance on its own training data.
    pub train_performance: f64,
    /// Target performance on held-out data from D.
    pub test_performance: f64,
    /// Per-group test performance; absent when the group is unrepresented
    /// in the test split.
    pub test_performance_group0: Option<f64>,
    pub test_performance_group1: Option<f64>,
    pub target_converged: bool,
    pub shadows_converged: Vec<bool>,
}

/// One run's statistic value plus its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingOutcome {
    pub score: f64,
    pub diagnostics: RunDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub schema_version: u32,
    pub statistic: Statistic,
    pub control_scores: Vec<f64>,
    pub shifted_scores: Vec<f64>,
    /// The configured percentile of the control scores (nearest rank).
    pub threshold: f64,
    pub percentile: f64,
    /// Per shifted run: score strictly above the threshold.
    pub verdicts: Vec<bool>,
    pub tpr_at_percentile: f64,
    pub auc_roc: f64,
    pub control_diagnostics: Vec<RunDiagnostics>,
    pub shifted_diagnostics: Vec<RunDiagnostics>,
}

enum TargetSource<'a> {
    /// Control: train the stand-in target on the D split.
    Normative,
    /// Shifted evaluation: train the audited model on fresh D' data of the
    /// same size the control target would have had.
    Alternative,
    /// Shifted deployment: audit a model supplied from outside.
    External(&'a TrainedModel),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ScoreMode {
    /// Shadow-training attack statistic.
    Attack,
    /// Baseline that reads the target's test performance directly.
    Naive,
}

fn group_performance(model: &TrainedModel, data: &Dataset, group: u8) -> Result<Option<f64>> {
    let members = data.group_indices(group);
    if members.is_empty() {
        return Ok(None);
    }
    performance(model, &data.select(&members)).map(Some)
}

fn run_setting(
    cfg: &AuditConfig,
    mode: ScoreMode,
    target_source: TargetSource,
    run_seed: u64,
) -> Result<SettingOutcome> {
    let dim = cfg.normative.dim();
    let task = cfg.normative.task();
    let full = cfg
        .normative
        .source(seed::derive(run_seed, "sample", 0))?
        .draw_dataset(cfg.n_total, dim, task)?;
    let mut plan = cfg.partition.clone();
    plan.seed = seed::derive(run_seed, "split", 0);
    let split = stratified_split(&full, &plan)?;

    let trained_here;
    let target: &TrainedModel = match target_source {
        TargetSource::Normative => {
            let spec = LearnerSpec::new(cfg.learner, seed::derive(run_seed, "target-model", 0));
            trained_here = train(&spec, &split.target_train)?;
            &trained_here
        }
        TargetSource::Alternative => {
            let n_train = cfg
                .audited_train_size
                .unwrap_or_else(|| split.target_train.len());
            let alt = cfg
                .alternative
                .source(seed::derive(run_seed, "alt-sample", 0))?
                .draw_dataset(n_train, dim, task)?;
            let spec = LearnerSpec::new(cfg.learner, seed::derive(run_seed, "target-model", 0));
            trained_here = train(&spec, &alt)?;
            &trained_here
        }
        TargetSource::External(model) => model,
    };

    let mut diagnostics = diagnostics_for(target, &split)?;
    let score = match mode {
        ScoreMode::Attack => {
            let shadow_data = &split.shadow_train;
            if shadow_data.len() < cfg.n_s {
                return Err(Error::InvalidConfig(format!(
                    "shadow split of {} examples cannot feed {} shadow models",
                    shadow_data.len(),
                    cfg.n_s
                )));
            }
            let mut shadows = Vec::with_capacity(cfg.n_s);
            for k in 0..cfg.n_s {
                let lo = k * shadow_data.len() / cfg.n_s;
                let hi = (k + 1) * shadow_data.len() / cfg.n_s;
                let chunk: Vec<usize> = (lo..hi).collect();
                let spec =
                    LearnerSpec::new(cfg.learner, seed::derive(run_seed, "shadow-model", k as u64));
                shadows.push(train(&spec, &shadow_data.select(&chunk))?);
            }
            diagnostics.shadows_converged = shadows
                .iter()
                .map(|s| s.diagnostics().converged)
                .collect();
            let train_bundles = build_attack_dataset(
                target,
                &shadows,
                &split.attack_train,
                cfg.n_q,
                seed::derive(run_seed, "attack-train-bundles", 0),
            )?;
            // The gap statistic needs the canonical direction — "performs
            // better on a bundle, more likely its owner" — because its sign
            // compares the two groups against that reading. The overall
            // statistic keeps the free fit, where any detectable shift
            // separates the bundle clouds and orients the fit by itself.
            let orientation = match cfg.statistic {
                Statistic::OverallAccuracy => MetaOrientation::Free,
                Statistic::InterGroupGap => match task {
                    TaskKind::Classification => MetaOrientation::FeatureHigh,
                    TaskKind::Regression => MetaOrientation::FeatureLow,
                },
            };
            let meta = train_attack_with(&train_bundles, orientation)?;
            let test_seed = seed::derive(run_seed, "attack-test-bundles", 0);
            match cfg.statistic {
                Statistic::OverallAccuracy => {
                    let test_bundles = build_attack_dataset(
                        target,
                        &shadows,
                        &split.attack_test,
                        cfg.n_q,
                        test_seed,
                    )?;
                    attack_accuracy(&meta, &test_bundles)?
                }
                Statistic::InterGroupGap => {
                    let test_bundles = build_group_pure_bundles(
                        target,
                        &shadows,
                        &split.attack_test,
                        cfg.n_q,
                        test_seed,
                    )?;
                    inter_group_attack_gap(&meta, &test_bundles)?
                }
            }
        }
        ScoreMode::Naive => match cfg.statistic {
            // Higher score must mean "more shifted", so classification
            // scores are negated accuracies (shift hurts accuracy) while
            // regression keeps raw squared error.
            Statistic::OverallAccuracy => match task {
                TaskKind::Classification => -diagnostics.test_performance,
                TaskKind::Regression => diagnostics.test_performance,
            },
            // Magnitude of the inter-group performance disparity. Without
            // shadow calibration the naive auditor has no way to know which
            // direction underrepresentation should push the disparity, so
            // the alarm fires on its size alone. This is also the quantity's
            // task-agnostic form: accuracies and squared errors both enter
            // as "how far apart the groups sit".
            Statistic::InterGroupGap => {
                let g0 = diagnostics
                    .test_performance_group0
                    .ok_or(Error::MissingGroup(0))?;
                let g1 = diagnostics
                    .test_performance_group1
                    .ok_or(Error::MissingGroup(1))?;
                (g0 - g1).abs()
            }
        },
    };
    Ok(SettingOutcome { score, diagnostics })
}

fn diagnostics_for(target: &TrainedModel, split: &FiveWaySplit) -> Result<RunDiagnostics> {
    Ok(RunDiagnostics {
        train_performance: target.diagnostics().train_performance,
        test_performance: performance(target, &split.model_test)?,
        test_performance_group0: group_performance(target, &split.model_test, 0)?,
        test_performance_group1: group_performance(target, &split.model_test, 1)?,
        target_converged: target.diagnostics().converged,
        shadows_converged: Vec::new(),
    })
}

/// One control run: the whole game is played against the declared
/// distribution, sampling the statistic's null distribution.
pub fn run_control_setting(cfg: &AuditConfig, run_seed: u64) -> Result<SettingOutcome> {
    run_setting(cfg, ScoreMode::Attack, TargetSource::Normative, run_seed)
}

/// One shifted run. `audited` supplies a deployed model to audit; `None`
/// trains the audited model on the alternative distribution.
pub fn run_shifted_setting(
    cfg: &AuditConfig,
    audited: Option<&TrainedModel>,
    run_seed: u64,
) -> Result<SettingOutcome> {
    let source = match audited {
        Some(model) => TargetSource::External(model),
        None => TargetSource::Alternative,
    };
    run_setting(cfg, ScoreMode::Attack, source, run_seed)
}

fn collect_runs(cfg: &AuditConfig, mode: ScoreMode, shifted: bool) -> Result<Vec<SettingOutcome>> {
    let (setting, n_runs) = if shifted {
        ("shifted-run", cfg.n_shifted_runs)
    } else {
        ("control-run", cfg.n_control_runs)
    };
    (0..n_runs)
        .into_par_iter()
        .map(|i| {
            let run_seed = seed::derive(cfg.seed, setting, i as u64);
            let source = if shifted {
                TargetSource::Alternative
            } else {
                TargetSource::Normative
            };
            run_setting(cfg, mode, source, run_seed).map_err(|e| Error::Run {
                setting,
                index: i,
                source: Box::new(e),
            })
        })
        .collect()
}

fn assemble_report(
    cfg: &AuditConfig,
    control: Vec<SettingOutcome>,
    shifted: Vec<SettingOutcome>,
) -> Result<AuditReport> {
    let control_scores: Vec<f64> = control.iter().map(|o| o.score).collect();
    let shifted_scores: Vec<f64> = shifted.iter().map(|o| o.score).collect();
    let threshold = stats::percentile_threshold(&control_scores, cfg.percentile)?;
    let verdicts: Vec<bool> = shifted_scores.iter().map(|&s| s > threshold).collect();
    let tpr_at_percentile = stats::tpr_at_threshold(&shifted_scores, threshold)?;
    let auc_roc = stats::auc_roc(&control_scores, &shifted_scores)?;
    Ok(AuditReport {
        schema_version: REPORT_SCHEMA_VERSION,
        statistic: cfg.statistic,
        control_scores,
        shifted_scores,
        threshold,
        percentile: cfg.percentile,
        verdicts,
        tpr_at_percentile,
        auc_roc,
        control_diagnostics: control.into_iter().map(|o| o.diagnostics).collect(),
        shifted_diagnostics: shifted.into_iter().map(|o| o.diagnostics).collect(),
    })
}

/// Run the full controlled experiment: n_control_runs null runs, then
/// n_shifted_runs evaluation runs against the alternative, each with its
/// own derived seed, reduced into a report in run order.
pub fn run_audit(cfg: &AuditConfig) -> Result<AuditReport> {
    cfg.validate()?;
    let control = collect_runs(cfg, ScoreMode::Attack, false)?;
    let shifted = collect_runs(cfg, ScoreMode::Attack, true)?;
    assemble_report(cfg, control, shifted)
}

/// The baseline audit that skips shadow training entirely and scores each
/// run by the target's test performance (overall, or the inter-group
/// disparity), pushed through the same threshold machinery.
pub fn naive_baseline(cfg: &AuditConfig) -> Result<AuditReport> {
    cfg.validate()?;
    let control = collect_runs(cfg, ScoreMode::Naive, false)?;
    let shifted = collect_runs(cfg, ScoreMode::Naive, true)?;
    assemble_report(cfg, control, shifted)
}

/// Outcome of one round of the distinguishing game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameOutcome {
    pub auditor_guesses_shift: bool,
    pub true_shift: bool,
    pub win: bool,
    pub score: f64,
}

/// Play one round of the distinguishing game against a pre-computed
/// threshold: the challenger flips a fair coin, trains the audited model
/// on D or D' accordingly, and the auditor claims a shift exactly when the
/// statistic exceeds the threshold.
pub fn play_game(cfg: &AuditConfig, threshold: f64, master_seed: u64) -> Result<GameOutcome> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(master_seed, "game-coin", 0));
    let true_shift = rng.gen::<f64>() < 0.5;
    let dist = if true_shift {
        &cfg.alternative
    } else {
        &cfg.normative
    };
    let n_target = cfg
        .audited_train_size
        .unwrap_or_else(|| cfg.partition.counts(cfg.n_total)[0]);
    let challenger_data = dist
        .source(seed::derive(master_seed, "challenger-sample", 0))?
        .draw_dataset(n_target, cfg.normative.dim(), cfg.normative.task())?;
    let spec = LearnerSpec::new(cfg.learner, seed::derive(master_seed, "challenger-model", 0));
    let audited = train(&spec, &challenger_data)?;
    let outcome = run_shifted_setting(cfg, Some(&audited), seed::derive(master_seed, "game-eval", 0))?;
    let guess = outcome.score > threshold;
    Ok(GameOutcome {
        auditor_guesses_shift: guess,
        true_shift,
        win: guess == true_shift,
        score: outcome.score,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Example;
    use crate::dist::{BlobsSpec, Gauss1dSpec, PoolSpec};
    use crate::learners::DtParams;
    use std::sync::Arc;

    fn gauss_cfg(statistic: Statistic, n_total: usize, runs: usize, seed: u64) -> AuditConfig {
        AuditConfig {
            statistic,
            learner: AlgorithmSpec::Dt(DtParams { max_depth: 30 }),
            partition: PartitionPlan {
                fractions: [0.2; 5],
                stratify: true,
                seed: 0,
            },
            normative: crate::dist::gauss1d_normative(2.0),
            alternative: crate::dist::gauss1d_underrep(2.0, 1.0),
            n_total,
            n_control_runs: runs,
            n_shifted_runs: runs,
            percentile: 0.9,
            n_q: 20,
            n_s: 1,
            audited_train_size: None,
            seed,
        }
    }

    #[test]
    fn constant_models_give_exactly_null_scores() {
        // A distribution with a single label trains constant predictors
        // everywhere, so the attack sees identical black boxes: overall
        // accuracy is exactly one half and the gap is exactly zero.
        let rows: Vec<Example> = (0..4000)
            .map(|i| Example {
                features: vec![i as f64 * 0.01],
                label: 1.0,
                group: (i % 2) as u8,
            })
            .collect();
        let pool = DistSpec::Pool(PoolSpec {
            name: "ones".to_string(),
            data: Arc::new(Dataset::new(rows, 1, TaskKind::Classification).unwrap()),
        });
        let mut cfg = gauss_cfg(Statistic::OverallAccuracy, 1000, 10, 3);
        cfg.normative = pool.clone();
        cfg.alternative = pool;
        let outcome = run_control_setting(&cfg, 99).unwrap();
        assert!((outcome.score - 0.5).abs() < 1e-12, "score {}", outcome.score);

        cfg.statistic = Statistic::InterGroupGap;
        let outcome = run_control_setting(&cfg, 99).unwrap();
        assert_eq!(outcome.score, 0.0);
    }

    #[test]
    fn identical_cfg_and_seed_reproduce_the_report_bytes() {
        let cfg = gauss_cfg(Statistic::InterGroupGap, 600, 10, 11);
        let a = run_audit(&cfg).unwrap();
        let b = run_audit(&cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        // And a different master seed moves at least the scores.
        let mut cfg2 = cfg.clone();
        cfg2.seed = 12;
        let c = run_audit(&cfg2).unwrap();
        assert_ne!(a.control_scores, c.control_scores);
    }

    #[test]
    fn report_internal_consistency() {
        let cfg = gauss_cfg(Statistic::OverallAccuracy, 600, 12, 21);
        let report = run_audit(&cfg).unwrap();
        let expected_threshold =
            stats::percentile_threshold(&report.control_scores, cfg.percentile).unwrap();
        assert_eq!(report.threshold, expected_threshold);
        for (v, s) in report.verdicts.iter().zip(&report.shifted_scores) {
            assert_eq!(*v, *s > report.threshold);
        }
        let hits = report.verdicts.iter().filter(|&&v| v).count();
        assert!(
            (report.tpr_at_percentile - hits as f64 / report.verdicts.len() as f64).abs() < 1e-12
        );
        assert_eq!(report.control_diagnostics.len(), cfg.n_control_runs);
        assert_eq!(report.shifted_diagnostics.len(), cfg.n_shifted_runs);
        assert_eq!(report.schema_version, REPORT_SCHEMA_VERSION);
    }

    #[test]
    fn unshifted_audited_model_matches_the_control_distribution() {
        // b = 0 branch: the audited model is trained on D itself, so the
        // shifted scores must be exchangeable with control scores.
        // Two-sample Kolmogorov-Smirnov at the 1% level.
        let mut cfg = gauss_cfg(Statistic::OverallAccuracy, 500, 50, 31);
        cfg.alternative = cfg.normative.clone();
        let report = run_audit(&cfg).unwrap();
        let (mut a, mut b) = (report.control_scores.clone(), report.shifted_scores.clone());
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let d = ks_statistic(&a, &b);
        let (n, m) = (a.len() as f64, b.len() as f64);
        let critical = 1.628 * ((n + m) / (n * m)).sqrt();
        assert!(d < critical, "KS {d} >= {critical}");
        // Null calibration, loosely: TPR near the nominal 10%.
        assert!(
            (report.tpr_at_percentile - 0.1).abs() <= 0.15,
            "tpr {}",
            report.tpr_at_percentile
        );
    }

    fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
        let mut d: f64 = 0.0;
        let mut j = 0usize;
        for (i, &x) in a.iter().enumerate() {
            while j < b.len() && b[j] <= x {
                j += 1;
            }
            let fa = (i + 1) as f64 / a.len() as f64;
            let fb = j as f64 / b.len() as f64;
            d = d.max((fa - fb).abs());
        }
        d
    }

    #[test]
    fn missing_group_surfaces_for_gap_statistic_on_groupless_data() {
        let mut cfg = gauss_cfg(Statistic::InterGroupGap, 600, 10, 41);
        let blobs = DistSpec::Blobs(BlobsSpec {
            center0: vec![-1.0],
            center1: vec![1.0],
            sigma: 1.0,
        });
        cfg.normative = blobs.clone();
        cfg.alternative = blobs;
        let err = run_audit(&cfg).unwrap_err();
        match err {
            Error::Run { source, .. } => {
                assert!(matches!(*source, Error::MissingGroup(1)), "{source}")
            }
            other => panic!("expected a run error, got {other}"),
        }
    }

    #[test]
    fn strong_shift_with_memorizing_learner_is_caught() {
        // D and D' have disjoint supports; a tree trained on D' behaves at
        // chance on D queries while shadows are near-perfect there, so the
        // overall statistic separates cleanly.
        let near = DistSpec::Blobs(BlobsSpec {
            center0: vec![-2.0, 0.0],
            center1: vec![2.0, 0.0],
            sigma: 0.5,
        });
        let far = DistSpec::Blobs(BlobsSpec {
            center0: vec![60.0, 50.0],
            center1: vec![50.0, 60.0],
            sigma: 0.5,
        });
        let mut cfg = gauss_cfg(Statistic::OverallAccuracy, 600, 12, 51);
        cfg.normative = near;
        cfg.alternative = far;
        let report = run_audit(&cfg).unwrap();
        assert!(report.auc_roc > 0.9, "auc {}", report.auc_roc);
        assert!(report.tpr_at_percentile > 0.8, "tpr {}", report.tpr_at_percentile);

        // Diagnostics must show the performance drop on D data.
        let mean = |d: &[RunDiagnostics]| {
            d.iter().map(|r| r.test_performance).sum::<f64>() / d.len() as f64
        };
        assert!(mean(&report.control_diagnostics) > mean(&report.shifted_diagnostics) + 0.1);
    }

    #[test]
    fn game_win_rate_tracks_the_tpr_identity() {
        // With a strong shift the auditor should win roughly
        // 0.5 * (1 - FPR) + 0.5 * TPR of the rounds; with TPR near 1 and
        // FPR near 0.1 that is ~0.95. A sign-flipped guess rule would
        // land near 0.5 instead.
        let near = DistSpec::Blobs(BlobsSpec {
            center0: vec![-2.0, 0.0],
            center1: vec![2.0, 0.0],
            sigma: 0.5,
        });
        let far = DistSpec::Blobs(BlobsSpec {
            center0: vec![60.0, 50.0],
            center1: vec![50.0, 60.0],
            sigma: 0.5,
        });
        let mut cfg = gauss_cfg(Statistic::OverallAccuracy, 600, 20, 61);
        cfg.normative = near;
        cfg.alternative = far;
        let control: Vec<f64> = (0..cfg.n_control_runs)
            .map(|i| {
                run_control_setting(&cfg, seed::derive(cfg.seed, "control-run", i as u64))
                    .unwrap()
                    .score
            })
            .collect();
        let threshold = stats::percentile_threshold(&control, cfg.percentile).unwrap();
        let wins = (0..30)
            .filter(|&g| play_game(&cfg, threshold, 7000 + g).unwrap().win)
            .count();
        assert!(wins >= 24, "won only {wins}/30 games");
    }

    #[test]
    fn naive_baseline_scores_are_performance_disparities() {
        let mut cfg = gauss_cfg(Statistic::InterGroupGap, 800, 10, 71);
        cfg.alternative = cfg.normative.clone();
        let report = naive_baseline(&cfg).unwrap();
        // Scores must equal the size of the recorded per-group disparity.
        for (score, diag) in report
            .control_scores
            .iter()
            .zip(&report.control_diagnostics)
        {
            let expected = (diag.test_performance_group0.unwrap()
                - diag.test_performance_group1.unwrap())
            .abs();
            assert!((score - expected).abs() < 1e-12);
        }

        let mut cfg = gauss_cfg(Statistic::OverallAccuracy, 800, 10, 72);
        cfg.alternative = cfg.normative.clone();
        let report = naive_baseline(&cfg).unwrap();
        for (score, diag) in report
            .control_scores
            .iter()
            .zip(&report.control_diagnostics)
        {
            assert!((score + diag.test_performance).abs() < 1e-12);
        }
    }

    #[test]
    fn config_validation_rejects_nonsense() {
        let good = gauss_cfg(Statistic::OverallAccuracy, 600, 10, 1);
        assert!(good.validate().is_ok());

        let mut c = good.clone();
        c.percentile = 1.0;
        assert!(c.validate().is_err());
        let mut c = good.clone();
        c.n_control_runs = 5;
        assert!(c.validate().is_err());
        let mut c = good.clone();
        c.partition.fractions = [0.5, 0.5, 0.0, 0.0, 0.0];
        assert!(c.validate().is_err());
        let mut c = good.clone();
        c.alternative = DistSpec::Blobs(BlobsSpec {
            center0: vec![0.0, 0.0],
            center1: vec![1.0, 1.0],
            sigma: 1.0,
        });
        assert!(c.validate().is_err()); // dimension mismatch

        let mut c = good;
        c.normative = DistSpec::Gauss1d(Gauss1dSpec {
            group_mix: 1.5,
            ..Gauss1dSpec::default()
        });
        assert!(c.validate().is_err());
    }
}
