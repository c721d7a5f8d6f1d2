//! Parameterized experiment campaigns: repeat the full controlled audit
//! along one axis — mixture weight α, group-underrepresentation weight β,
//! learner choice, or the fraction of data the auditor gets to use — and
//! reduce each cell to a summary row.
//!
//! Cells are independent by construction: a cell's seed derives from the
//! master seed and the cell's own grid value, never its position, so
//! adding or removing grid points leaves every other cell bit-identical.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audit::{run_audit, AuditConfig, AuditReport};
use crate::dist::{DistSpec, MixtureSpec, PoolSpec};
use crate::error::{Error, Result};
use crate::learners::AlgorithmSpec;
use crate::seed;
use std::sync::Arc;

/// Which knob the sweep turns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Mixture weight of the declared distribution inside the alternative:
    /// 1 means no shift at all.
    Alpha,
    /// Underrepresentation weight of group 0 in the alternative: 0.5 means
    /// the balanced mix, 1 removes group 1.
    Beta,
    /// Learner family, by name, with default hyperparameters.
    Learner,
    /// Fraction of the base sample available to the auditor. The audited
    /// model's training-set size is pinned to the base allotment.
    DataFraction,
}

/// One grid entry: numeric for alpha/beta/data_fraction, a learner name
/// for the learner axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridValue {
    Number(f64),
    Name(String),
}

impl GridValue {
    pub fn label(&self) -> String {
        match self {
            GridValue::Number(v) => format!("{v}"),
            GridValue::Name(s) => s.clone(),
        }
    }

    fn numeric(&self) -> Option<f64> {
        match self {
            GridValue::Number(v) => Some(*v),
            GridValue::Name(_) => None,
        }
    }
}

/// A campaign: one audit experiment per grid value, all derived from the
/// same base configuration.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub grid: Vec<GridValue>,
    /// For alpha sweeps over a finite pool: carve this many rows off the
    /// front of the alternative pool as a dedicated slice for the audited
    /// model's shift component, so auditor-side use of the same pool
    /// cannot collide with it.
    pub pool_reserve: Option<usize>,
    pub base: AuditConfig,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.grid.is_empty() {
            return bad("sweep grid is empty".to_string());
        }
        self.base.validate()?;
        if self.pool_reserve.is_some() && self.axis != SweepAxis::Alpha {
            return bad("pool_reserve only applies to the alpha axis".to_string());
        }
        for value in &self.grid {
            match (self.axis, value) {
                (SweepAxis::Alpha, GridValue::Number(v)) => {
                    if !(0.0..=1.0).contains(v) {
                        return bad(format!("alpha grid value {v} outside [0, 1]"));
                    }
                }
                (SweepAxis::Beta, GridValue::Number(v)) => {
                    if !(0.5..=1.0).contains(v) {
                        return bad(format!("beta grid value {v} outside [0.5, 1]"));
                    }
                }
                (SweepAxis::DataFraction, GridValue::Number(v)) => {
                    if !(*v > 0.0 && *v <= 1.0) {
                        return bad(format!("data fraction {v} outside (0, 1]"));
                    }
                }
                (SweepAxis::Learner, GridValue::Name(name)) => {
                    AlgorithmSpec::by_name(name)?;
                }
                (SweepAxis::Learner, GridValue::Number(v)) => {
                    return bad(format!("learner axis needs names, got {v}"));
                }
                (_, GridValue::Name(name)) => {
                    return bad(format!("numeric axis cannot take name `{name}`"));
                }
            }
        }
        if self.axis == SweepAxis::Beta && !matches!(self.base.alternative, DistSpec::Underrep(_))
        {
            return bad("beta sweeps need an underrepresentation alternative".to_string());
        }
        if let Some(r) = self.pool_reserve {
            let pool = match alpha_alt_component(&self.base) {
                DistSpec::Pool(p) => p,
                _ => {
                    return bad(
                        "pool_reserve needs a pool-backed alternative component".to_string(),
                    )
                }
            };
            if r == 0 || r > pool.data.len() {
                return bad(format!(
                    "pool_reserve {r} outside the pool's {} rows",
                    pool.data.len()
                ));
            }
        }
        Ok(())
    }
}

/// The component an alpha cell mixes into the declared distribution: the
/// alternative itself, or — when the base alternative is already a mixture
/// — that mixture's own shift component.
fn alpha_alt_component(base: &AuditConfig) -> &DistSpec {
    match &base.alternative {
        DistSpec::Mixture(m) => &m.alt,
        other => other,
    }
}

/// Summary columns for one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub control_mean: f64,
    pub control_sd: f64,
    pub shifted_mean: f64,
    pub shifted_sd: f64,
    pub auc_roc: f64,
    pub tpr_at_percentile: f64,
}

/// One grid cell: its summary row on success, a recorded error otherwise.
/// The full report (with raw per-run scores) rides along for emission.
#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub label: String,
    /// The grid value when the axis is numeric.
    pub value: Option<f64>,
    pub summary: Option<SweepRow>,
    pub error: Option<String>,
    pub report: Option<AuditReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutcome {
    pub axis: SweepAxis,
    pub cells: Vec<SweepCell>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn summarize(report: &AuditReport) -> SweepRow {
    SweepRow {
        control_mean: mean(&report.control_scores),
        control_sd: sample_sd(&report.control_scores),
        shifted_mean: mean(&report.shifted_scores),
        shifted_sd: sample_sd(&report.shifted_scores),
        auc_roc: report.auc_roc,
        tpr_at_percentile: report.tpr_at_percentile,
    }
}

/// Build the cell's audit configuration. Assumes `SweepSpec::validate`
/// already ran, so grid values are in range and the axis matches the base.
fn derive_cell_config(spec: &SweepSpec, value: &GridValue) -> AuditConfig {
    let mut cfg = spec.base.clone();
    cfg.seed = seed::derive(
        spec.base.seed,
        &format!("sweep-cell-{}", value.label()),
        0,
    );
    match (spec.axis, value) {
        (SweepAxis::Alpha, GridValue::Number(v)) => {
            let mut alt_component = alpha_alt_component(&spec.base).clone();
            if let Some(r) = spec.pool_reserve {
                if let DistSpec::Pool(p) = &alt_component {
                    let reserved: Vec<usize> = (0..r).collect();
                    alt_component = DistSpec::Pool(PoolSpec {
                        name: format!("{}-reserve", p.name),
                        data: Arc::new(p.data.select(&reserved)),
                    });
                }
            }
            let mix_base = match &spec.base.alternative {
                DistSpec::Mixture(m) => m.base.as_ref().clone(),
                _ => spec.base.normative.clone(),
            };
            cfg.alternative = DistSpec::Mixture(MixtureSpec {
                alpha: *v,
                base: Box::new(mix_base),
                alt: Box::new(alt_component),
            });
        }
        (SweepAxis::Beta, GridValue::Number(v)) => {
            if let DistSpec::Underrep(u) = &mut cfg.alternative {
                u.beta = *v;
            }
        }
        (SweepAxis::DataFraction, GridValue::Number(v)) => {
            cfg.n_total = (v * spec.base.n_total as f64).round() as usize;
            cfg.audited_train_size = spec
                .base
                .audited_train_size
                .or_else(|| Some(spec.base.partition.counts(spec.base.n_total)[0]));
        }
        (SweepAxis::Learner, GridValue::Name(name)) => {
            cfg.learner = AlgorithmSpec::by_name(name).expect("validated learner name");
        }
        _ => unreachable!("axis/value pairing checked during validation"),
    }
    cfg
}

/// Run one audit per grid value. Cells run concurrently, each on its own
/// value-derived seed; a failing cell records its error and the sweep
/// continues. Cells come back in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let cells: Vec<SweepCell> = spec
        .grid
        .par_iter()
        .map(|value| {
            let cfg = derive_cell_config(spec, value);
            match run_audit(&cfg) {
                Ok(report) => SweepCell {
                    label: value.label(),
                    value: value.numeric(),
                    summary: Some(summarize(&report)),
                    error: None,
                    report: Some(report),
                },
                Err(e) => SweepCell {
                    label: value.label(),
                    value: value.numeric(),
                    summary: None,
                    error: Some(e.to_string()),
                    report: None,
                },
            }
        })
        .collect();
    Ok(SweepOutcome {
        axis: spec.axis,
        cells,
    })
}

/// Ordinary least squares of shifted mean score against the numeric axis
/// value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fit a line through the successful numeric cells of a sweep table. Needs
/// at least three of them, at more than one distinct axis value.
pub fn linearity_check(cells: &[SweepCell]) -> Result<LinearFit> {
    let points: Vec<(f64, f64)> = cells
        .iter()
        .filter_map(|c| match (c.value, &c.summary) {
            (Some(x), Some(row)) => Some((x, row.shifted_mean)),
            _ => None,
        })
        .collect();
    if points.len() < 3 {
        return Err(Error::DegenerateGrid(format!(
            "need at least 3 successful numeric cells, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let x_bar = points.iter().map(|p| p.0).sum::<f64>() / n;
    let y_bar = points.iter().map(|p| p.1).sum::<f64>() / n;
    let s_xx: f64 = points.iter().map(|p| (p.0 - x_bar).powi(2)).sum();
    if s_xx == 0.0 {
        return Err(Error::DegenerateGrid(
            "all grid values are identical".to_string(),
        ));
    }
    let ss_tot: f64 = points.iter().map(|p| (p.1 - y_bar).powi(2)).sum();
    // A constant response, up to mean-rounding noise, is the flat line:
    // a 0/0 coefficient of determination counts as a perfect fit.
    let y_scale: f64 = points.iter().map(|p| p.1 * p.1).sum();
    if ss_tot <= y_scale * 1e-24 {
        return Ok(LinearFit {
            slope: 0.0,
            intercept: y_bar,
            r_squared: 1.0,
        });
    }
    let s_xy: f64 = points
        .iter()
        .map(|p| (p.0 - x_bar) * (p.1 - y_bar))
        .sum();
    let slope = s_xy / s_xx;
    let intercept = y_bar - slope * x_bar;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (slope * p.0 + intercept)).powi(2))
        .sum();
    Ok(LinearFit {
        slope,
        intercept,
        r_squared: 1.0 - ss_res / ss_tot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::Statistic;
    use crate::data::{Dataset, Example, PartitionPlan, TaskKind};
    use crate::dist::{gauss1d_normative, gauss1d_underrep, BlobsSpec, UnderrepSpec};
    use crate::learners::DtParams;

    fn base_cfg(seed: u64) -> AuditConfig {
        AuditConfig {
            statistic: Statistic::OverallAccuracy,
            learner: AlgorithmSpec::Dt(DtParams { max_depth: 30 }),
            partition: PartitionPlan {
                fractions: [0.2; 5],
                stratify: true,
                seed: 0,
            },
            normative: DistSpec::Blobs(BlobsSpec {
                center0: vec![-2.0, 0.0],
                center1: vec![2.0, 0.0],
                sigma: 0.5,
            }),
            alternative: DistSpec::Blobs(BlobsSpec {
                center0: vec![60.0, 50.0],
                center1: vec![50.0, 60.0],
                sigma: 0.5,
            }),
            n_total: 500,
            n_control_runs: 10,
            n_shifted_runs: 10,
            percentile: 0.9,
            n_q: 20,
            n_s: 1,
            audited_train_size: None,
            seed,
        }
    }

    fn alpha_spec(grid: &[f64], seed: u64) -> SweepSpec {
        SweepSpec {
            axis: SweepAxis::Alpha,
            grid: grid.iter().map(|&v| GridValue::Number(v)).collect(),
            pool_reserve: None,
            base: base_cfg(seed),
        }
    }

    #[test]
    fn deleting_a_grid_value_leaves_other_cells_bit_identical() {
        let full = run_sweep(&alpha_spec(&[0.0, 0.5, 1.0], 5)).unwrap();
        let pruned = run_sweep(&alpha_spec(&[0.0, 1.0], 5)).unwrap();
        let json = |c: &SweepCell| serde_json::to_string(c).unwrap();
        assert_eq!(json(&full.cells[0]), json(&pruned.cells[0]));
        assert_eq!(json(&full.cells[2]), json(&pruned.cells[1]));
    }

    #[test]
    fn summary_means_match_raw_scores_exactly() {
        let outcome = run_sweep(&alpha_spec(&[0.0], 7)).unwrap();
        let cell = &outcome.cells[0];
        let report = cell.report.as_ref().unwrap();
        let summary = cell.summary.as_ref().unwrap();
        assert_eq!(
            summary.control_mean,
            report.control_scores.iter().sum::<f64>() / report.control_scores.len() as f64
        );
        assert_eq!(
            summary.shifted_mean,
            report.shifted_scores.iter().sum::<f64>() / report.shifted_scores.len() as f64
        );
        assert_eq!(summary.auc_roc, report.auc_roc);
        assert_eq!(summary.tpr_at_percentile, report.tpr_at_percentile);
    }

    #[test]
    fn alpha_one_erases_the_shift_and_alpha_zero_does_not() {
        let outcome = run_sweep(&alpha_spec(&[0.0, 1.0], 9)).unwrap();
        let row = |i: usize| outcome.cells[i].summary.as_ref().unwrap();
        // At alpha 1 the alternative collapses to the declared
        // distribution, so the AUC hovers at chance; at alpha 0 the
        // disjoint-support shift is caught almost surely.
        assert!((row(1).auc_roc - 0.5).abs() < 0.35, "auc {}", row(1).auc_roc);
        assert!(row(0).auc_roc >= 0.95, "auc {}", row(0).auc_roc);
        assert!(row(0).shifted_mean > row(1).shifted_mean + 0.2);
    }

    #[test]
    fn failed_cells_record_their_error_and_spare_the_rest() {
        // A 30-row pool cannot train the audited model at alpha 0 (the
        // whole training set must come from the pool) but suffices at
        // alpha 0.9.
        let rows: Vec<Example> = (0..30)
            .map(|i| Example {
                features: vec![i as f64, -(i as f64)],
                label: (i % 2) as f64,
                group: 0,
            })
            .collect();
        let pool = DistSpec::Pool(PoolSpec {
            name: "tiny".to_string(),
            data: Arc::new(Dataset::new(rows, 2, TaskKind::Classification).unwrap()),
        });
        let mut spec = alpha_spec(&[0.9, 0.0], 11);
        spec.base.alternative = pool;
        let outcome = run_sweep(&spec).unwrap();
        assert!(outcome.cells[0].error.is_none(), "{:?}", outcome.cells[0].error);
        assert!(outcome.cells[0].summary.is_some());
        let err = outcome.cells[1].error.as_ref().unwrap();
        assert!(err.contains("exhausted"), "unexpected error: {err}");
        assert!(outcome.cells[1].summary.is_none());
        assert_eq!(outcome.cells.len(), 2);
    }

    #[test]
    fn pool_reserve_restricts_the_shift_component() {
        // Reserving 40 of 400 rows leaves too few for the audited model
        // at alpha 0; without the reserve the same sweep succeeds.
        let rows: Vec<Example> = (0..400)
            .map(|i| Example {
                features: vec![i as f64, (i % 7) as f64],
                label: (i % 2) as f64,
                group: 0,
            })
            .collect();
        let pool = DistSpec::Pool(PoolSpec {
            name: "medium".to_string(),
            data: Arc::new(Dataset::new(rows, 2, TaskKind::Classification).unwrap()),
        });
        let mut spec = alpha_spec(&[0.0], 13);
        spec.base.alternative = pool;
        let unreserved = run_sweep(&spec).unwrap();
        assert!(unreserved.cells[0].error.is_none());

        spec.pool_reserve = Some(40);
        let reserved = run_sweep(&spec).unwrap();
        let err = reserved.cells[0].error.as_ref().unwrap();
        assert!(err.contains("exhausted"), "unexpected error: {err}");
    }

    #[test]
    fn data_fraction_cells_shrink_the_audit_but_not_the_audited_model() {
        let mut spec = alpha_spec(&[], 15);
        spec.axis = SweepAxis::DataFraction;
        spec.grid = vec![GridValue::Number(0.5)];
        let cfg = derive_cell_config(&spec, &spec.grid[0]);
        assert_eq!(cfg.n_total, 250);
        // The audited model keeps the base allotment: 20% of 500.
        assert_eq!(cfg.audited_train_size, Some(100));
    }

    #[test]
    fn beta_cells_rewrite_the_underrepresentation_weight() {
        let mut spec = alpha_spec(&[], 17);
        spec.axis = SweepAxis::Beta;
        spec.grid = vec![GridValue::Number(0.75)];
        spec.base.normative = gauss1d_normative(2.0);
        spec.base.alternative = gauss1d_underrep(2.0, 1.0);
        spec.validate().unwrap();
        let cfg = derive_cell_config(&spec, &spec.grid[0]);
        match cfg.alternative {
            DistSpec::Underrep(UnderrepSpec { beta, .. }) => assert_eq!(beta, 0.75),
            other => panic!("expected underrep alternative, got {other:?}"),
        }
    }

    #[test]
    fn learner_cells_swap_the_algorithm_with_default_params() {
        let mut spec = alpha_spec(&[], 19);
        spec.axis = SweepAxis::Learner;
        spec.grid = vec![GridValue::Name("logit".to_string())];
        spec.validate().unwrap();
        let cfg = derive_cell_config(&spec, &spec.grid[0]);
        assert!(matches!(cfg.learner, AlgorithmSpec::Logit(_)));
    }

    #[test]
    fn validation_rejects_bad_grids() {
        assert!(run_sweep(&alpha_spec(&[], 1)).is_err());
        assert!(run_sweep(&alpha_spec(&[1.5], 1)).is_err());

        let mut spec = alpha_spec(&[0.5], 1);
        spec.axis = SweepAxis::Beta;
        spec.grid = vec![GridValue::Number(0.3)];
        assert!(run_sweep(&spec).is_err());

        let mut spec = alpha_spec(&[0.5], 1);
        spec.axis = SweepAxis::Beta;
        spec.grid = vec![GridValue::Number(0.75)];
        // Beta sweeps demand an underrepresentation alternative.
        assert!(matches!(spec.validate(), Err(Error::InvalidConfig(_))));

        let mut spec = alpha_spec(&[0.5], 1);
        spec.axis = SweepAxis::Learner;
        spec.grid = vec![GridValue::Name("svm".to_string())];
        assert!(matches!(
            spec.validate(),
            Err(Error::UnsupportedAlgorithm(_))
        ));

        let mut spec = alpha_spec(&[0.5], 1);
        spec.axis = SweepAxis::DataFraction;
        spec.grid = vec![GridValue::Number(0.0)];
        assert!(spec.validate().is_err());

        let mut spec = alpha_spec(&[0.5], 1);
        spec.pool_reserve = Some(10);
        // Reserve without a pool-backed alternative component.
        assert!(spec.validate().is_err());

        let mut spec = alpha_spec(&[0.5], 1);
        spec.axis = SweepAxis::Beta;
        spec.base.normative = gauss1d_normative(2.0);
        spec.base.alternative = gauss1d_underrep(2.0, 1.0);
        spec.grid = vec![GridValue::Number(0.75)];
        spec.pool_reserve = Some(10);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn linearity_check_oracles() {
        let cell = |x: f64, y: f64| SweepCell {
            label: format!("{x}"),
            value: Some(x),
            summary: Some(SweepRow {
                control_mean: 0.5,
                control_sd: 0.0,
                shifted_mean: y,
                shifted_sd: 0.0,
                auc_roc: 0.5,
                tpr_at_percentile: 0.0,
            }),
            error: None,
            report: None,
        };

        // Exactly collinear: y = 2x + 1.
        let fit = linearity_check(&[cell(0.0, 1.0), cell(1.0, 3.0), cell(2.0, 5.0)]).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);

        // Constant response: slope 0, perfect fit by convention.
        let fit = linearity_check(&[cell(0.0, 0.7), cell(1.0, 0.7), cell(2.0, 0.7)]).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.r_squared, 1.0);

        // Too few points.
        assert!(matches!(
            linearity_check(&[cell(0.0, 1.0), cell(1.0, 2.0)]),
            Err(Error::DegenerateGrid(_))
        ));

        // Failed cells don't count as points.
        let mut broken = cell(1.0, 2.0);
        broken.summary = None;
        broken.error = Some("boom".to_string());
        assert!(matches!(
            linearity_check(&[cell(0.0, 1.0), broken, cell(2.0, 5.0)]),
            Err(Error::DegenerateGrid(_))
        ));

        // Degenerate x.
        assert!(matches!(
            linearity_check(&[cell(1.0, 1.0), cell(1.0, 2.0), cell(1.0, 3.0)]),
            Err(Error::DegenerateGrid(_))
        ));

        // Noisy but correlated data keeps r_squared in (0, 1).
        let fit =
            linearity_check(&[cell(0.0, 1.05), cell(1.0, 2.9), cell(2.0, 5.1), cell(3.0, 6.9)])
                .unwrap();
        assert!(fit.r_squared > 0.9 && fit.r_squared < 1.0);
        assert!(fit.slope > 0.0);
    }
}
