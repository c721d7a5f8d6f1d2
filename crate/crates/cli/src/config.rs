//! Experiment configuration files.
//!
//! A config is a TOML document with one table per concern: `[audit]` for
//! the experiment shape, `[learner]` for the algorithm, `[partition]` for
//! the five-way split, `[normative]` / `[alternative]` for the two
//! distributions, and optionally `[sweep]` and `[output]`. Distribution
//! tables nest: a `kind` key picks the family and combinator tables hold
//! their components as sub-tables. Pool paths are resolved relative to the
//! config file so a config directory can be moved as a unit.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use shift_audit::audit::{AuditConfig, Statistic};
use shift_audit::data::{load_csv, CsvSchema, PartitionPlan, TaskKind};
use shift_audit::dist::{
    BlobsSpec, DistSpec, Gauss1dSpec, MixtureSpec, PoolSpec, UnderrepSpec,
};
use shift_audit::learners::AlgorithmSpec;
use shift_audit::sweeps::{GridValue, SweepAxis, SweepSpec};

/// Errors surfaced while reading or lowering a config file. Everything in
/// here is the operator's to fix, so the CLI maps it to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    audit: AuditSection,
    learner: AlgorithmSpec,
    partition: PartitionSection,
    normative: DistFile,
    alternative: DistFile,
    sweep: Option<SweepSection>,
    #[serde(default)]
    output: OutputSection,
}

/// `[audit]` — the experiment shape.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AuditSection {
    /// Score each run produces: `overall_accuracy` or `inter_group_gap`.
    statistic: Statistic,
    /// Examples drawn per run and split five ways.
    n_total: usize,
    /// Calibration runs with no shift.
    n_control_runs: usize,
    /// Evaluation runs against the alternative distribution.
    n_shifted_runs: usize,
    /// Control-score quantile that sets the decision threshold.
    #[serde(default = "default_percentile")]
    percentile: f64,
    /// Query-bundle size.
    n_q: usize,
    /// Shadow models per side of the attack.
    #[serde(default = "default_n_s")]
    n_s: usize,
    /// Pin the audited model's training-set size; defaults to the size the
    /// partition plan hands the target.
    audited_train_size: Option<usize>,
    /// Master seed; every stream in a run derives from it.
    seed: u64,
    /// Worker cap; the `--workers` flag takes precedence.
    workers: Option<usize>,
}

fn default_percentile() -> f64 {
    0.9
}

fn default_n_s() -> usize {
    1
}

/// `[partition]` — the five-way split of each run's sample.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartitionSection {
    /// Shares for target-train, shadow-train, attack-train, model-test and
    /// attack-test, in that order; must sum to 1.
    fractions: [f64; 5],
    /// Split within each class so label balance carries into every part.
    #[serde(default = "default_stratify")]
    stratify: bool,
}

fn default_stratify() -> bool {
    true
}

/// `[normative]` / `[alternative]` — distribution description as written in
/// the file, discriminated by a `kind` key. Mirrors `DistSpec` except that
/// pools are named by path and loaded during lowering.
#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum DistFile {
    /// 1-D two-group Gaussian classification family.
    Gauss1d(Gauss1dFile),
    /// d-dimensional two-class Gaussian blobs, all in group 0.
    Blobs {
        /// Feature mean of class 0.
        center0: Vec<f64>,
        /// Feature mean of class 1.
        center1: Vec<f64>,
        /// Isotropic standard deviation shared by both classes.
        sigma: f64,
    },
    /// Draw from `base` with probability `alpha`, else from `alt`.
    Mixture {
        /// Weight of the base component in [0, 1].
        alpha: f64,
        base: Box<DistFile>,
        alt: Box<DistFile>,
    },
    /// Group-marginal shift: draw from `group0` with probability `beta`,
    /// else from `group1`. The components carry the group labels themselves
    /// (e.g. `gauss1d` with `group_mix` 0 or 1).
    Underrep {
        /// Weight of the `group0` component in [0, 1]; 0.5 is the balanced
        /// mix, 1 removes the other component entirely.
        beta: f64,
        group0: Box<DistFile>,
        group1: Box<DistFile>,
    },
    /// Finite CSV-backed pool, drawn without replacement.
    Pool {
        /// CSV path, resolved relative to the config file.
        path: PathBuf,
        /// Column holding the label.
        label_col: String,
        /// Column holding the group (0/1); all group 0 when absent.
        group_col: Option<String>,
        /// `classification` or `regression`.
        task: TaskKind,
    },
}

/// `kind = "gauss1d"` knobs; every field is optional and defaults to the
/// balanced baseline (tau 0, group_mix 0.5, unit sigmas, no noise).
#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Gauss1dFile {
    /// Group-1 feature offset: group-0 class means sit at -1/+1, group-1 at
    /// -1 + tau / 1 + tau.
    tau: f64,
    /// Probability an example belongs to group 1.
    group_mix: f64,
    /// Offset added to both groups' feature means equally.
    mean_shift: f64,
    /// Feature standard deviation of group 0.
    sigma0: f64,
    /// Feature standard deviation of group 1.
    sigma1: f64,
    /// Label-flip probability within group 0.
    flip0: f64,
    /// Label-flip probability within group 1.
    flip1: f64,
}

impl Default for Gauss1dFile {
    fn default() -> Self {
        let d = Gauss1dSpec::default();
        Gauss1dFile {
            tau: d.tau,
            group_mix: d.group_mix,
            mean_shift: d.mean_shift,
            sigma0: d.sigma0,
            sigma1: d.sigma1,
            flip0: d.flip0,
            flip1: d.flip1,
        }
    }
}

/// `[sweep]` — optional parameter grid rerunning the audit per cell.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    /// What the grid varies: `alpha`, `beta`, `learner` or `data_fraction`.
    axis: SweepAxis,
    /// Cell values; numbers for the numeric axes, names for `learner`.
    grid: Vec<GridValue>,
    /// For alpha sweeps over a pool-backed shift component: rows carved off
    /// that pool as a dedicated slice for the audited model, so auditor-side
    /// draws cannot collide with it.
    pool_reserve: Option<usize>,
}

/// `[output]` — optional artifact destination.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    /// Output directory; relative paths hang off the working directory, and
    /// the `--out-dir` flag takes precedence.
    dir: Option<PathBuf>,
}

impl DistFile {
    fn lower(&self, config_dir: &Path) -> Result<DistSpec> {
        Ok(match self {
            DistFile::Gauss1d(g) => DistSpec::Gauss1d(Gauss1dSpec {
                tau: g.tau,
                group_mix: g.group_mix,
                mean_shift: g.mean_shift,
                sigma0: g.sigma0,
                sigma1: g.sigma1,
                flip0: g.flip0,
                flip1: g.flip1,
            }),
            DistFile::Blobs {
                center0,
                center1,
                sigma,
            } => DistSpec::Blobs(BlobsSpec {
                center0: center0.clone(),
                center1: center1.clone(),
                sigma: *sigma,
            }),
            DistFile::Mixture { alpha, base, alt } => DistSpec::Mixture(MixtureSpec {
                alpha: *alpha,
                base: Box::new(base.lower(config_dir)?),
                alt: Box::new(alt.lower(config_dir)?),
            }),
            DistFile::Underrep {
                beta,
                group0,
                group1,
            } => DistSpec::Underrep(UnderrepSpec {
                beta: *beta,
                group0: Box::new(group0.lower(config_dir)?),
                group1: Box::new(group1.lower(config_dir)?),
            }),
            DistFile::Pool {
                path,
                label_col,
                group_col,
                task,
            } => {
                let resolved = if path.is_absolute() {
                    path.clone()
                } else {
                    config_dir.join(path)
                };
                let schema = CsvSchema {
                    label_col: label_col.clone(),
                    group_col: group_col.clone(),
                    task: *task,
                };
                let data = load_csv(&resolved, &schema)
                    .map_err(|e| ConfigError(format!("pool `{}`: {e}", resolved.display())))?;
                DistSpec::Pool(PoolSpec {
                    name: resolved.display().to_string(),
                    data: Arc::new(data),
                })
            }
        })
    }
}

/// A fully lowered experiment: the audit configuration, the optional sweep
/// wrapper, and the CLI-level knobs that live outside the core types.
#[derive(Debug)]
pub struct Experiment {
    pub audit: AuditConfig,
    pub sweep: Option<SweepSpecParts>,
    pub out_dir: PathBuf,
    pub workers: Option<usize>,
}

/// Sweep fields held separately so `audit`'s ownership stays simple; glued
/// into a `SweepSpec` on demand.
#[derive(Debug)]
pub struct SweepSpecParts {
    pub axis: SweepAxis,
    pub grid: Vec<GridValue>,
    pub pool_reserve: Option<usize>,
}

impl Experiment {
    pub fn sweep_spec(&self) -> Option<SweepSpec> {
        self.sweep.as_ref().map(|parts| SweepSpec {
            axis: parts.axis,
            grid: parts.grid.clone(),
            pool_reserve: parts.pool_reserve,
            base: self.audit.clone(),
        })
    }
}

/// Read, parse and lower a config file. `seed_override` is the
/// SHIFT_AUDIT_SEED escape hatch; it replaces the `[audit] seed` value.
pub fn load_experiment(path: &Path, seed_override: Option<u64>) -> Result<Experiment> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return err(format!("cannot read config `{}`: {e}", path.display())),
    };
    let file: FileConfig = match toml::from_str(&text) {
        Ok(f) => f,
        Err(e) => return err(format!("config `{}` is malformed: {e}", path.display())),
    };
    let config_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();

    let audit = AuditConfig {
        statistic: file.audit.statistic,
        learner: file.learner,
        partition: PartitionPlan {
            fractions: file.partition.fractions,
            stratify: file.partition.stratify,
            seed: 0,
        },
        normative: file.normative.lower(&config_dir)?,
        alternative: file.alternative.lower(&config_dir)?,
        n_total: file.audit.n_total,
        n_control_runs: file.audit.n_control_runs,
        n_shifted_runs: file.audit.n_shifted_runs,
        percentile: file.audit.percentile,
        n_q: file.audit.n_q,
        n_s: file.audit.n_s,
        audited_train_size: file.audit.audited_train_size,
        seed: seed_override.unwrap_or(file.audit.seed),
    };
    audit
        .validate()
        .map_err(|e| ConfigError(format!("config `{}` is invalid: {e}", path.display())))?;

    let sweep = file.sweep.map(|s| SweepSpecParts {
        axis: s.axis,
        grid: s.grid,
        pool_reserve: s.pool_reserve,
    });

    let experiment = Experiment {
        audit,
        sweep,
        out_dir: file.output.dir.unwrap_or_else(|| PathBuf::from(".")),
        workers: file.audit.workers,
    };
    if let Some(spec) = experiment.sweep_spec() {
        spec.validate()
            .map_err(|e| ConfigError(format!("config `{}` sweep is invalid: {e}", path.display())))?;
    }
    Ok(experiment)
}

/// Parse SHIFT_AUDIT_SEED from the environment. Present-but-garbled is an
/// operator error, not something to ignore silently.
pub fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var("SHIFT_AUDIT_SEED") {
        Ok(raw) => match raw.trim().parse::<u64>() {
            Ok(v) => Ok(Some(v)),
            Err(_) => err(format!(
                "SHIFT_AUDIT_SEED must be an unsigned integer, got `{raw}`"
            )),
        },
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => err(format!("SHIFT_AUDIT_SEED is unreadable: {e}")),
    }
}
