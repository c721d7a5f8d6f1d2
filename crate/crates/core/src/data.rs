//! Tabular datasets, partition plans and stratified splitting.
//!
//! A `Dataset` is a flat list of examples with a fixed feature
//! dimensionality and a task kind. Group membership rides along as metadata:
//! it is never part of the feature vector, so models cannot condition on it
//! directly.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Classification,
    Regression,
}

/// One labeled example. For classification the label is 0.0 or 1.0; the
/// group tag is 0 or 1 and marks protected-group membership.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub features: Vec<f64>,
    pub label: f64,
    pub group: u8,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    examples: Vec<Example>,
    dim: usize,
    task: TaskKind,
}

impl Dataset {
    /// Build a dataset, validating the shared invariants: consistent
    /// dimensionality, finite features, binary labels for classification,
    /// binary group tags.
    pub fn new(examples: Vec<Example>, dim: usize, task: TaskKind) -> Result<Self> {
        for ex in &examples {
            if ex.features.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: ex.features.len(),
                });
            }
            if ex.features.iter().any(|v| !v.is_finite()) || !ex.label.is_finite() {
                return Err(Error::InvalidConfig(
                    "non-finite value in example".to_string(),
                ));
            }
            if task == TaskKind::Classification && ex.label != 0.0 && ex.label != 1.0 {
                return Err(Error::InvalidConfig(format!(
                    "classification label must be 0 or 1, got {}",
                    ex.label
                )));
            }
            if ex.group > 1 {
                return Err(Error::InvalidConfig(format!(
                    "group tag must be 0 or 1, got {}",
                    ex.group
                )));
            }
        }
        Ok(Dataset {
            examples,
            dim,
            task,
        })
    }

    /// Empty dataset with the given shape.
    pub fn empty(dim: usize, task: TaskKind) -> Self {
        Dataset {
            examples: Vec::new(),
            dim,
            task,
        }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Example> {
        self.examples.iter()
    }

    /// Copy of the examples at `indices`, in order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            examples: indices.iter().map(|&i| self.examples[i].clone()).collect(),
            dim: self.dim,
            task: self.task,
        }
    }

    /// Indices of examples in the given group.
    pub fn group_indices(&self, group: u8) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.examples[i].group == group)
            .collect()
    }

    /// Number of examples carrying the given classification label.
    pub fn count_label(&self, label: f64) -> usize {
        self.examples.iter().filter(|e| e.label == label).count()
    }

    /// Distinct label values, ascending. For classification this is a
    /// subset of {0.0, 1.0}.
    pub fn distinct_labels(&self) -> Vec<f64> {
        let mut labels: Vec<f64> = Vec::new();
        for ex in &self.examples {
            if !labels.contains(&ex.label) {
                labels.push(ex.label);
            }
        }
        labels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        labels
    }
}

/// Role names for the five audit partitions, in plan order.
pub const PARTITION_ROLES: [&str; 5] = [
    "target_train",
    "shadow_train",
    "attack_train",
    "model_test",
    "attack_test",
];

/// How to carve one sample into the five audit partitions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionPlan {
    /// Fractions for target-train, shadow-train, attack-train, model-test,
    /// attack-test; must be in [0, 1] and sum to 1 (within 1e-9). A zero
    /// fraction deliberately produces an empty partition.
    pub fractions: [f64; 5],
    /// Preserve the label distribution in every partition (classification
    /// only; regression data is split as a single stratum).
    pub stratify: bool,
    pub seed: u64,
}

impl PartitionPlan {
    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.fractions.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "partition fractions sum to {sum}, expected 1"
            )));
        }
        if self.fractions.iter().any(|&f| !(0.0..=1.0).contains(&f)) {
            return Err(Error::InvalidConfig(
                "partition fractions must lie in [0, 1]".to_string(),
            ));
        }
        Ok(())
    }

    /// Partition sizes this plan assigns to n examples, in
    /// [`PARTITION_ROLES`] order.
    pub fn counts(&self, n: usize) -> [usize; 5] {
        apportion(n, &self.fractions)
    }
}

/// The five partitions produced by [`stratified_split`].
#[derive(Debug, Clone)]
pub struct FiveWaySplit {
    pub target_train: Dataset,
    pub shadow_train: Dataset,
    pub attack_train: Dataset,
    pub model_test: Dataset,
    pub attack_test: Dataset,
}

impl FiveWaySplit {
    pub fn as_array(&self) -> [&Dataset; 5] {
        [
            &self.target_train,
            &self.shadow_train,
            &self.attack_train,
            &self.model_test,
            &self.attack_test,
        ]
    }
}

/// Largest-remainder apportionment of `n` items across the plan fractions.
/// Totals are exact; every count differs from its ideal share by at most 1.
/// Remainder ties go to the lower partition index so the result is
/// deterministic.
fn apportion(n: usize, fractions: &[f64; 5]) -> [usize; 5] {
    let mut counts = [0usize; 5];
    let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(5);
    let mut assigned = 0usize;
    for (i, &f) in fractions.iter().enumerate() {
        let ideal = f * n as f64;
        let base = ideal.floor() as usize;
        counts[i] = base;
        assigned += base;
        remainders.push((i, ideal - base as f64));
    }
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    for k in 0..(n - assigned) {
        counts[remainders[k].0] += 1;
    }
    counts
}

/// Split a dataset into the five audit partitions.
///
/// Classification data is stratified by label when the plan asks for it:
/// apportionment runs independently within each class, so per-partition
/// class counts differ from the ideal share by at most one example.
/// The partitions are disjoint and jointly cover the input. Deterministic
/// given the plan seed.
pub fn stratified_split(data: &Dataset, plan: &PartitionPlan) -> Result<FiveWaySplit> {
    plan.validate()?;
    let nonzero = plan.fractions.iter().filter(|&&f| f > 0.0).count();

    // Strata: per-class index lists, or everything at once.
    let strata: Vec<Vec<usize>> = if plan.stratify && data.task() == TaskKind::Classification {
        let labels = data.distinct_labels();
        labels
            .iter()
            .map(|&l| {
                (0..data.len())
                    .filter(|&i| data.examples()[i].label == l)
                    .collect()
            })
            .collect()
    } else {
        vec![(0..data.len()).collect()]
    };

    if plan.stratify && data.task() == TaskKind::Classification {
        for (stratum, indices) in strata.iter().enumerate() {
            if indices.len() < nonzero {
                return Err(Error::StratumTooSmall {
                    label: data.distinct_labels()[stratum] as i64,
                    count: indices.len(),
                    partitions: nonzero,
                });
            }
        }
    }

    let mut parts: Vec<Vec<usize>> = vec![Vec::new(); 5];
    for (stratum_idx, indices) in strata.iter().enumerate() {
        let mut shuffled = indices.clone();
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed::derive(plan.seed, "split-stratum", stratum_idx as u64));
        shuffled.shuffle(&mut rng);
        let counts = apportion(shuffled.len(), &plan.fractions);
        let mut cursor = 0usize;
        for (p, &c) in counts.iter().enumerate() {
            parts[p].extend_from_slice(&shuffled[cursor..cursor + c]);
            cursor += c;
        }
    }

    for (p, part) in parts.iter().enumerate() {
        if plan.fractions[p] > 0.0 && part.is_empty() {
            return Err(Error::EmptyPartition {
                role: PARTITION_ROLES[p],
                fraction: plan.fractions[p],
            });
        }
    }

    let mut sets = parts.into_iter().map(|idx| data.select(&idx));
    Ok(FiveWaySplit {
        target_train: sets.next().unwrap(),
        shadow_train: sets.next().unwrap(),
        attack_train: sets.next().unwrap(),
        model_test: sets.next().unwrap(),
        attack_test: sets.next().unwrap(),
    })
}

/// Column roles for CSV ingestion. Every column that is neither the label
/// nor the group column is read as a feature, in header order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CsvSchema {
    pub label_col: String,
    /// Column holding the 0/1 group tag. When absent every example gets
    /// group 0.
    pub group_col: Option<String>,
    pub task: TaskKind,
}

/// Load a dataset from a headered, comma-separated, UTF-8 CSV file.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();

    let label_idx = headers
        .iter()
        .position(|h| *h == schema.label_col)
        .ok_or_else(|| Error::SchemaMismatch(format!("label column `{}` not found", schema.label_col)))?;
    let group_idx = match &schema.group_col {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::SchemaMismatch(format!("group column `{name}` not found")))?,
        ),
        None => None,
    };
    let feature_idx: Vec<usize> = (0..headers.len())
        .filter(|&i| i != label_idx && Some(i) != group_idx)
        .collect();
    if feature_idx.is_empty() {
        return Err(Error::SchemaMismatch("no feature columns".to_string()));
    }

    let parse_cell = |row: usize, col: usize, value: &str| -> Result<f64> {
        value.trim().parse::<f64>().map_err(|_| Error::Parse {
            row,
            col: headers[col].clone(),
            value: value.to_string(),
        })
    };

    let mut examples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1; // 1-based data row, header not counted
        if record.len() != headers.len() {
            return Err(Error::SchemaMismatch(format!(
                "row {row} has {} fields, header has {}",
                record.len(),
                headers.len()
            )));
        }
        let mut features = Vec::with_capacity(feature_idx.len());
        for &f in &feature_idx {
            features.push(parse_cell(row, f, &record[f])?);
        }
        let label = parse_cell(row, label_idx, &record[label_idx])?;
        if schema.task == TaskKind::Classification && label != 0.0 && label != 1.0 {
            return Err(Error::Parse {
                row,
                col: headers[label_idx].clone(),
                value: record[label_idx].to_string(),
            });
        }
        let group = match group_idx {
            Some(g) => {
                let v = parse_cell(row, g, &record[g])?;
                if v != 0.0 && v != 1.0 {
                    return Err(Error::Parse {
                        row,
                        col: headers[g].clone(),
                        value: record[g].to_string(),
                    });
                }
                v as u8
            }
            None => 0,
        };
        examples.push(Example {
            features,
            label,
            group,
        });
    }
    if examples.is_empty() {
        return Err(Error::SchemaMismatch("no data rows".to_string()));
    }
    Dataset::new(examples, feature_idx.len(), schema.task)
}
