//! Shadow-training attack: query bundles, the scalar meta-classifier, and
//! attack accuracy measures.
//!
//! The attacker partitions its query budget into disjoint bundles of `n_q`
//! points, runs every bundle through the audited (target) model and
//! through each shadow model it trained itself, and records one scalar
//! feature per (bundle, model) pair: the model's mean performance on the
//! bundle. A logistic regression on that single feature then predicts
//! whether a bundle came from the target or a shadow. Where the audit
//! needs per-group signal, bundles are formed inside each group so that
//! per-group attack accuracy is well defined.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::learners::{performance, TrainedModel};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BundleOrigin {
    Target,
    Shadow,
}

/// One labeled observation for the meta-classifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackBundle {
    /// Mean performance of one model over the bundle's n_q query points.
    pub feature: f64,
    pub origin: BundleOrigin,
    /// Set exactly when every query point in the bundle shares one group.
    pub group: Option<u8>,
}

/// Bundles plus the bundle size they were built with; keeping n_q attached
/// is what lets the meta-classifier enforce n_t = n_q by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleSet {
    pub bundles: Vec<AttackBundle>,
    pub n_q: usize,
}

/// The trained meta-classifier. The logistic fit runs on standardized
/// features (the stored mean/scale), which keeps gradient descent
/// well-conditioned whether the feature is an accuracy in [0,1] or an
/// unbounded squared error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackModel {
    pub weight: f64,
    pub bias: f64,
    pub feat_mean: f64,
    pub feat_scale: f64,
    /// Query points per bundle at attack-test time; always equals the n_q
    /// the model was trained with.
    pub n_t: usize,
}

impl AttackModel {
    pub fn classify(&self, feature: f64) -> BundleOrigin {
        let z = (feature - self.feat_mean) / self.feat_scale;
        if self.weight * z + self.bias > 0.0 {
            BundleOrigin::Target
        } else {
            BundleOrigin::Shadow
        }
    }
}

fn bundle_group(data: &Dataset, indices: &[usize]) -> Option<u8> {
    let first = data.examples()[indices[0]].group;
    indices
        .iter()
        .all(|&i| data.examples()[i].group == first)
        .then_some(first)
}

fn evaluate_chunks(
    target: &TrainedModel,
    shadows: &[TrainedModel],
    data: &Dataset,
    chunks: &[Vec<usize>],
) -> Result<Vec<AttackBundle>> {
    let mut bundles = Vec::with_capacity(chunks.len() * 2 * shadows.len());
    for chunk in chunks {
        let queries = data.select(chunk);
        let group = bundle_group(data, chunk);
        let target_feature = performance(target, &queries)?;
        for shadow in shadows {
            // One target-labeled copy per shadow keeps the classes
            // balanced when more than one shadow model is in play.
            bundles.push(AttackBundle {
                feature: target_feature,
                origin: BundleOrigin::Target,
                group,
            });
            bundles.push(AttackBundle {
                feature: performance(shadow, &queries)?,
                origin: BundleOrigin::Shadow,
                group,
            });
        }
    }
    Ok(bundles)
}

fn shuffled_chunks(n: usize, n_q: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    indices.chunks_exact(n_q).map(|c| c.to_vec()).collect()
}

/// Build the labeled bundle set: disjoint bundles of n_q query points,
/// each scored once per model.
pub fn build_attack_dataset(
    target: &TrainedModel,
    shadows: &[TrainedModel],
    attack_train_data: &Dataset,
    n_q: usize,
    seed: u64,
) -> Result<BundleSet> {
    if n_q == 0 {
        return Err(Error::InvalidConfig("n_q must be at least 1".to_string()));
    }
    if shadows.is_empty() {
        return Err(Error::InvalidConfig(
            "at least one shadow model is required".to_string(),
        ));
    }
    if attack_train_data.len() < 2 * n_q {
        return Err(Error::NotEnoughQueries {
            needed: 2 * n_q,
            n_q,
            got: attack_train_data.len(),
        });
    }
    let chunks = shuffled_chunks(attack_train_data.len(), n_q, seed);
    let bundles = evaluate_chunks(target, shadows, attack_train_data, &chunks)?;
    Ok(BundleSet { bundles, n_q })
}

/// Build group-pure bundles: the data is split by group and each group is
/// bundled separately, so every bundle carries a definite group tag.
pub fn build_group_pure_bundles(
    target: &TrainedModel,
    shadows: &[TrainedModel],
    data: &Dataset,
    n_q: usize,
    seed: u64,
) -> Result<BundleSet> {
    if n_q == 0 {
        return Err(Error::InvalidConfig("n_q must be at least 1".to_string()));
    }
    if shadows.is_empty() {
        return Err(Error::InvalidConfig(
            "at least one shadow model is required".to_string(),
        ));
    }
    let mut bundles = Vec::new();
    for g in [0u8, 1u8] {
        let members = data.group_indices(g);
        if members.is_empty() {
            return Err(Error::MissingGroup(g));
        }
        if members.len() < n_q {
            return Err(Error::NotEnoughQueries {
                needed: n_q,
                n_q,
                got: members.len(),
            });
        }
        let subset = data.select(&members);
        let chunks = shuffled_chunks(subset.len(), n_q, seed::derive(seed, "group-bundles", g as u64));
        bundles.extend(evaluate_chunks(target, shadows, &subset, &chunks)?);
    }
    Ok(BundleSet { bundles, n_q })
}

/// How the meta-classifier's decision direction is chosen.
///
/// `Free` lets the logistic fit pick the direction from the bundle data.
/// That is the right mode when the audit watches overall performance: any
/// shift that matters moves the target's bundles bodily away from the
/// shadows' and the sign identifies itself.
///
/// The pinned modes fix the direction a priori and fit only the decision
/// threshold. They encode the idealized attack's rule — the model that
/// performs better on a bundle is more likely its owner — with the sign
/// expressed in feature units (`FeatureHigh` when the feature is a reward
/// such as accuracy, `FeatureLow` when it is a loss such as squared
/// error). The inter-group gap is defined relative to this orientation:
/// it asks on which group the target looks more like an overfit owner of
/// the data. A free fit would make the gap's sign an artifact of sampling
/// noise whenever the two groups pull the direction opposite ways with
/// near-equal strength, which is precisely the regime an
/// underrepresentation shift creates on a group-balanced population.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetaOrientation {
    Free,
    FeatureHigh,
    FeatureLow,
}

const META_L2: f64 = 1e-6;
const META_TOL: f64 = 1e-8;
const META_MAX_ITERS: usize = 10_000;

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Fit the scalar logistic meta-classifier by gradient descent with
/// backtracking, run to gradient tolerance 1e-8 (the loss is strictly
/// convex, so the optimum is unique; on separable bundle sets the descent
/// may stop at the iteration cap instead, with the decision boundary long
/// settled).
pub fn train_attack(set: &BundleSet) -> Result<AttackModel> {
    train_attack_with(set, MetaOrientation::Free)
}

/// Fit the meta-classifier under an explicit orientation. Pinned
/// orientations freeze the weight at ±1 on the standardized feature and
/// descend on the threshold alone; the loss stays convex either way.
pub fn train_attack_with(set: &BundleSet, orientation: MetaOrientation) -> Result<AttackModel> {
    let targets_present = set.bundles.iter().any(|b| b.origin == BundleOrigin::Target);
    let shadows_present = set.bundles.iter().any(|b| b.origin == BundleOrigin::Shadow);
    if !targets_present || !shadows_present {
        return Err(Error::SingleClass);
    }
    let n = set.bundles.len() as f64;
    let feat_mean = set.bundles.iter().map(|b| b.feature).sum::<f64>() / n;
    let var = set
        .bundles
        .iter()
        .map(|b| (b.feature - feat_mean).powi(2))
        .sum::<f64>()
        / n;
    let feat_scale = if var > 0.0 { var.sqrt() } else { 1.0 };
    let points: Vec<(f64, f64)> = set
        .bundles
        .iter()
        .map(|b| {
            (
                (b.feature - feat_mean) / feat_scale,
                (b.origin == BundleOrigin::Target) as u8 as f64,
            )
        })
        .collect();

    let loss = |w: f64, b: f64| -> f64 {
        let data: f64 = points
            .iter()
            .map(|&(z, y)| {
                let m = w * z + b;
                let log1p_exp = if m > 0.0 {
                    m + (-m).exp().ln_1p()
                } else {
                    m.exp().ln_1p()
                };
                log1p_exp - y * m
            })
            .sum::<f64>()
            / n;
        data + 0.5 * META_L2 * w * w
    };
    let grad = |w: f64, b: f64| -> (f64, f64) {
        let (mut gw, mut gb) = (0.0, 0.0);
        for &(z, y) in &points {
            let r = sigmoid(w * z + b) - y;
            gw += r * z;
            gb += r;
        }
        (gw / n + META_L2 * w, gb / n)
    };

    let (mut w, mut b) = match orientation {
        MetaOrientation::Free => (0.0f64, 0.0f64),
        MetaOrientation::FeatureHigh => (1.0f64, 0.0f64),
        MetaOrientation::FeatureLow => (-1.0f64, 0.0f64),
    };
    let mut current = loss(w, b);
    let mut step = 1.0f64;
    for _ in 0..META_MAX_ITERS {
        let (mut gw, gb) = grad(w, b);
        if orientation != MetaOrientation::Free {
            gw = 0.0;
        }
        if gw.abs().max(gb.abs()) < META_TOL {
            break;
        }
        let sq = gw * gw + gb * gb;
        step = (step * 2.0).min(1e4);
        let mut accepted = false;
        while step > 1e-18 {
            let (cw, cb) = (w - step * gw, b - step * gb);
            let cand = loss(cw, cb);
            if cand <= current - 1e-4 * step * sq {
                w = cw;
                b = cb;
                current = cand;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(AttackModel {
        weight: w,
        bias: b,
        feat_mean,
        feat_scale,
        n_t: set.n_q,
    })
}

fn balanced_accuracy<'a>(
    model: &AttackModel,
    bundles: impl Iterator<Item = &'a AttackBundle>,
) -> Result<f64> {
    let (mut target_hits, mut target_total) = (0usize, 0usize);
    let (mut shadow_hits, mut shadow_total) = (0usize, 0usize);
    for b in bundles {
        let correct = model.classify(b.feature) == b.origin;
        match b.origin {
            BundleOrigin::Target => {
                target_total += 1;
                target_hits += correct as usize;
            }
            BundleOrigin::Shadow => {
                shadow_total += 1;
                shadow_hits += correct as usize;
            }
        }
    }
    if target_total == 0 || shadow_total == 0 {
        return Err(Error::SingleClass);
    }
    Ok(0.5 * (target_hits as f64 / target_total as f64)
        + 0.5 * (shadow_hits as f64 / shadow_total as f64))
}

/// Balanced attack accuracy on held-out bundles: the mean of per-origin
/// accuracies, immune to bundle-count imbalance.
pub fn attack_accuracy(model: &AttackModel, test: &BundleSet) -> Result<f64> {
    if test.n_q != model.n_t {
        return Err(Error::InvalidConfig(format!(
            "bundle size {} does not match the attack model's n_t {}",
            test.n_q, model.n_t
        )));
    }
    balanced_accuracy(model, test.bundles.iter())
}

/// Attack accuracy on group-0 bundles minus accuracy on group-1 bundles.
pub fn inter_group_attack_gap(model: &AttackModel, test: &BundleSet) -> Result<f64> {
    if test.n_q != model.n_t {
        return Err(Error::InvalidConfig(format!(
            "bundle size {} does not match the attack model's n_t {}",
            test.n_q, model.n_t
        )));
    }
    if test.bundles.iter().any(|b| b.group.is_none()) {
        return Err(Error::InvalidConfig(
            "inter-group gap needs group-pure bundles".to_string(),
        ));
    }
    let mut per_group = [None, None];
    for g in [0u8, 1u8] {
        let members = test.bundles.iter().filter(|b| b.group == Some(g));
        if test.bundles.iter().all(|b| b.group != Some(g)) {
            return Err(Error::MissingGroup(g));
        }
        per_group[g as usize] = Some(balanced_accuracy(model, members)?);
    }
    Ok(per_group[0].unwrap() - per_group[1].unwrap())
}
