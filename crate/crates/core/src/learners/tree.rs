//! Shared CART engine behind the decision-tree, random-forest and boosted
//! learners.
//!
//! Splits always take the form `x[feature] <= threshold` where the
//! threshold is an actual training value. Because thresholds are data
//! values rather than midpoints, any strictly increasing rescaling applied
//! to both training and probe data routes every point identically, making
//! tree predictions exactly invariant under monotone feature rescaling.
//! Ties between equally good splits resolve to the lowest feature index,
//! then the lowest threshold, so growth is deterministic.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// Binary Gini impurity; targets must be 0/1. Leaves hold the majority
    /// label (ties go to 0).
    Gini,
    /// Variance; leaves hold the mean target.
    Mse,
}

#[derive(Debug, Clone)]
pub struct TreeParams {
    pub max_depth: usize,
    /// Number of candidate features drawn fresh at every split; `None`
    /// considers all features.
    pub feature_subsample: Option<usize>,
    pub min_samples_split: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
    root: usize,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(x)] {
            Node::Leaf { value } => value,
            Node::Split { .. } => unreachable!(),
        }
    }

    /// Index of the leaf node that `x` routes to.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut at = self.root;
        loop {
            match self.nodes[at] {
                Node::Leaf { .. } => return at,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    /// Overwrite a leaf's value (used by boosting to install Newton steps).
    pub fn set_leaf_value(&mut self, leaf: usize, value: f64) {
        match &mut self.nodes[leaf] {
            Node::Leaf { value: v } => *v = value,
            Node::Split { .. } => panic!("node {leaf} is not a leaf"),
        }
    }

    #[allow(dead_code)]
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, self.root)
    }
}

struct Grower<'a> {
    rows: &'a [&'a [f64]],
    targets: &'a [f64],
    dim: usize,
    criterion: Criterion,
    params: &'a TreeParams,
    nodes: Vec<Node>,
}

/// Grow a tree on the given rows. `rng` supplies the per-split feature
/// subsample and is required exactly when `feature_subsample` is set.
pub fn grow(
    rows: &[&[f64]],
    targets: &[f64],
    dim: usize,
    criterion: Criterion,
    params: &TreeParams,
    mut rng: Option<&mut ChaCha8Rng>,
) -> Tree {
    assert!(!rows.is_empty() && rows.len() == targets.len());
    assert!(params.max_depth >= 1);
    assert!(
        params.feature_subsample.is_none() || rng.is_some(),
        "feature subsampling needs a seeded rng"
    );
    let mut grower = Grower {
        rows,
        targets,
        dim,
        criterion,
        params,
        nodes: Vec::new(),
    };
    let indices: Vec<usize> = (0..rows.len()).collect();
    let root = grower.build(&indices, 0, &mut rng);
    Tree {
        nodes: grower.nodes,
        root,
    }
}

impl<'a> Grower<'a> {
    fn build(&mut self, indices: &[usize], depth: usize, rng: &mut Option<&mut ChaCha8Rng>) -> usize {
        let parent_impurity = self.impurity(indices);
        let stop = depth >= self.params.max_depth
            || indices.len() < self.params.min_samples_split
            || parent_impurity <= 0.0;
        let split = if stop { None } else { self.best_split(indices, rng) };
        match split {
            None => {
                self.nodes.push(Node::Leaf {
                    value: self.leaf_value(indices),
                });
                self.nodes.len() - 1
            }
            Some((feature, threshold)) => {
                let (mut left, mut right) = (Vec::new(), Vec::new());
                for &i in indices {
                    if self.rows[i][feature] <= threshold {
                        left.push(i);
                    } else {
                        right.push(i);
                    }
                }
                let left_id = self.build(&left, depth + 1, rng);
                let right_id = self.build(&right, depth + 1, rng);
                self.nodes.push(Node::Split {
                    feature,
                    threshold,
                    left: left_id,
                    right: right_id,
                });
                self.nodes.len() - 1
            }
        }
    }

    fn impurity(&self, indices: &[usize]) -> f64 {
        let n = indices.len() as f64;
        match self.criterion {
            Criterion::Gini => {
                let pos = indices.iter().filter(|&&i| self.targets[i] == 1.0).count() as f64;
                let p = pos / n;
                2.0 * p * (1.0 - p)
            }
            Criterion::Mse => {
                let mean = indices.iter().map(|&i| self.targets[i]).sum::<f64>() / n;
                indices
                    .iter()
                    .map(|&i| (self.targets[i] - mean).powi(2))
                    .sum::<f64>()
                    / n
            }
        }
    }

    fn leaf_value(&self, indices: &[usize]) -> f64 {
        let n = indices.len() as f64;
        match self.criterion {
            Criterion::Gini => {
                let pos = indices.iter().filter(|&&i| self.targets[i] == 1.0).count() as f64;
                if pos > n - pos {
                    1.0
                } else {
                    0.0
                }
            }
            Criterion::Mse => indices.iter().map(|&i| self.targets[i]).sum::<f64>() / n,
        }
    }

    /// Candidate features for one split, in ascending order.
    fn candidate_features(&self, rng: &mut Option<&mut ChaCha8Rng>) -> Vec<usize> {
        match self.params.feature_subsample {
            None => (0..self.dim).collect(),
            Some(k) => {
                let k = k.min(self.dim);
                let rng = rng.as_mut().expect("subsampling rng");
                let mut pool: Vec<usize> = (0..self.dim).collect();
                for i in 0..k {
                    let j = rng.gen_range(i..pool.len());
                    pool.swap(i, j);
                }
                let mut picked = pool[..k].to_vec();
                picked.sort_unstable();
                picked
            }
        }
    }

    fn best_split(
        &self,
        indices: &[usize],
        rng: &mut Option<&mut ChaCha8Rng>,
    ) -> Option<(usize, f64)> {
        let n = indices.len() as f64;
        let mut best: Option<(usize, f64, f64)> = None;
        for feature in self.candidate_features(rng) {
            let mut order = indices.to_vec();
            order.sort_by(|&a, &b| {
                self.rows[a][feature]
                    .partial_cmp(&self.rows[b][feature])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            // Prefix statistics over the sorted order.
            let mut left_n = 0.0f64;
            let mut left_pos = 0.0f64;
            let mut left_sum = 0.0f64;
            let mut left_sumsq = 0.0f64;
            let (mut total_pos, mut total_sum, mut total_sumsq) = (0.0f64, 0.0f64, 0.0f64);
            for &i in &order {
                let t = self.targets[i];
                total_pos += (t == 1.0) as u8 as f64;
                total_sum += t;
                total_sumsq += t * t;
            }
            for cut in 0..order.len() - 1 {
                let i = order[cut];
                let t = self.targets[i];
                left_n += 1.0;
                left_pos += (t == 1.0) as u8 as f64;
                left_sum += t;
                left_sumsq += t * t;
                let x_here = self.rows[i][feature];
                let x_next = self.rows[order[cut + 1]][feature];
                if x_here == x_next {
                    continue;
                }
                let right_n = n - left_n;
                let weighted = match self.criterion {
                    Criterion::Gini => {
                        let pl = left_pos / left_n;
                        let pr = (total_pos - left_pos) / right_n;
                        (left_n * 2.0 * pl * (1.0 - pl) + right_n * 2.0 * pr * (1.0 - pr)) / n
                    }
                    Criterion::Mse => {
                        let var = |s: f64, sq: f64, c: f64| (sq - s * s / c).max(0.0) / c;
                        (left_n * var(left_sum, left_sumsq, left_n)
                            + right_n
                                * var(total_sum - left_sum, total_sumsq - left_sumsq, right_n))
                            / n
                    }
                };
                // Zero-gain splits are acceptable: the children may still
                // split usefully (XOR-style targets), and impure nodes
                // should keep growing until purity or the depth cap.
                let better = match best {
                    None => true,
                    Some((_, _, best_w)) => weighted < best_w,
                };
                if better {
                    best = Some((feature, x_here, weighted));
                }
            }
        }
        best.map(|(f, t, _)| (f, t))
    }
}
