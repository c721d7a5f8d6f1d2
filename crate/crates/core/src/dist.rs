//! Data distributions: synthetic families, shift combinators and finite
//! pools.
//!
//! A `DistSpec` describes a distribution; `DistSpec::source` turns it into a
//! stateful `DistSource` that draws examples. Synthetic sources are
//! inexhaustible; pool sources draw without replacement and error on
//! exhaustion rather than silently reusing rows. All randomness comes from a
//! single ChaCha stream per source, so draws are reproducible byte-for-byte
//! given the seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};
use std::sync::Arc;

use crate::data::{Dataset, Example, TaskKind};
use crate::error::{Error, Result};

/// 1-D two-group Gaussian classification family.
///
/// Group membership z is 1 with probability `group_mix`. Labels are
/// balanced. Features follow N((2y - 1) + tau * z + mean_shift, sigma_z^2):
/// group 0 has class means at -1 and +1, group 1 at -1 + tau and 1 + tau.
/// `mean_shift` moves both groups equally, which changes (x, y) given z
/// while leaving the group marginal untouched. `flip0`/`flip1` add
/// group-specific label noise.
#[derive(Debug, Clone, PartialEq)]
pub struct Gauss1dSpec {
    pub tau: f64,
    pub group_mix: f64,
    pub mean_shift: f64,
    pub sigma0: f64,
    pub sigma1: f64,
    pub flip0: f64,
    pub flip1: f64,
}

impl Default for Gauss1dSpec {
    fn default() -> Self {
        Gauss1dSpec {
            tau: 0.0,
            group_mix: 0.5,
            mean_shift: 0.0,
            sigma0: 1.0,
            sigma1: 1.0,
            flip0: 0.0,
            flip1: 0.0,
        }
    }
}

/// d-dimensional two-class Gaussian blobs (classification). Labels are
/// balanced; features follow N(center_y, sigma^2 I). All examples carry
/// group 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BlobsSpec {
    pub center0: Vec<f64>,
    pub center1: Vec<f64>,
    pub sigma: f64,
}

/// Convex mixture: draw from `base` with probability `alpha`, else `alt`.
#[derive(Debug, Clone)]
pub struct MixtureSpec {
    pub alpha: f64,
    pub base: Box<DistSpec>,
    pub alt: Box<DistSpec>,
}

/// Group underrepresentation: draw from `group0` with probability `beta`,
/// else `group1`. beta = 0.5 reproduces the balanced mix; beta = 1 removes
/// group 1 entirely.
#[derive(Debug, Clone)]
pub struct UnderrepSpec {
    pub beta: f64,
    pub group0: Box<DistSpec>,
    pub group1: Box<DistSpec>,
}

/// Finite labeled pool. Sampling permutes the rows once per source and then
/// deals them out; requesting more rows than the pool holds is an error.
#[derive(Debug, Clone)]
pub struct PoolSpec {
    pub name: String,
    pub data: Arc<Dataset>,
}

#[derive(Debug, Clone)]
pub enum DistSpec {
    Gauss1d(Gauss1dSpec),
    Blobs(BlobsSpec),
    Mixture(MixtureSpec),
    Underrep(UnderrepSpec),
    Pool(PoolSpec),
}

impl DistSpec {
    pub fn task(&self) -> TaskKind {
        match self {
            DistSpec::Gauss1d(_) | DistSpec::Blobs(_) => TaskKind::Classification,
            DistSpec::Mixture(m) => m.base.task(),
            DistSpec::Underrep(u) => u.group0.task(),
            DistSpec::Pool(p) => p.data.task(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DistSpec::Gauss1d(_) => 1,
            DistSpec::Blobs(b) => b.center0.len(),
            DistSpec::Mixture(m) => m.base.dim(),
            DistSpec::Underrep(u) => u.group0.dim(),
            DistSpec::Pool(p) => p.data.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn prob(name: &str, v: f64) -> Result<()> {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
            Ok(())
        }
        match self {
            DistSpec::Gauss1d(g) => {
                prob("group_mix", g.group_mix)?;
                prob("flip0", g.flip0)?;
                prob("flip1", g.flip1)?;
                if g.sigma0 <= 0.0 || g.sigma1 <= 0.0 {
                    return Err(Error::InvalidConfig("sigma must be positive".to_string()));
                }
                Ok(())
            }
            DistSpec::Blobs(b) => {
                if b.center0.is_empty() {
                    return Err(Error::InvalidConfig("blobs need at least 1 dimension".to_string()));
                }
                if b.center0.len() != b.center1.len() {
                    return Err(Error::DimensionMismatch {
                        expected: b.center0.len(),
                        got: b.center1.len(),
                    });
                }
                if b.sigma <= 0.0 {
                    return Err(Error::InvalidConfig("sigma must be positive".to_string()));
                }
                Ok(())
            }
            DistSpec::Mixture(m) => {
                prob("alpha", m.alpha)?;
                m.base.validate()?;
                m.alt.validate()?;
                check_compatible(&m.base, &m.alt)
            }
            DistSpec::Underrep(u) => {
                if !(0.5..=1.0).contains(&u.beta) {
                    return Err(Error::InvalidConfig(format!(
                        "beta must lie in [0.5, 1], got {}",
                        u.beta
                    )));
                }
                u.group0.validate()?;
                u.group1.validate()?;
                check_compatible(&u.group0, &u.group1)
            }
            DistSpec::Pool(p) => {
                if p.data.is_empty() {
                    return Err(Error::InvalidConfig(format!("pool `{}` is empty", p.name)));
                }
                Ok(())
            }
        }
    }

    /// Materialize a sampling source. Pool orders are fixed here, so two
    /// sources with the same seed deal identical streams.
    pub fn source(&self, seed: u64) -> Result<DistSource> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let root = SourceNode::build(self, &mut rng);
        Ok(DistSource { rng, root })
    }
}

fn check_compatible(a: &DistSpec, b: &DistSpec) -> Result<()> {
    if a.task() != b.task() {
        return Err(Error::TaskMismatch(format!(
            "components have different tasks: {:?} vs {:?}",
            a.task(),
            b.task()
        )));
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

enum SourceNode {
    Gauss1d(Gauss1dSpec),
    Blobs(BlobsSpec),
    Mixture {
        alpha: f64,
        base: Box<SourceNode>,
        alt: Box<SourceNode>,
    },
    Underrep {
        beta: f64,
        group0: Box<SourceNode>,
        group1: Box<SourceNode>,
    },
    Pool {
        name: String,
        data: Arc<Dataset>,
        order: Vec<usize>,
        cursor: usize,
    },
}

impl SourceNode {
    fn build(spec: &DistSpec, rng: &mut ChaCha8Rng) -> SourceNode {
        match spec {
            DistSpec::Gauss1d(g) => SourceNode::Gauss1d(g.clone()),
            DistSpec::Blobs(b) => SourceNode::Blobs(b.clone()),
            // Boundary collapse: a degenerate mixture *is* its surviving
            // component, so the sampled stream is identical to sampling the
            // component directly under the same seed.
            DistSpec::Mixture(m) if m.alpha == 1.0 => SourceNode::build(&m.base, rng),
            DistSpec::Mixture(m) if m.alpha == 0.0 => SourceNode::build(&m.alt, rng),
            DistSpec::Mixture(m) => SourceNode::Mixture {
                alpha: m.alpha,
                base: Box::new(SourceNode::build(&m.base, rng)),
                alt: Box::new(SourceNode::build(&m.alt, rng)),
            },
            DistSpec::Underrep(u) if u.beta == 1.0 => SourceNode::build(&u.group0, rng),
            DistSpec::Underrep(u) => SourceNode::Underrep {
                beta: u.beta,
                group0: Box::new(SourceNode::build(&u.group0, rng)),
                group1: Box::new(SourceNode::build(&u.group1, rng)),
            },
            DistSpec::Pool(p) => {
                let mut order: Vec<usize> = (0..p.data.len()).collect();
                order.shuffle(rng);
                SourceNode::Pool {
                    name: p.name.clone(),
                    data: Arc::clone(&p.data),
                    order,
                    cursor: 0,
                }
            }
        }
    }

    fn draw(&mut self, rng: &mut ChaCha8Rng) -> Result<Example> {
        match self {
            SourceNode::Gauss1d(g) => {
                let z: u8 = if rng.gen::<f64>() < g.group_mix { 1 } else { 0 };
                let mut y: f64 = if rng.gen::<f64>() < 0.5 { 1.0 } else { 0.0 };
                let (sigma, flip) = if z == 1 {
                    (g.sigma1, g.flip1)
                } else {
                    (g.sigma0, g.flip0)
                };
                let mean = (2.0 * y - 1.0) + g.tau * z as f64 + g.mean_shift;
                let x = Normal::new(mean, sigma).unwrap().sample(rng);
                if flip > 0.0 && rng.gen::<f64>() < flip {
                    y = 1.0 - y;
                }
                Ok(Example {
                    features: vec![x],
                    label: y,
                    group: z,
                })
            }
            SourceNode::Blobs(b) => {
                let y: f64 = if rng.gen::<f64>() < 0.5 { 1.0 } else { 0.0 };
                let center = if y == 1.0 { &b.center1 } else { &b.center0 };
                let features = center
                    .iter()
                    .map(|&c| Normal::new(c, b.sigma).unwrap().sample(rng))
                    .collect();
                Ok(Example {
                    features,
                    label: y,
                    group: 0,
                })
            }
            SourceNode::Mixture { alpha, base, alt } => {
                if rng.gen::<f64>() < *alpha {
                    base.draw(rng)
                } else {
                    alt.draw(rng)
                }
            }
            SourceNode::Underrep {
                beta,
                group0,
                group1,
            } => {
                if rng.gen::<f64>() < *beta {
                    group0.draw(rng)
                } else {
                    group1.draw(rng)
                }
            }
            SourceNode::Pool {
                name,
                data,
                order,
                cursor,
            } => {
                if *cursor >= order.len() {
                    return Err(Error::PoolExhausted {
                        pool: name.clone(),
                        requested: 1,
                        available: 0,
                    });
                }
                let ex = data.examples()[order[*cursor]].clone();
                *cursor += 1;
                Ok(ex)
            }
        }
    }
}

/// A stateful sampler for one distribution.
pub struct DistSource {
    rng: ChaCha8Rng,
    root: SourceNode,
}

impl DistSource {
    pub fn draw_example(&mut self) -> Result<Example> {
        self.root.draw(&mut self.rng)
    }

    pub fn draw_dataset(&mut self, n: usize, dim: usize, task: TaskKind) -> Result<Dataset> {
        let mut examples = Vec::with_capacity(n);
        for _ in 0..n {
            examples.push(self.draw_example()?);
        }
        Dataset::new(examples, dim, task)
    }
}

/// Sample n points from the 1-D Gaussian group family with the given group
/// mix.
pub fn sample_gaussian_gds(spec: &Gauss1dSpec, group_mix: f64, n: usize, seed: u64) -> Result<Dataset> {
    let spec = DistSpec::Gauss1d(Gauss1dSpec {
        group_mix,
        ..spec.clone()
    });
    spec.source(seed)?.draw_dataset(n, 1, TaskKind::Classification)
}

/// Sample n points from a mixture.
pub fn sample_mixture(spec: &MixtureSpec, n: usize, seed: u64) -> Result<Dataset> {
    let d = DistSpec::Mixture(spec.clone());
    let (dim, task) = (d.dim(), d.task());
    d.source(seed)?.draw_dataset(n, dim, task)
}

/// Debug variant of [`sample_mixture`] that also reports, per draw, whether
/// the base component produced it. The sampled stream is identical to
/// [`sample_mixture`] under the same seed.
pub fn sample_mixture_tagged(
    spec: &MixtureSpec,
    n: usize,
    seed: u64,
) -> Result<(Dataset, Vec<bool>)> {
    let d = DistSpec::Mixture(spec.clone());
    d.validate()?;
    let (dim, task) = (d.dim(), d.task());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut base = SourceNode::build(&spec.base, &mut rng);
    let mut alt = SourceNode::build(&spec.alt, &mut rng);
    let mut examples = Vec::with_capacity(n);
    let mut tags = Vec::with_capacity(n);
    for _ in 0..n {
        // Mirrors SourceNode::Mixture::draw exactly; degenerate alphas are
        // handled by the branch itself (an impossible coin outcome).
        let from_base = if spec.alpha == 1.0 {
            true
        } else if spec.alpha == 0.0 {
            false
        } else {
            rng.gen::<f64>() < spec.alpha
        };
        let ex = if from_base {
            base.draw(&mut rng)?
        } else {
            alt.draw(&mut rng)?
        };
        examples.push(ex);
        tags.push(from_base);
    }
    Ok((Dataset::new(examples, dim, task)?, tags))
}

/// Sample n points under group underrepresentation.
pub fn sample_underrep(spec: &UnderrepSpec, n: usize, seed: u64) -> Result<Dataset> {
    let d = DistSpec::Underrep(spec.clone());
    let (dim, task) = (d.dim(), d.task());
    d.source(seed)?.draw_dataset(n, dim, task)
}

/// The balanced two-group 1-D Gaussian distribution D with the given tau:
/// the 50-50 mix of the group-0 and group-1 components.
pub fn gauss1d_normative(tau: f64) -> DistSpec {
    DistSpec::Gauss1d(Gauss1dSpec {
        tau,
        group_mix: 0.5,
        ..Gauss1dSpec::default()
    })
}

/// The underrepresentation shift D' for the 1-D Gaussian family: keep the
/// conditional laws, reweigh the groups to beta / (1 - beta).
pub fn gauss1d_underrep(tau: f64, beta: f64) -> DistSpec {
    DistSpec::Underrep(UnderrepSpec {
        beta,
        group0: Box::new(DistSpec::Gauss1d(Gauss1dSpec {
            tau,
            group_mix: 0.0,
            ..Gauss1dSpec::default()
        })),
        group1: Box::new(DistSpec::Gauss1d(Gauss1dSpec {
            tau,
            group_mix: 1.0,
            ..Gauss1dSpec::default()
        })),
    })
}
