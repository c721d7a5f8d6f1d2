//! Black-box audit toolkit for detecting distribution shifts in a trained
//! model's data.
//!
//! The toolkit plays a two-player game: a challenger trains a model either
//! on data from a declared distribution or from a shifted one, and an
//! auditor with only query access must tell which. The auditor here runs a
//! shadow-training attack — it trains its own reference models, compares
//! per-bundle performance profiles, and feeds the difference to a tiny
//! meta-classifier. Calibrating that attack on control runs (no shift)
//! turns it into a statistical test with a controlled false-positive rate.
//!
//! Modules build up in layers: [`data`] holds datasets and partitioning,
//! [`dist`] the samplable distribution families, [`learners`] the model
//! zoo, [`attack`] the shadow-training machinery, [`stats`] the decision
//! rule, [`audit`] the end-to-end game, [`sweeps`] parameter grids, and
//! [`theory`] a closed-form model of why the attack works.

pub mod attack;
pub mod audit;
pub mod data;
pub mod dist;
pub mod error;
pub mod learners;
pub mod seed;
pub mod stats;
pub mod sweeps;
pub mod theory;

pub use error::{Error, Result};
