//! Restricted and deep Boltzmann machines with binary stochastic units.
//!
//! Orientation convention: a weight matrix `W` between a lower layer `x`
//! and an upper layer `y` has shape `(len(x), len(y))`, so the energy term
//! is `-xᵀ W y`, the upward input is `Wᵀ x` and the downward input is `W y`.

mod checkpoint;
mod dbm;
mod exact;
mod inference;
mod pcd;
mod rbm;
mod train;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, CHECKPOINT_MAGIC};
pub use dbm::DbmParams;
pub use exact::{
    enumerate_states, partition_and_prob, visible_distribution, Model, PartitionResult, ENUMERATION_LIMIT,
};
pub use inference::{
    clamp_and_infer, clamped_sweep, dbm_free_sweep, rbm_gibbs_sweep, sample_dbm, sample_dbn, sample_rbm, DbmChain,
};
pub use pcd::{dbm_data_statistics, pcd_update_dbm, pcd_update_rbm, rbm_data_statistics, PairStatistics, PcdState};
pub use rbm::RbmParams;
pub use train::{
    evaluate_samples, pretrain_dbn, train_dbm, train_rbm, CollapseCheck, DbmTrainOutcome, Phase, PretrainOutcome,
    QPoint, QTrace, StopReason, TrainConfig,
};

use ndarray::{Array1, ArrayView1};
use rand::Rng;

use crate::error::{Error, Result};
use crate::patterns::TactilePattern;

/// Logistic function, evaluated without overflow for large `|x|`.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(x))` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub(crate) fn sigmoid_vec(pre: Array1<f64>) -> Array1<f64> {
    pre.mapv_into(sigmoid)
}

/// Binary state of one layer, stored as 0.0/1.0 so it can enter linear
/// algebra directly.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerState(Array1<f64>);

impl LayerState {
    pub fn zeros(n: usize) -> Self {
        Self(Array1::zeros(n))
    }

    pub fn ones(n: usize) -> Self {
        Self(Array1::ones(n))
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        Self(bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())
    }

    pub fn from_values(values: Array1<f64>) -> Result<Self> {
        if values.iter().any(|&x| x != 0.0 && x != 1.0) {
            return Err(Error::invalid("layer state entries must be 0 or 1"));
        }
        Ok(Self(values))
    }

    /// Independent fair coin per unit.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self((0..n).map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn view(&self) -> ArrayView1<'_, f64> {
        self.0.view()
    }

    pub fn as_array(&self) -> &Array1<f64> {
        &self.0
    }

    pub fn is_on(&self, i: usize) -> bool {
        self.0[i] == 1.0
    }

    pub fn to_pattern(&self) -> TactilePattern {
        TactilePattern::new(self.0.iter().map(|&x| x == 1.0).collect())
    }
}

impl From<&TactilePattern> for LayerState {
    fn from(p: &TactilePattern) -> Self {
        LayerState::from_bits(p.cells())
    }
}

/// Independent Bernoulli draw per unit.
pub fn sample_layer<R: Rng + ?Sized>(probs: &Array1<f64>, rng: &mut R) -> Result<LayerState> {
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::invalid("probabilities must lie in [0, 1]"));
    }
    Ok(sample_unchecked(probs, rng))
}

#[inline]
pub(crate) fn sample_unchecked<R: Rng + ?Sized>(probs: &Array1<f64>, rng: &mut R) -> LayerState {
    LayerState(probs.mapv(|p| if rng.random::<f64>() < p { 1.0 } else { 0.0 }))
}

pub(crate) fn ensure_finite<'a>(what: &'static str, values: impl IntoIterator<Item = &'a f64>) -> Result<()> {
    if values.into_iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric(what))
    }
}
