//! Persistent contrastive divergence.
//!
//! Data statistics use activation probabilities of the hidden layers with
//! the visible layer clamped; model statistics use the sampled states of
//! persistent fantasy particles.

use ndarray::{Array1, Array2};
use rand::Rng;

use super::inference::{dbm_free_sweep, DbmChain};
use super::{sample_unchecked, DbmParams, LayerState, RbmParams, TrainConfig};
use crate::error::{Error, Result};

/// Averaged second- and first-order statistics of one layer pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairStatistics {
    /// `<x yᵀ>`, shape `(lower, upper)`.
    pub pair: Array2<f64>,
    pub lower: Array1<f64>,
    pub upper: Array1<f64>,
}

impl PairStatistics {
    pub fn zeros(lower: usize, upper: usize) -> Self {
        Self {
            pair: Array2::zeros((lower, upper)),
            lower: Array1::zeros(lower),
            upper: Array1::zeros(upper),
        }
    }

    fn accumulate(&mut self, x: &Array1<f64>, y: &Array1<f64>) {
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                self.pair.row_mut(i).scaled_add(xi, y);
            }
        }
        self.lower += x;
        self.upper += y;
    }

    fn scale(&mut self, k: f64) {
        self.pair *= k;
        self.lower *= k;
        self.upper *= k;
    }
}

/// Applies `λ (data − model)` to a weight matrix and its bias vectors.
pub(crate) fn apply_difference(
    weights: &mut Array2<f64>,
    lower_bias: Option<&mut Array1<f64>>,
    upper_bias: &mut Array1<f64>,
    data: &PairStatistics,
    model: &PairStatistics,
    learning_rate: f64,
) {
    weights.scaled_add(learning_rate, &(&data.pair - &model.pair));
    if let Some(b) = lower_bias {
        b.scaled_add(learning_rate, &(&data.lower - &model.lower));
    }
    upper_bias.scaled_add(learning_rate, &(&data.upper - &model.upper));
}

/// Persistent fantasy particles. Each particle holds one state per layer,
/// ordered from the visible layer upward.
#[derive(Debug, Clone, PartialEq)]
pub struct PcdState {
    particles: Vec<Vec<LayerState>>,
}

impl PcdState {
    pub fn for_rbm<R: Rng + ?Sized>(params: &RbmParams, count: usize, rng: &mut R) -> Result<Self> {
        Self::random(&[params.n_visible(), params.n_hidden()], count, rng)
    }

    pub fn for_dbm<R: Rng + ?Sized>(params: &DbmParams, count: usize, rng: &mut R) -> Result<Self> {
        Self::random(
            &[params.n_visible(), params.n_hidden1(), params.n_hidden2()],
            count,
            rng,
        )
    }

    fn random<R: Rng + ?Sized>(sizes: &[usize], count: usize, rng: &mut R) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("PCD needs at least one fantasy particle"));
        }
        let particles = (0..count)
            .map(|_| sizes.iter().map(|&n| LayerState::random(n, rng)).collect())
            .collect();
        Ok(Self { particles })
    }

    pub fn particle_count(&self) -> usize {
        self.particles.len()
    }

    pub fn particles(&self) -> &[Vec<LayerState>] {
        &self.particles
    }

    fn check_layers(&self, sizes: &[usize]) -> Result<()> {
        let ok = self
            .particles
            .iter()
            .all(|p| p.len() == sizes.len() && p.iter().zip(sizes).all(|(s, &n)| s.len() == n));
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("fantasy particles do not match the network shape"))
        }
    }
}

fn check_batch(batch: &[LayerState], n: usize) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::invalid("empty training batch"));
    }
    if batch.iter().any(|v| v.len() != n) {
        return Err(Error::invalid("batch state length does not match the visible layer"));
    }
    Ok(())
}

/// `<v p(h|v)ᵀ>` over the batch.
pub fn rbm_data_statistics(params: &RbmParams, batch: &[LayerState]) -> PairStatistics {
    let mut s = PairStatistics::zeros(params.n_visible(), params.n_hidden());
    for v in batch {
        s.accumulate(v.as_array(), &params.hidden_prob_unchecked(v.as_array()));
    }
    s.scale(1.0 / batch.len() as f64);
    s
}

/// One PCD step on an RBM.
pub fn pcd_update_rbm<R: Rng + ?Sized>(
    params: &mut RbmParams,
    batch: &[LayerState],
    pcd: &mut PcdState,
    config: &TrainConfig,
    rng: &mut R,
) -> Result<()> {
    check_batch(batch, params.n_visible())?;
    pcd.check_layers(&[params.n_visible(), params.n_hidden()])?;

    let data = rbm_data_statistics(params, batch);

    let mut model = PairStatistics::zeros(params.n_visible(), params.n_hidden());
    for particle in &mut pcd.particles {
        for _ in 0..config.gibbs_steps_per_update {
            let h = sample_unchecked(&params.hidden_prob_unchecked(particle[0].as_array()), rng);
            particle[0] = sample_unchecked(&params.visible_prob_unchecked(h.as_array()), rng);
            particle[1] = sample_unchecked(&params.hidden_prob_unchecked(particle[0].as_array()), rng);
        }
        model.accumulate(particle[0].as_array(), particle[1].as_array());
    }
    model.scale(1.0 / pcd.particles.len() as f64);

    apply_difference(
        &mut params.weights,
        Some(&mut params.visible_bias),
        &mut params.hidden_bias,
        &data,
        &model,
        config.learning_rate,
    );
    params.mask.enforce(&mut params.weights);
    params.check_finite()
}

/// Clamped statistics of both layer pairs: an upward pass
/// `μ1 = σ(W1ᵀv + c1)`, `μ2 = σ(W2ᵀμ1 + c2)` followed by `mean_field_passes`
/// refinements in which `μ1` also receives top-down input from `μ2`.
pub fn dbm_data_statistics(
    params: &DbmParams,
    batch: &[LayerState],
    mean_field_passes: usize,
) -> (PairStatistics, PairStatistics) {
    let mut lower = PairStatistics::zeros(params.n_visible(), params.n_hidden1());
    let mut upper = PairStatistics::zeros(params.n_hidden1(), params.n_hidden2());
    for v in batch {
        let va = v.as_array();
        let bottom_up = params.w1.t().dot(va) + &params.hidden1_bias;
        let mut mu1 = bottom_up.mapv(super::sigmoid);
        let mut mu2 = params.top_prob_unchecked(&mu1);
        for _ in 0..mean_field_passes {
            mu1 = (&bottom_up + &params.w2.dot(&mu2)).mapv(super::sigmoid);
            mu2 = params.top_prob_unchecked(&mu1);
        }
        lower.accumulate(va, &mu1);
        upper.accumulate(&mu1, &mu2);
    }
    let k = 1.0 / batch.len() as f64;
    lower.scale(k);
    upper.scale(k);
    (lower, upper)
}

/// One joint PCD step on both layer pairs of a DBM.
pub fn pcd_update_dbm<R: Rng + ?Sized>(
    params: &mut DbmParams,
    batch: &[LayerState],
    pcd: &mut PcdState,
    config: &TrainConfig,
    rng: &mut R,
) -> Result<()> {
    check_batch(batch, params.n_visible())?;
    pcd.check_layers(&[params.n_visible(), params.n_hidden1(), params.n_hidden2()])?;

    let (data_lower, data_upper) = dbm_data_statistics(params, batch, config.mean_field_passes);

    let mut model_lower = PairStatistics::zeros(params.n_visible(), params.n_hidden1());
    let mut model_upper = PairStatistics::zeros(params.n_hidden1(), params.n_hidden2());
    for particle in &mut pcd.particles {
        let mut chain = DbmChain {
            v: particle[0].clone(),
            h1: particle[1].clone(),
            h2: particle[2].clone(),
        };
        for _ in 0..config.gibbs_steps_per_update {
            dbm_free_sweep(params, &mut chain, rng);
        }
        model_lower.accumulate(chain.v.as_array(), chain.h1.as_array());
        model_upper.accumulate(chain.h1.as_array(), chain.h2.as_array());
        *particle = vec![chain.v, chain.h1, chain.h2];
    }
    let k = 1.0 / pcd.particles.len() as f64;
    model_lower.scale(k);
    model_upper.scale(k);

    // The h1 statistics of both pairs coincide, so c1 is updated once.
    apply_difference(
        &mut params.w1,
        Some(&mut params.visible_bias),
        &mut params.hidden1_bias,
        &data_lower,
        &model_lower,
        config.learning_rate,
    );
    apply_difference(
        &mut params.w2,
        None,
        &mut params.hidden2_bias,
        &data_upper,
        &model_upper,
        config.learning_rate,
    );
    params.enforce_masks();
    params.check_finite()
}
