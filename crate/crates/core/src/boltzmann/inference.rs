use ndarray::Array1;
use rand::Rng;

use super::{sample_unchecked, DbmParams, LayerState, RbmParams};
use crate::error::{Error, Result};
use crate::patterns::TactilePattern;

/// Joint state of the three DBM layers.
#[derive(Debug, Clone, PartialEq)]
pub struct DbmChain {
    pub v: LayerState,
    pub h1: LayerState,
    pub h2: LayerState,
}

impl DbmChain {
    pub fn random<R: Rng + ?Sized>(params: &DbmParams, rng: &mut R) -> Self {
        Self {
            v: LayerState::random(params.n_visible(), rng),
            h1: LayerState::random(params.n_hidden1(), rng),
            h2: LayerState::random(params.n_hidden2(), rng),
        }
    }

    /// Visible layer fixed to `v`, hidden layers random.
    pub fn clamped<R: Rng + ?Sized>(params: &DbmParams, v: LayerState, rng: &mut R) -> Self {
        Self {
            v,
            h1: LayerState::random(params.n_hidden1(), rng),
            h2: LayerState::random(params.n_hidden2(), rng),
        }
    }
}

/// `h ~ p(h | v)`, then `v ~ p(v | h)`. Returns the new hidden state.
pub fn rbm_gibbs_sweep<R: Rng + ?Sized>(params: &RbmParams, v: &mut LayerState, rng: &mut R) -> LayerState {
    let h = sample_unchecked(&params.hidden_prob_unchecked(v.as_array()), rng);
    *v = sample_unchecked(&params.visible_prob_unchecked(h.as_array()), rng);
    h
}

/// One unclamped sweep: `h1` given `(v, h2)`, then `v` and `h2` given `h1`.
pub fn dbm_free_sweep<R: Rng + ?Sized>(params: &DbmParams, chain: &mut DbmChain, rng: &mut R) {
    chain.h1 = sample_unchecked(
        &params.middle_prob_unchecked(chain.v.as_array(), chain.h2.as_array()),
        rng,
    );
    chain.v = sample_unchecked(&params.visible_prob_unchecked(chain.h1.as_array()), rng);
    chain.h2 = sample_unchecked(&params.top_prob_unchecked(chain.h1.as_array()), rng);
}

/// One sweep with the visible layer held fixed. Returns the activation
/// probabilities `(p(h1 | v, h2), p(h2 | h1))` the states were drawn from.
pub fn clamped_sweep<R: Rng + ?Sized>(
    params: &DbmParams,
    chain: &mut DbmChain,
    rng: &mut R,
) -> (Array1<f64>, Array1<f64>) {
    let p1 = params.middle_prob_unchecked(chain.v.as_array(), chain.h2.as_array());
    chain.h1 = sample_unchecked(&p1, rng);
    let p2 = params.top_prob_unchecked(chain.h1.as_array());
    chain.h2 = sample_unchecked(&p2, rng);
    (p1, p2)
}

/// Free-running sample from an RBM started at a random visible state.
pub fn sample_rbm<R: Rng + ?Sized>(params: &RbmParams, burn_in: usize, rng: &mut R) -> TactilePattern {
    let mut v = LayerState::random(params.n_visible(), rng);
    for _ in 0..burn_in {
        rbm_gibbs_sweep(params, &mut v, rng);
    }
    v.to_pattern()
}

/// Sample from a two-level belief net: Gibbs chain in the top RBM over
/// `h1`, then one downward pass through the bottom RBM to the visible
/// layer.
pub fn sample_dbn<R: Rng + ?Sized>(
    lower: &RbmParams,
    upper: &RbmParams,
    burn_in: usize,
    rng: &mut R,
) -> TactilePattern {
    let mut h1 = LayerState::random(upper.n_visible(), rng);
    for _ in 0..burn_in {
        rbm_gibbs_sweep(upper, &mut h1, rng);
    }
    sample_unchecked(&lower.visible_prob_unchecked(h1.as_array()), rng).to_pattern()
}

/// Free-running DBM sample: all layers start uniformly random and settle
/// for `burn_in` sweeps; the visible state is returned.
pub fn sample_dbm<R: Rng + ?Sized>(params: &DbmParams, burn_in: usize, rng: &mut R) -> TactilePattern {
    let mut chain = DbmChain::random(params, rng);
    for _ in 0..burn_in {
        dbm_free_sweep(params, &mut chain, rng);
    }
    chain.v.to_pattern()
}

/// Holds the visible layer at `v` and Gibbs-updates the hidden layers for
/// `sweeps` sweeps, returning the final `(h1, h2)`.
pub fn clamp_and_infer<R: Rng + ?Sized>(
    params: &DbmParams,
    v: &TactilePattern,
    sweeps: usize,
    rng: &mut R,
) -> Result<(LayerState, LayerState)> {
    if v.len() != params.n_visible() {
        return Err(Error::invalid("clamped pattern length does not match the DBM"));
    }
    params.check_finite()?;
    let mut chain = DbmChain::clamped(params, LayerState::from(v), rng);
    for _ in 0..sweeps {
        clamped_sweep(params, &mut chain, rng);
    }
    Ok((chain.h1, chain.h2))
}
