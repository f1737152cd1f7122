//! Homeostatic bias adaptation under sensory deprivation.
//!
//! A healthy activity level `μ_i` is measured for every hidden neuron while
//! the network sees the training patterns. The visible layer is then
//! clamped to the blank pattern and each step nudges the hidden biases by
//! `η (μ_i − a_i)`, where `a_i` is the neuron's current activity.

use std::collections::VecDeque;

use ndarray::Array1;
use rand::Rng;

use crate::boltzmann::{clamped_sweep, DbmChain, DbmParams, LayerState, QTrace};
use crate::decoder::{decode_performance, DecodeConfig, DecodeMode};
use crate::error::{Error, Result};
use crate::patterns::{Dataset, TactilePattern};

/// Sweeps discarded before activity is averaged for the baseline.
pub const BASELINE_BURN_IN: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct HomeostasisConfig {
    pub eta: f64,
    pub steps: usize,
    pub baseline_sweeps: usize,
    pub activity_window: usize,
    pub decode_samples: usize,
    pub rng_seed: u64,
}

impl Default for HomeostasisConfig {
    fn default() -> Self {
        Self {
            eta: 0.01,
            steps: 2000,
            baseline_sweeps: 100,
            activity_window: 10,
            decode_samples: 20,
            rng_seed: 0,
        }
    }
}

impl HomeostasisConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::Config("eta must be a non-negative number".into()));
        }
        if self.steps == 0 || self.baseline_sweeps == 0 || self.activity_window == 0 || self.decode_samples == 0 {
            return Err(Error::Config(
                "steps, baseline_sweeps, activity_window and decode_samples must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Healthy mean activation probability of every hidden neuron.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineActivity {
    pub hidden1: Array1<f64>,
    pub hidden2: Array1<f64>,
}

/// Clamps each dataset pattern in turn and averages the hidden activation
/// probabilities over `baseline_sweeps` sweeps after a short burn-in.
pub fn measure_baseline<R: Rng + ?Sized>(
    params: &DbmParams,
    dataset: &Dataset,
    config: &HomeostasisConfig,
    rng: &mut R,
) -> Result<BaselineActivity> {
    if dataset.is_empty() {
        return Err(Error::invalid("baseline needs at least one pattern"));
    }
    params.check_finite()?;
    let mut mu1 = Array1::zeros(params.n_hidden1());
    let mut mu2 = Array1::zeros(params.n_hidden2());
    for p in dataset {
        if p.len() != params.n_visible() {
            return Err(Error::invalid("dataset pattern length does not match the DBM"));
        }
        let mut chain = DbmChain::clamped(params, LayerState::from(p), rng);
        for _ in 0..BASELINE_BURN_IN {
            clamped_sweep(params, &mut chain, rng);
        }
        for _ in 0..config.baseline_sweeps {
            let (p1, p2) = clamped_sweep(params, &mut chain, rng);
            mu1 += &p1;
            mu2 += &p2;
        }
    }
    let k = 1.0 / (dataset.len() * config.baseline_sweeps) as f64;
    Ok(BaselineActivity {
        hidden1: mu1 * k,
        hidden2: mu2 * k,
    })
}

/// Blank-clamped chain plus the sliding window of recent activities.
#[derive(Debug, Clone)]
pub struct HomeostasisState {
    pub chain: DbmChain,
    window: VecDeque<(Array1<f64>, Array1<f64>)>,
}

impl HomeostasisState {
    pub fn new<R: Rng + ?Sized>(params: &DbmParams, rng: &mut R) -> Self {
        Self {
            chain: DbmChain::clamped(params, LayerState::zeros(params.n_visible()), rng),
            window: VecDeque::new(),
        }
    }

    /// Mean activation probabilities over the current window.
    pub fn activity(&self) -> (Array1<f64>, Array1<f64>) {
        let k = 1.0 / self.window.len() as f64;
        let mut a1 = Array1::zeros(self.chain.h1.len());
        let mut a2 = Array1::zeros(self.chain.h2.len());
        for (p1, p2) in &self.window {
            a1 += p1;
            a2 += p2;
        }
        (a1 * k, a2 * k)
    }
}

/// Adds `η (μ − a)` to `bias`, skipping exact zeros so that a null update
/// leaves the stored values bit-identical.
pub fn adapt_bias(bias: &mut Array1<f64>, mu: &Array1<f64>, activity: &Array1<f64>, eta: f64) {
    for ((b, &m), &a) in bias.iter_mut().zip(mu).zip(activity) {
        let delta = eta * (m - a);
        if delta != 0.0 {
            *b += delta;
        }
    }
}

/// One blank-input sweep, one bias update of both hidden layers, and the
/// decoded performance of the resulting deepest state.
pub fn homeostasis_step<R: Rng + ?Sized>(
    params: &mut DbmParams,
    mu: &BaselineActivity,
    config: &HomeostasisConfig,
    state: &mut HomeostasisState,
    dataset: &Dataset,
    rng: &mut R,
) -> Result<f64> {
    let probs = clamped_sweep(params, &mut state.chain, rng);
    state.window.push_back(probs);
    while state.window.len() > config.activity_window {
        state.window.pop_front();
    }
    let (a1, a2) = state.activity();
    adapt_bias(&mut params.hidden1_bias, &mu.hidden1, &a1, config.eta);
    adapt_bias(&mut params.hidden2_bias, &mu.hidden2, &a2, config.eta);
    params.check_finite()?;

    let decode = DecodeConfig {
        mode: DecodeMode::Stochastic,
        samples_per_decode: config.decode_samples,
    };
    decode_performance(params, &state.chain.h2, dataset, &decode, rng)
}

/// Runs `config.steps` homeostasis steps from a fresh blank-clamped chain,
/// returning the adapted parameters and the per-step performance.
pub fn run_homeostasis<R: Rng + ?Sized>(
    params: &DbmParams,
    mu: &BaselineActivity,
    config: &HomeostasisConfig,
    dataset: &Dataset,
    trial: usize,
    rng: &mut R,
) -> Result<(DbmParams, QTrace)> {
    config.validate()?;
    if mu.hidden1.len() != params.n_hidden1() || mu.hidden2.len() != params.n_hidden2() {
        return Err(Error::invalid("baseline does not match the DBM"));
    }
    let mut adapted = params.clone();
    let mut state = HomeostasisState::new(&adapted, rng);
    let mut trace = QTrace::new();
    for step in 0..config.steps {
        let q = homeostasis_step(&mut adapted, mu, config, &mut state, dataset, rng)?;
        trace.push(trial, step, q);
    }
    Ok((adapted, trace))
}

/// Convenience for the blank-clamped input used throughout.
pub fn blank_input(params: &DbmParams) -> TactilePattern {
    TactilePattern::blank(params.n_visible())
}
