//! Greedy layer-wise pretraining and joint DBM fine-tuning, with sampled
//! performance tracked along the way.

use std::fmt;

use rand::Rng;

use super::inference::{sample_dbm, sample_dbn, sample_rbm};
use super::pcd::{pcd_update_dbm, pcd_update_rbm, PcdState};
use super::{sample_unchecked, DbmParams, LayerState, RbmParams};
use crate::connectivity::ConnectivityMask;
use crate::error::{Error, Result};
use crate::metrics::best_match;
use crate::patterns::{Dataset, TactilePattern};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Iterations per phase; for DBM fine-tuning this is the cap.
    pub iterations: usize,
    pub particle_count: usize,
    pub gibbs_steps_per_update: usize,
    /// Mean-field refinements of the clamped hidden statistics in DBM updates.
    pub mean_field_passes: usize,
    pub eval_interval: usize,
    pub eval_samples: usize,
    /// Gibbs sweeps from a random start before a sample is read out.
    pub sample_burn_in: usize,
    pub early_stop_q: f64,
    pub collapse_min_fraction: f64,
    pub rng_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.03,
            iterations: 2000,
            particle_count: 30,
            gibbs_steps_per_update: 1,
            mean_field_passes: 3,
            eval_interval: 50,
            eval_samples: 100,
            sample_burn_in: 200,
            early_stop_q: 0.99,
            collapse_min_fraction: 0.9,
            rng_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if !(self.early_stop_q > 0.0 && self.early_stop_q <= 1.0) {
            return Err(Error::Config("early_stop_q must lie in (0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.collapse_min_fraction) {
            return Err(Error::Config("collapse_min_fraction must lie in [0, 1]".into()));
        }
        if self.particle_count == 0 || self.eval_interval == 0 || self.eval_samples == 0 {
            return Err(Error::Config(
                "particle_count, eval_interval and eval_samples must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Training phase label used in the curve output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Pretrain1,
    Pretrain2,
    Dbm,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Pretrain1 => "pretrain1",
            Phase::Pretrain2 => "pretrain2",
            Phase::Dbm => "dbm",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QPoint {
    pub trial: usize,
    pub step: usize,
    pub q: f64,
}

/// Performance over time. Steps are strictly increasing within a trial.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QTrace {
    entries: Vec<QPoint>,
}

impl QTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, trial: usize, step: usize, q: f64) {
        if let Some(last) = self.entries.iter().rev().find(|e| e.trial == trial) {
            assert!(step > last.step, "QTrace steps must increase within a trial");
        }
        self.entries.push(QPoint { trial, step, q });
    }

    pub fn entries(&self) -> &[QPoint] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last_q(&self) -> Option<f64> {
        self.entries.last().map(|e| e.q)
    }

    /// Mean `q` over entries with `lo <= step < hi`.
    pub fn mean_between(&self, lo: usize, hi: usize) -> f64 {
        let qs: Vec<f64> = self
            .entries
            .iter()
            .filter(|e| e.step >= lo && e.step < hi)
            .map(|e| e.q)
            .collect();
        crate::metrics::mean(&qs)
    }
}

/// Summary of a batch of free-running samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseCheck {
    pub mean_q: f64,
    /// Samples whose `Q` reaches the match threshold.
    pub matched: usize,
    /// Share of matched samples claimed by the most frequent pattern.
    pub dominant_fraction: f64,
}

/// `Q` at which a sample counts as reproducing a dataset pattern.
pub const MATCH_Q: f64 = 0.9;

impl CollapseCheck {
    /// The network emits essentially a single pattern while scoring well.
    pub fn is_collapsed(&self, min_fraction: f64) -> bool {
        self.mean_q >= MATCH_Q && self.matched > 0 && self.dominant_fraction > min_fraction
    }
}

/// Scores `n` samples drawn by `sampler` against the dataset.
pub fn evaluate_samples<R, F>(dataset: &Dataset, n: usize, rng: &mut R, mut sampler: F) -> Result<CollapseCheck>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> TactilePattern,
{
    let mut total = 0.0;
    let mut claims = vec![0usize; dataset.len()];
    for _ in 0..n {
        let s = sampler(rng);
        let (idx, q) = best_match(&s, dataset)?;
        total += q;
        if q >= MATCH_Q {
            claims[idx] += 1;
        }
    }
    let matched: usize = claims.iter().sum();
    let dominant = claims.iter().copied().max().unwrap_or(0);
    Ok(CollapseCheck {
        mean_q: total / n as f64,
        matched,
        dominant_fraction: if matched == 0 {
            0.0
        } else {
            dominant as f64 / matched as f64
        },
    })
}

/// PCD training of a single RBM. `batch` supplies the training states for
/// each iteration and `sampler` draws visible-space samples for scoring.
#[allow(clippy::too_many_arguments)]
pub fn train_rbm<R, B, S>(
    params: &mut RbmParams,
    dataset: &Dataset,
    config: &TrainConfig,
    trial: usize,
    rng: &mut R,
    mut batch: B,
    mut sampler: S,
) -> Result<QTrace>
where
    R: Rng + ?Sized,
    B: FnMut(&mut R) -> Vec<LayerState>,
    S: FnMut(&RbmParams, &mut R) -> TactilePattern,
{
    let mut pcd = PcdState::for_rbm(params, config.particle_count, rng)?;
    let mut trace = QTrace::new();
    for it in 1..=config.iterations {
        let b = batch(rng);
        pcd_update_rbm(params, &b, &mut pcd, config, rng)?;
        if it % config.eval_interval == 0 || it == config.iterations {
            let check = evaluate_samples(dataset, config.eval_samples, rng, |r| sampler(params, r))?;
            trace.push(trial, it, check.mean_q);
        }
    }
    Ok(trace)
}

#[derive(Debug, Clone)]
pub struct PretrainOutcome {
    pub params: DbmParams,
    pub phase1: QTrace,
    pub phase2: QTrace,
}

/// Greedy layer-wise pretraining: the bottom RBM learns the dataset, then
/// the top RBM learns hidden representations sampled from the bottom RBM.
pub fn pretrain_dbn<R: Rng + ?Sized>(
    dataset: &Dataset,
    mask1: &ConnectivityMask,
    mask2: &ConnectivityMask,
    config: &TrainConfig,
    trial: usize,
    rng: &mut R,
) -> Result<PretrainOutcome> {
    if dataset.is_empty() {
        return Err(Error::invalid("cannot pretrain on an empty dataset"));
    }
    config.validate()?;
    let data: Vec<LayerState> = dataset.iter().map(LayerState::from).collect();
    let burn_in = config.sample_burn_in;

    let mut lower = RbmParams::init_random(mask1.clone(), rng);
    let phase1 = train_rbm(
        &mut lower,
        dataset,
        config,
        trial,
        rng,
        |_| data.clone(),
        |p, r| sample_rbm(p, burn_in, r),
    )?;

    let mut upper = RbmParams::init_random(mask2.clone(), rng);
    let frozen = lower.clone();
    let phase2 = train_rbm(
        &mut upper,
        dataset,
        config,
        trial,
        rng,
        |r| {
            data.iter()
                .map(|v| sample_unchecked(&frozen.hidden_prob_unchecked(v.as_array()), r))
                .collect()
        },
        |p, r| sample_dbn(&frozen, p, burn_in, r),
    )?;

    Ok(PretrainOutcome {
        params: DbmParams::from_rbms(&lower, &upper)?,
        phase1,
        phase2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Sampled performance reached `early_stop_q`.
    TargetReached,
    /// The network collapsed onto one pattern; the last healthy
    /// checkpoint was restored.
    Collapsed,
    IterationCap,
}

#[derive(Debug, Clone)]
pub struct DbmTrainOutcome {
    pub params: DbmParams,
    pub trace: QTrace,
    pub stop: StopReason,
    /// Iteration whose parameters were returned.
    pub iteration: usize,
}

/// Joint PCD fine-tuning of a pretrained DBM with early stopping. The
/// trace starts with the score of the incoming parameters at step 0.
pub fn train_dbm<R: Rng + ?Sized>(
    params: DbmParams,
    dataset: &Dataset,
    config: &TrainConfig,
    trial: usize,
    rng: &mut R,
) -> Result<DbmTrainOutcome> {
    config.validate()?;
    let data: Vec<LayerState> = dataset.iter().map(LayerState::from).collect();
    let burn_in = config.sample_burn_in;
    let mut trace = QTrace::new();

    let score =
        |p: &DbmParams, r: &mut R| evaluate_samples(dataset, config.eval_samples, r, |r| sample_dbm(p, burn_in, r));

    let initial = score(&params, rng)?;
    trace.push(trial, 0, initial.mean_q);
    if config.iterations == 0 {
        return Ok(DbmTrainOutcome {
            params,
            trace,
            stop: StopReason::IterationCap,
            iteration: 0,
        });
    }

    let mut current = params;
    let mut healthy = (current.clone(), 0usize);
    let mut pcd = PcdState::for_dbm(&current, config.particle_count, rng)?;
    for it in 1..=config.iterations {
        pcd_update_dbm(&mut current, &data, &mut pcd, config, rng)?;
        if it % config.eval_interval != 0 && it != config.iterations {
            continue;
        }
        let check = score(&current, rng)?;
        trace.push(trial, it, check.mean_q);
        if check.is_collapsed(config.collapse_min_fraction) {
            return Ok(DbmTrainOutcome {
                params: healthy.0,
                trace,
                stop: StopReason::Collapsed,
                iteration: healthy.1,
            });
        }
        if check.mean_q >= config.early_stop_q {
            return Ok(DbmTrainOutcome {
                params: current,
                trace,
                stop: StopReason::TargetReached,
                iteration: it,
            });
        }
        healthy = (current.clone(), it);
    }
    Ok(DbmTrainOutcome {
        params: current,
        trace,
        stop: StopReason::IterationCap,
        iteration: config.iterations,
    })
}
