//! Per-trial building blocks shared by the commands: training, scenario
//! scoring and the homeostasis run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::boltzmann::{clamp_and_infer, pretrain_dbn, train_dbm, DbmParams, Phase, QTrace, StopReason, TrainConfig};
use crate::connectivity::{build_mask, ReceptiveFieldKind};
use crate::decoder::{decode, DecodeConfig, DecodeMode};
use crate::error::Result;
use crate::homeostasis::{measure_baseline, run_homeostasis, HomeostasisConfig};
use crate::metrics::{performance_q, ScenarioResult};
use crate::patterns::{corrupt, Dataset, SkinGeometry, TactilePattern};

/// Independent random streams used within one trial. Scoring the blank
/// input before and after homeostasis shares one stream, so both are
/// measured under identical sampling noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Training = 0,
    ScenarioPattern = 1,
    ScenarioCorrupted = 2,
    ScenarioBlank = 3,
    Homeostasis = 4,
}

pub fn stage_rng(seed: u64, stage: Stage) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stage as u64);
    rng
}

/// Seed of trial `t`: `base_seed + t`.
pub fn trial_seed(base_seed: u64, trial: usize) -> u64 {
    base_seed.wrapping_add(trial as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Pattern,
    Corrupted,
    Blank,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    /// Gibbs sweeps with the visible layer clamped before decoding.
    pub clamp_sweeps: usize,
    /// Clamp-and-decode repetitions averaged into one score.
    pub samples: usize,
    /// Active cells switched off for the corrupted scenario.
    pub corrupt_cells: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            clamp_sweeps: 20,
            samples: 100,
            corrupt_cells: 2,
        }
    }
}

/// Mean `Q` over `samples` repetitions of: clamp the scenario input (the
/// dataset patterns are cycled through), infer the hidden layers from a
/// fresh random start, decode the deepest layer once.
pub fn scenario_q(
    params: &DbmParams,
    dataset: &Dataset,
    scenario: Scenario,
    config: &ScenarioConfig,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let decode_cfg = DecodeConfig {
        mode: DecodeMode::Stochastic,
        samples_per_decode: 1,
    };
    let blank = TactilePattern::blank(params.n_visible());
    let mut total = 0.0;
    for rep in 0..config.samples {
        let source = &dataset.patterns()[rep % dataset.len()];
        let input = match scenario {
            Scenario::Pattern => source.clone(),
            Scenario::Corrupted => corrupt(source, config.corrupt_cells.min(source.active_count()), rng)?,
            Scenario::Blank => blank.clone(),
        };
        let (_, h2) = clamp_and_infer(params, &input, config.clamp_sweeps, rng)?;
        total += performance_q(&decode(params, &h2, &decode_cfg, rng)?, dataset)?;
    }
    Ok(total / config.samples as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioScores {
    pub q_pattern: f64,
    pub q_corrupted: f64,
    pub q_blank: f64,
}

pub fn evaluate_scenarios(
    params: &DbmParams,
    dataset: &Dataset,
    config: &ScenarioConfig,
    seed: u64,
) -> Result<ScenarioScores> {
    Ok(ScenarioScores {
        q_pattern: scenario_q(
            params,
            dataset,
            Scenario::Pattern,
            config,
            &mut stage_rng(seed, Stage::ScenarioPattern),
        )?,
        q_corrupted: scenario_q(
            params,
            dataset,
            Scenario::Corrupted,
            config,
            &mut stage_rng(seed, Stage::ScenarioCorrupted),
        )?,
        q_blank: scenario_q(
            params,
            dataset,
            Scenario::Blank,
            config,
            &mut stage_rng(seed, Stage::ScenarioBlank),
        )?,
    })
}

#[derive(Debug, Clone)]
pub struct TrainedTrial {
    pub trial: usize,
    pub seed: u64,
    pub params: DbmParams,
    pub curves: Vec<(Phase, QTrace)>,
    pub stop: StopReason,
}

impl TrainedTrial {
    /// Last recorded sampled `Q` of a phase.
    pub fn final_q(&self, phase: Phase) -> Option<f64> {
        self.curves
            .iter()
            .find(|(p, _)| *p == phase)
            .and_then(|(_, t)| t.last_q())
    }
}

/// Pretrains both layer pairs and fine-tunes the assembled DBM.
pub fn train_trial(
    kind: ReceptiveFieldKind,
    dataset: &Dataset,
    config: &TrainConfig,
    trial: usize,
    seed: u64,
) -> Result<TrainedTrial> {
    let mask = build_mask(kind, SkinGeometry::STANDARD);
    let mut rng = stage_rng(seed, Stage::Training);
    let pre = pretrain_dbn(dataset, &mask, &mask, config, trial, &mut rng)?;
    let fine = train_dbm(pre.params, dataset, config, trial, &mut rng)?;
    Ok(TrainedTrial {
        trial,
        seed,
        params: fine.params,
        curves: vec![
            (Phase::Pretrain1, pre.phase1),
            (Phase::Pretrain2, pre.phase2),
            (Phase::Dbm, fine.trace),
        ],
        stop: fine.stop,
    })
}

#[derive(Debug, Clone)]
pub struct HomeostasisTrial {
    pub trial: usize,
    pub seed: u64,
    pub result: ScenarioResult,
    pub trace: QTrace,
    pub adapted: DbmParams,
}

/// Scenario scores, then baseline, homeostasis and the post-adaptation
/// blank score for one trained network.
pub fn homeostasis_trial(
    params: &DbmParams,
    dataset: &Dataset,
    homeo: &HomeostasisConfig,
    scenarios: &ScenarioConfig,
    trial: usize,
    seed: u64,
) -> Result<HomeostasisTrial> {
    let before = evaluate_scenarios(params, dataset, scenarios, seed)?;
    let mut rng = stage_rng(seed, Stage::Homeostasis);
    let mu = measure_baseline(params, dataset, homeo, &mut rng)?;
    let (adapted, trace) = run_homeostasis(params, &mu, homeo, dataset, trial, &mut rng)?;
    let q_hallucination = scenario_q(
        &adapted,
        dataset,
        Scenario::Blank,
        scenarios,
        &mut stage_rng(seed, Stage::ScenarioBlank),
    )?;
    Ok(HomeostasisTrial {
        trial,
        seed,
        result: ScenarioResult::new(before.q_pattern, before.q_corrupted, before.q_blank, q_hallucination),
        trace,
        adapted,
    })
}
