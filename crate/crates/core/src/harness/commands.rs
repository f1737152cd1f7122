//! The experiment commands. Each one reads its inputs from disk, runs the
//! trials in parallel and writes CSVs through a single serial stage, so
//! the files are byte-identical across reruns of the same configuration.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::boltzmann::{read_checkpoint, write_checkpoint, Checkpoint, Phase, QTrace, StopReason};
use crate::connectivity::ReceptiveFieldKind;
use crate::decoder::{decode, DecodeConfig, DecodeMode};
use crate::error::{Error, Result};
use crate::metrics::{mean, pearson_correlation, ScenarioResult};
use crate::patterns::{
    acquire_pattern, make_triangle_dataset, read_dataset, render_led_frames, simulate_round, write_patterns, Dataset,
    SkinGeometry, TactilePattern,
};

use super::{evaluate_scenarios, homeostasis_trial, train_trial, trial_seed, ExperimentConfig, ScenarioScores};

pub const TRAINING_CSV: &str = "training.csv";
pub const SCENARIOS_CSV: &str = "scenarios.csv";
pub const HOMEOSTASIS_CSV: &str = "homeostasis.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const CORRELATION_CSV: &str = "correlation.csv";
pub const CHECKPOINT_DIR: &str = "checkpoints";
pub const ADAPTED_CHECKPOINT_DIR: &str = "checkpoints_homeostasis";

/// One thresholded outcome reported by `--check`.
#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Criterion {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

pub fn all_passed(criteria: &[Criterion]) -> bool {
    criteria.iter().all(|c| c.passed)
}

/// The configured pattern file, or the triangle set.
pub fn load_dataset(config: &ExperimentConfig) -> Result<Dataset> {
    match &config.dataset {
        Some(path) => read_dataset(path, config.acquisition.min_cells),
        None => Ok(make_triangle_dataset(SkinGeometry::STANDARD)),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

pub fn checkpoint_file(dir: &Path, trial: usize) -> PathBuf {
    dir.join(format!("trial_{trial:03}.ckpt"))
}

/// A trained network together with the trial it belongs to.
#[derive(Debug, Clone)]
pub struct TrialCheckpoint {
    pub trial: usize,
    pub path: PathBuf,
    pub checkpoint: Checkpoint,
}

impl TrialCheckpoint {
    pub fn kind(&self) -> Option<ReceptiveFieldKind> {
        self.checkpoint.config_value("receptive_field")?.parse().ok()
    }
}

/// Reads every `trial_NNN.ckpt` in `dir`, ordered by trial index.
pub fn load_checkpoints(dir: &Path) -> Result<Vec<TrialCheckpoint>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        let Some(trial) = name
            .strip_prefix("trial_")
            .and_then(|n| n.strip_suffix(".ckpt"))
            .and_then(|n| n.parse().ok())
        else {
            continue;
        };
        let checkpoint = read_checkpoint(&path)?;
        out.push(TrialCheckpoint {
            trial,
            path,
            checkpoint,
        });
    }
    if out.is_empty() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("no checkpoints in {}", dir.display()),
        )));
    }
    out.sort_by_key(|c| c.trial);
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct TrainedNetwork {
    pub trial: usize,
    pub seed: u64,
    pub curves: Vec<(Phase, QTrace)>,
    pub stop: StopReason,
    pub checkpoint: PathBuf,
}

impl TrainedNetwork {
    pub fn final_q(&self, phase: Phase) -> Option<f64> {
        self.curves
            .iter()
            .find(|(p, _)| *p == phase)
            .and_then(|(_, t)| t.last_q())
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub kind: ReceptiveFieldKind,
    pub trials: Vec<TrainedNetwork>,
}

impl TrainReport {
    /// Mean over trials of the last sampled `Q` of `phase`.
    pub fn mean_final_q(&self, phase: Phase) -> f64 {
        mean(&self.trials.iter().filter_map(|t| t.final_q(phase)).collect::<Vec<_>>())
    }

    pub fn check(&self) -> Vec<Criterion> {
        let p1 = self.mean_final_q(Phase::Pretrain1);
        let p2 = self.mean_final_q(Phase::Pretrain2);
        let dbm = self.mean_final_q(Phase::Dbm);
        vec![
            Criterion::new(
                "pretraining Q >= 0.80",
                p1 >= 0.8 && p2 >= 0.8,
                format!("phase 1 {p1:.3}, phase 2 {p2:.3}"),
            ),
            Criterion::new("fine-tuned Q >= 0.90", dbm >= 0.9, format!("{dbm:.3}")),
        ]
    }
}

/// Trains `config.trials` networks and writes their checkpoints and curves.
pub fn cmd_train(config: &ExperimentConfig) -> Result<TrainReport> {
    config.validate()?;
    let dataset = load_dataset(config)?;
    let out = &config.output_dir;
    let ck_dir = out.join(CHECKPOINT_DIR);
    create_dir(&ck_dir)?;
    let kind = config.receptive_field;

    let trained: Vec<_> = (0..config.trials)
        .into_par_iter()
        .map(|t| train_trial(kind, &dataset, &config.train, t, trial_seed(config.seed, t)))
        .collect::<Result<_>>()?;

    let mut curves = csv_writer(&out.join(TRAINING_CSV))?;
    curves.write_record(["phase", "iteration", "trial", "q_mean", "seed"])?;
    let mut report = TrainReport {
        kind,
        trials: Vec::new(),
    };
    for tr in trained {
        for (phase, trace) in &tr.curves {
            for e in trace.entries() {
                curves.write_record([
                    phase.as_str().to_string(),
                    e.step.to_string(),
                    e.trial.to_string(),
                    e.q.to_string(),
                    tr.seed.to_string(),
                ])?;
            }
        }
        let mut echo = vec![
            ("receptive_field".to_string(), kind.to_string()),
            ("trial".to_string(), tr.trial.to_string()),
        ];
        echo.extend(
            config
                .entries()
                .into_iter()
                .filter(|(k, _)| !matches!(*k, "receptive_field" | "trials" | "seed" | "output_dir" | "dataset"))
                .map(|(k, v)| (k.to_string(), v)),
        );
        let path = checkpoint_file(&ck_dir, tr.trial);
        write_checkpoint(
            &path,
            &Checkpoint {
                params: tr.params,
                seed: tr.seed,
                config: echo,
            },
        )?;
        report.trials.push(TrainedNetwork {
            trial: tr.trial,
            seed: tr.seed,
            curves: tr.curves,
            stop: tr.stop,
            checkpoint: path,
        });
    }
    curves.flush()?;
    Ok(report)
}

fn checkpoint_kind(checkpoints: &[TrialCheckpoint], fallback: ReceptiveFieldKind) -> ReceptiveFieldKind {
    checkpoints.first().and_then(TrialCheckpoint::kind).unwrap_or(fallback)
}

#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub kind: ReceptiveFieldKind,
    pub rows: Vec<(usize, u64, ScenarioScores)>,
}

impl ScenarioReport {
    pub fn means(&self) -> ScenarioScores {
        let m = |f: fn(&ScenarioScores) -> f64| mean(&self.rows.iter().map(|(_, _, s)| f(s)).collect::<Vec<_>>());
        ScenarioScores {
            q_pattern: m(|s| s.q_pattern),
            q_corrupted: m(|s| s.q_corrupted),
            q_blank: m(|s| s.q_blank),
        }
    }

    pub fn check(&self) -> Vec<Criterion> {
        let s = self.means();
        let detail = format!("{:.3} / {:.3} / {:.3}", s.q_pattern, s.q_corrupted, s.q_blank);
        vec![
            Criterion::new(
                "Q_pattern in [0.75, 1]",
                (0.75..=1.0).contains(&s.q_pattern),
                detail.clone(),
            ),
            Criterion::new(
                "Q_pattern > Q_corrupted >= Q_blank",
                s.q_pattern > s.q_corrupted && s.q_corrupted >= s.q_blank,
                detail,
            ),
        ]
    }
}

/// Scores the pattern, corrupted and blank scenarios on every checkpoint.
pub fn cmd_scenarios(config: &ExperimentConfig, checkpoints: &Path) -> Result<ScenarioReport> {
    config.validate()?;
    let dataset = load_dataset(config)?;
    let networks = load_checkpoints(checkpoints)?;
    create_dir(&config.output_dir)?;

    let rows: Vec<_> = networks
        .par_iter()
        .map(|n| {
            let s = evaluate_scenarios(&n.checkpoint.params, &dataset, &config.scenarios, n.checkpoint.seed)?;
            Ok((n.trial, n.checkpoint.seed, s))
        })
        .collect::<Result<_>>()?;

    let mut w = csv_writer(&config.output_dir.join(SCENARIOS_CSV))?;
    w.write_record(["trial", "q_pattern", "q_corrupted", "q_blank", "dq_loss", "seed"])?;
    for (trial, seed, s) in &rows {
        w.write_record([
            trial.to_string(),
            s.q_pattern.to_string(),
            s.q_corrupted.to_string(),
            s.q_blank.to_string(),
            (s.q_pattern - s.q_blank).to_string(),
            seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(ScenarioReport {
        kind: checkpoint_kind(&networks, config.receptive_field),
        rows,
    })
}

#[derive(Debug, Clone)]
pub struct HomeostasisRow {
    pub trial: usize,
    pub seed: u64,
    pub result: ScenarioResult,
    pub trace: QTrace,
}

#[derive(Debug, Clone)]
pub struct HomeostasisReport {
    pub kind: ReceptiveFieldKind,
    pub eta: f64,
    pub rows: Vec<HomeostasisRow>,
    /// Pearson correlation of `ΔQ_loss` and `ΔQ_gain` across trials; `None`
    /// when undefined (fewer than two trials or a constant series).
    pub rho: Option<f64>,
}

impl HomeostasisReport {
    pub fn mean_gain(&self) -> f64 {
        mean(&self.rows.iter().map(|r| r.result.dq_gain).collect::<Vec<_>>())
    }

    /// Trial-averaged trace means over `[0, 100)` and `[steps - 500, steps)`.
    pub fn trace_head_tail(&self, steps: usize) -> (f64, f64) {
        let head = mean(
            &self
                .rows
                .iter()
                .map(|r| r.trace.mean_between(0, 100))
                .collect::<Vec<_>>(),
        );
        let tail = mean(
            &self
                .rows
                .iter()
                .map(|r| r.trace.mean_between(steps.saturating_sub(500), steps))
                .collect::<Vec<_>>(),
        );
        (head, tail)
    }

    pub fn check(&self, steps: usize) -> Vec<Criterion> {
        let gain = self.mean_gain();
        if self.eta == 0.0 {
            return vec![Criterion::new(
                "ablation |dQ_gain| <= 0.03",
                gain.abs() <= 0.03,
                format!("{gain:.3}"),
            )];
        }
        let (head, tail) = self.trace_head_tail(steps);
        let rho = self.rho.unwrap_or(f64::NAN);
        vec![
            Criterion::new("mean dQ_gain >= 0.10", gain >= 0.1, format!("{gain:.3}")),
            Criterion::new("trace tail > head", tail > head, format!("{head:.3} -> {tail:.3}")),
            Criterion::new("rho(dQ_loss, dQ_gain) >= 0.5", rho >= 0.5, format!("{rho:.3}")),
        ]
    }
}

/// Runs homeostasis on every checkpoint. Adapted parameters go to a
/// separate directory; the input checkpoints are only read.
pub fn cmd_homeostasis(config: &ExperimentConfig, checkpoints: &Path) -> Result<HomeostasisReport> {
    config.validate()?;
    let dataset = load_dataset(config)?;
    let networks = load_checkpoints(checkpoints)?;
    let out = &config.output_dir;
    let adapted_dir = out.join(ADAPTED_CHECKPOINT_DIR);
    create_dir(&adapted_dir)?;

    let trials: Vec<_> = networks
        .par_iter()
        .map(|n| {
            homeostasis_trial(
                &n.checkpoint.params,
                &dataset,
                &config.homeo,
                &config.scenarios,
                n.trial,
                n.checkpoint.seed,
            )
        })
        .collect::<Result<_>>()?;

    let mut trace_csv = csv_writer(&out.join(HOMEOSTASIS_CSV))?;
    trace_csv.write_record(["trial", "step", "q", "seed"])?;
    let mut summary = csv_writer(&out.join(SUMMARY_CSV))?;
    summary.write_record([
        "trial",
        "q_pattern",
        "q_corrupted",
        "q_blank",
        "q_hallucination",
        "dq_loss",
        "dq_gain",
        "seed",
    ])?;
    let mut rows = Vec::new();
    for (h, n) in trials.into_iter().zip(&networks) {
        for e in h.trace.entries() {
            trace_csv.write_record([
                e.trial.to_string(),
                e.step.to_string(),
                e.q.to_string(),
                h.seed.to_string(),
            ])?;
        }
        let r = h.result;
        summary.write_record([
            h.trial.to_string(),
            r.q_pattern.to_string(),
            r.q_corrupted.to_string(),
            r.q_blank.to_string(),
            r.q_hallucination.to_string(),
            r.dq_loss.to_string(),
            r.dq_gain.to_string(),
            h.seed.to_string(),
        ])?;
        let mut echo = n.checkpoint.config.clone();
        echo.push(("homeostasis_eta".to_string(), config.homeo.eta.to_string()));
        write_checkpoint(
            &checkpoint_file(&adapted_dir, h.trial),
            &Checkpoint {
                params: h.adapted,
                seed: h.seed,
                config: echo,
            },
        )?;
        rows.push(HomeostasisRow {
            trial: h.trial,
            seed: h.seed,
            result: r,
            trace: h.trace,
        });
    }
    trace_csv.flush()?;
    summary.flush()?;

    let loss: Vec<f64> = rows.iter().map(|r| r.result.dq_loss).collect();
    let gain: Vec<f64> = rows.iter().map(|r| r.result.dq_gain).collect();
    let rho = pearson_correlation(&loss, &gain).ok();
    let kind = checkpoint_kind(&networks, config.receptive_field);
    let mut corr = csv_writer(&out.join(CORRELATION_CSV))?;
    corr.write_record(["kind", "rho", "n_trials"])?;
    corr.write_record([
        kind.to_string(),
        rho.map(|r| r.to_string()).unwrap_or_default(),
        rows.len().to_string(),
    ])?;
    corr.flush()?;

    Ok(HomeostasisReport {
        kind,
        eta: config.homeo.eta,
        rows,
        rho,
    })
}

/// What the simulated hand presses in each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkinStream {
    /// Cycles through the triangle patterns.
    Triangles,
    /// Nothing is ever pressed.
    Blank,
    /// A single cell per round, too few to be accepted.
    SingleCell,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkinReport {
    pub rounds: usize,
    pub accepted: Vec<TactilePattern>,
    /// Distinct accepted patterns in order of first appearance.
    pub dataset: Vec<TactilePattern>,
    pub path: PathBuf,
}

impl SkinReport {
    pub fn acceptance_rate(&self) -> f64 {
        if self.rounds == 0 {
            return 0.0;
        }
        self.accepted.len() as f64 / self.rounds as f64
    }
}

pub const SKIN_DATASET_FILE: &str = "dataset.txt";

/// Simulates `rounds` acquisition rounds and writes the accepted patterns.
pub fn cmd_simulate_skin(
    config: &ExperimentConfig,
    rounds: usize,
    stream: SkinStream,
    noise: bool,
) -> Result<SkinReport> {
    config.acquisition.validate()?;
    let geom = SkinGeometry::STANDARD;
    let triangles = make_triangle_dataset(geom);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut accepted = Vec::new();
    for r in 0..rounds {
        let touch = match stream {
            SkinStream::Triangles => triangles.patterns()[r % triangles.len()].clone(),
            SkinStream::Blank => TactilePattern::blank(geom.cell_count()),
            SkinStream::SingleCell => TactilePattern::from_active(geom.cell_count(), &[r % geom.cell_count()])?,
        };
        let frames = simulate_round(
            &touch,
            &config.acquisition,
            r * config.acquisition.combine_iter,
            noise,
            &mut rng,
        );
        if let Some(p) = acquire_pattern(&frames, &config.acquisition)? {
            accepted.push(p);
        }
    }
    let mut dataset: Vec<TactilePattern> = Vec::new();
    for p in &accepted {
        if !dataset.contains(p) {
            dataset.push(p.clone());
        }
    }
    create_dir(&config.output_dir)?;
    let path = config.output_dir.join(SKIN_DATASET_FILE);
    if dataset.is_empty() {
        fs::write(&path, "")?;
    } else {
        write_patterns(&path, &dataset)?;
    }
    Ok(SkinReport {
        rounds,
        accepted,
        dataset,
        path,
    })
}

/// Parses hidden states written one per line as `'0'`/`'1'` characters.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_hidden_states(text: &str, units: usize) -> Result<Vec<TactilePattern>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.len() != units {
            return Err(Error::parse(
                i + 1,
                format!("expected {units} units, found {}", line.len()),
            ));
        }
        let bits = line
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::parse(i + 1, "hidden states must be written with 0 and 1")),
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(TactilePattern::new(bits));
    }
    Ok(out)
}

pub const DECODED_PATTERNS_FILE: &str = "decoded.txt";
pub const DECODED_LED_FILE: &str = "decoded_led.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeReport {
    pub patterns: Vec<TactilePattern>,
    pub frames: Vec<Vec<String>>,
}

/// Decodes every hidden state in `states` and writes the patterns and
/// their LED frames.
pub fn cmd_decode(
    config: &ExperimentConfig,
    checkpoint: &Path,
    states: &Path,
    mode: DecodeMode,
) -> Result<DecodeReport> {
    config.acquisition.validate()?;
    let ck = read_checkpoint(checkpoint)?;
    let hidden = parse_hidden_states(&fs::read_to_string(states)?, ck.params.n_hidden2())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let decode_cfg = DecodeConfig {
        mode,
        samples_per_decode: 1,
    };
    let patterns = hidden
        .iter()
        .map(|h| decode(&ck.params, &h.into(), &decode_cfg, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let frames: Vec<Vec<String>> = patterns
        .iter()
        .map(|p| render_led_frames(p, &config.acquisition))
        .collect();

    create_dir(&config.output_dir)?;
    if patterns.is_empty() {
        fs::write(config.output_dir.join(DECODED_PATTERNS_FILE), "")?;
    } else {
        write_patterns(&config.output_dir.join(DECODED_PATTERNS_FILE), &patterns)?;
    }
    let led: Vec<String> = frames.iter().flatten().cloned().collect();
    let mut text = led.join("\n\n");
    text.push('\n');
    fs::write(config.output_dir.join(DECODED_LED_FILE), text)?;
    Ok(DecodeReport { patterns, frames })
}
