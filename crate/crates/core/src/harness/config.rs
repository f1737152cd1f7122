//! Flat key-value experiment configuration.
//!
//! One `key = value` pair per line; `#` starts a comment. The skin keys use
//! the upper-case names of the acquisition firmware, everything else is
//! lower case. Unknown keys are rejected so that typos do not silently fall
//! back to defaults.
//!
//! ```text
//! MAX_FORCE = 0.012
//! MIN_NUMBER_OF_CELLS = 2
//! receptive_field = circular
//! trials = 10
//! learning_rate = 0.03
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::boltzmann::TrainConfig;
use crate::connectivity::ReceptiveFieldKind;
use crate::error::{Error, Result};
use crate::homeostasis::HomeostasisConfig;
use crate::patterns::AcquisitionConfig;

use super::ScenarioConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub receptive_field: ReceptiveFieldKind,
    pub train: TrainConfig,
    pub homeo: HomeostasisConfig,
    pub acquisition: AcquisitionConfig,
    pub scenarios: ScenarioConfig,
    pub trials: usize,
    /// Trial `t` runs with seed `seed + t`.
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Pattern file to train on; the built-in triangle set when absent.
    pub dataset: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            receptive_field: ReceptiveFieldKind::Circular,
            train: TrainConfig::default(),
            homeo: HomeostasisConfig::default(),
            acquisition: AcquisitionConfig::default(),
            scenarios: ScenarioConfig::default(),
            trials: 10,
            seed: 0,
            output_dir: PathBuf::from("out"),
            dataset: None,
        }
    }
}

fn value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Config(format!("invalid value `{raw}` for `{key}`")))
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.scenarios.samples == 0 {
            return Err(Error::Config("scenario_samples must be at least 1".into()));
        }
        self.train.validate()?;
        self.homeo.validate()?;
        self.acquisition.validate()
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        match key {
            "MAX_FORCE" => self.acquisition.force_threshold = value(key, raw)?,
            "MIN_NUMBER_OF_CELLS" => self.acquisition.min_cells = value(key, raw)?,
            "COMBINE_ITER" => self.acquisition.combine_iter = value(key, raw)?,
            "DISPLAY_DURATION" => self.acquisition.display_duration = value(key, raw)?,
            "receptive_field" => self.receptive_field = raw.parse()?,
            "trials" => self.trials = value(key, raw)?,
            "seed" => self.seed = value(key, raw)?,
            "output_dir" => self.output_dir = PathBuf::from(raw),
            "dataset" => self.dataset = Some(PathBuf::from(raw)),
            "learning_rate" => self.train.learning_rate = value(key, raw)?,
            "iterations" => self.train.iterations = value(key, raw)?,
            "particle_count" => self.train.particle_count = value(key, raw)?,
            "gibbs_steps_per_update" => self.train.gibbs_steps_per_update = value(key, raw)?,
            "mean_field_passes" => self.train.mean_field_passes = value(key, raw)?,
            "eval_interval" => self.train.eval_interval = value(key, raw)?,
            "eval_samples" => self.train.eval_samples = value(key, raw)?,
            "sample_burn_in" => self.train.sample_burn_in = value(key, raw)?,
            "early_stop_q" => self.train.early_stop_q = value(key, raw)?,
            "collapse_min_fraction" => self.train.collapse_min_fraction = value(key, raw)?,
            "eta" => self.homeo.eta = value(key, raw)?,
            "homeostasis_steps" => self.homeo.steps = value(key, raw)?,
            "baseline_sweeps" => self.homeo.baseline_sweeps = value(key, raw)?,
            "activity_window" => self.homeo.activity_window = value(key, raw)?,
            "decode_samples" => self.homeo.decode_samples = value(key, raw)?,
            "clamp_sweeps" => self.scenarios.clamp_sweeps = value(key, raw)?,
            "scenario_samples" => self.scenarios.samples = value(key, raw)?,
            "corrupt_cells" => self.scenarios.corrupt_cells = value(key, raw)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Parses a configuration on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            cfg.set(key.trim(), raw.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Every setting as `(key, value)`, in the order `to_text` writes them.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let (t, h, a, s) = (&self.train, &self.homeo, &self.acquisition, &self.scenarios);
        let mut out = vec![
            ("MAX_FORCE", a.force_threshold.to_string()),
            ("MIN_NUMBER_OF_CELLS", a.min_cells.to_string()),
            ("COMBINE_ITER", a.combine_iter.to_string()),
            ("DISPLAY_DURATION", a.display_duration.to_string()),
            ("receptive_field", self.receptive_field.to_string()),
            ("trials", self.trials.to_string()),
            ("seed", self.seed.to_string()),
            ("output_dir", self.output_dir.display().to_string()),
            ("learning_rate", t.learning_rate.to_string()),
            ("iterations", t.iterations.to_string()),
            ("particle_count", t.particle_count.to_string()),
            ("gibbs_steps_per_update", t.gibbs_steps_per_update.to_string()),
            ("mean_field_passes", t.mean_field_passes.to_string()),
            ("eval_interval", t.eval_interval.to_string()),
            ("eval_samples", t.eval_samples.to_string()),
            ("sample_burn_in", t.sample_burn_in.to_string()),
            ("early_stop_q", t.early_stop_q.to_string()),
            ("collapse_min_fraction", t.collapse_min_fraction.to_string()),
            ("eta", h.eta.to_string()),
            ("homeostasis_steps", h.steps.to_string()),
            ("baseline_sweeps", h.baseline_sweeps.to_string()),
            ("activity_window", h.activity_window.to_string()),
            ("decode_samples", h.decode_samples.to_string()),
            ("clamp_sweeps", s.clamp_sweeps.to_string()),
            ("scenario_samples", s.samples.to_string()),
            ("corrupt_cells", s.corrupt_cells.to_string()),
        ];
        if let Some(d) = &self.dataset {
            out.push(("dataset", d.display().to_string()));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            writeln!(out, "{k} = {v}").unwrap();
        }
        out
    }
}
