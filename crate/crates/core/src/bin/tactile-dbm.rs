use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tactile_dbm::connectivity::ReceptiveFieldKind;
use tactile_dbm::decoder::DecodeMode;
use tactile_dbm::harness::{
    all_passed, cmd_decode, cmd_homeostasis, cmd_scenarios, cmd_simulate_skin, cmd_train, Criterion, ExperimentConfig,
    SkinStream, CHECKPOINT_DIR,
};
use tactile_dbm::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_CHECK: u8 = 3;

#[derive(Parser)]
#[command(
    name = "tactile-dbm",
    version,
    about = "Tactile hallucinations in a deep Boltzmann machine"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Flat key-value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_kind)]
    receptive_field: Option<ReceptiveFieldKind>,
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed; trial t uses seed + t.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 3 if the command's acceptance thresholds fail.
    #[arg(long)]
    check: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Stream {
    Triangles,
    Blank,
    SingleCell,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Stochastic,
    Threshold,
}

#[derive(Subcommand)]
enum Command {
    /// Pretrain and fine-tune one DBM per trial.
    Train {
        #[command(flatten)]
        common: Common,
    },
    /// Score pattern, corrupted and blank input on trained checkpoints.
    Scenarios {
        #[command(flatten)]
        common: Common,
        /// Checkpoint directory; defaults to <out>/checkpoints.
        #[arg(long)]
        checkpoints: Option<PathBuf>,
    },
    /// Run homeostatic bias adaptation on trained checkpoints.
    Homeostasis {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoints: Option<PathBuf>,
        /// Ablation: run with zero adaptation rate.
        #[arg(long)]
        eta_zero: bool,
    },
    /// Generate a dataset from simulated force frames.
    SimulateSkin {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 30)]
        rounds: usize,
        #[arg(long, value_enum, default_value = "triangles")]
        stream: Stream,
        /// Add sub-threshold sensor noise.
        #[arg(long)]
        noise: bool,
    },
    /// Decode deepest-layer states into patterns and LED frames.
    Decode {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
        /// One hidden state per line, written as 0/1 characters.
        #[arg(long)]
        states: PathBuf,
        #[arg(long, value_enum, default_value = "threshold")]
        mode: Mode,
    },
}

fn parse_kind(s: &str) -> Result<ReceptiveFieldKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load_config(common: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path).map_err(|e| match e {
            Error::Io(io) => Error::Config(format!("cannot read {}: {io}", path.display())),
            other => other,
        })?,
        None => ExperimentConfig::default(),
    };
    if let Some(k) = common.receptive_field {
        cfg.receptive_field = k;
    }
    if let Some(t) = common.trials {
        cfg.trials = t;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.output_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report(criteria: &[Criterion]) {
    for c in criteria {
        println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
}

fn run(command: Command) -> Result<bool, Error> {
    match command {
        Command::Train { common } => {
            let cfg = load_config(&common)?;
            let r = cmd_train(&cfg)?;
            println!(
                "trained {} {} networks into {}",
                r.trials.len(),
                r.kind,
                cfg.output_dir.display()
            );
            let checks = r.check();
            report(&checks);
            Ok(!common.check || all_passed(&checks))
        }
        Command::Scenarios { common, checkpoints } => {
            let cfg = load_config(&common)?;
            let dir = checkpoints.unwrap_or_else(|| cfg.output_dir.join(CHECKPOINT_DIR));
            let r = cmd_scenarios(&cfg, &dir)?;
            let m = r.means();
            println!(
                "{}: Q_pattern {:.3}  Q_corrupted {:.3}  Q_blank {:.3}",
                r.kind, m.q_pattern, m.q_corrupted, m.q_blank
            );
            let checks = r.check();
            report(&checks);
            Ok(!common.check || all_passed(&checks))
        }
        Command::Homeostasis {
            common,
            checkpoints,
            eta_zero,
        } => {
            let mut cfg = load_config(&common)?;
            if eta_zero {
                cfg.homeo.eta = 0.0;
            }
            let dir = checkpoints.unwrap_or_else(|| cfg.output_dir.join(CHECKPOINT_DIR));
            let r = cmd_homeostasis(&cfg, &dir)?;
            let rho = r.rho.map_or("undefined".to_string(), |x| format!("{x:.3}"));
            println!("{}: mean dQ_gain {:.3}  rho {rho}", r.kind, r.mean_gain());
            let checks = r.check(cfg.homeo.steps);
            report(&checks);
            Ok(!common.check || all_passed(&checks))
        }
        Command::SimulateSkin {
            common,
            rounds,
            stream,
            noise,
        } => {
            let cfg = load_config(&common)?;
            let stream = match stream {
                Stream::Triangles => SkinStream::Triangles,
                Stream::Blank => SkinStream::Blank,
                Stream::SingleCell => SkinStream::SingleCell,
            };
            let r = cmd_simulate_skin(&cfg, rounds, stream, noise)?;
            println!(
                "accepted {}/{} rounds (rate {:.3}), {} distinct patterns written to {}",
                r.accepted.len(),
                r.rounds,
                r.acceptance_rate(),
                r.dataset.len(),
                r.path.display()
            );
            Ok(true)
        }
        Command::Decode {
            common,
            checkpoint,
            states,
            mode,
        } => {
            let cfg = load_config(&common)?;
            let mode = match mode {
                Mode::Stochastic => DecodeMode::Stochastic,
                Mode::Threshold => DecodeMode::Threshold,
            };
            let r = cmd_decode(&cfg, &checkpoint, &states, mode)?;
            for p in &r.patterns {
                println!(
                    "{}\n",
                    p.to_grid(tactile_dbm::patterns::SkinGeometry::STANDARD, 'B', 'G')
                );
            }
            println!("decoded {} states into {}", r.patterns.len(), cfg.output_dir.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => EXIT_CONFIG,
                _ => EXIT_IO,
            })
        }
    }
}
