//! Acceptance suite. Runs as a plain binary (no libtest harness) so that
//! the one-line verdict of every criterion is always printed. A summary
//! line counts the failures; the process exits non-zero on failure only
//! when `ACCEPTANCE_STRICT=1` is set, so the rest of the workspace tests
//! still run.

mod common;

use std::process::ExitCode;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use tactile_dbm::boltzmann::{
    pcd_update_dbm, pcd_update_rbm, visible_distribution, DbmParams, LayerState, Model, PcdState, Phase, RbmParams,
    TrainConfig,
};
use tactile_dbm::connectivity::{build_mask, ConnectivityMask, ReceptiveFieldKind};
use tactile_dbm::decoder::{decode_hidden1_prob, decode_visible_prob};
use tactile_dbm::harness::{
    cmd_scenarios, cmd_simulate_skin, cmd_train, homeostasis_trial, train_trial, trial_seed, ExperimentConfig,
    HomeostasisTrial, SkinStream, TrainedTrial, CHECKPOINT_DIR,
};
use tactile_dbm::homeostasis::{measure_baseline, run_homeostasis, HomeostasisConfig};
use tactile_dbm::metrics::{dice, mean, pearson_correlation, performance_q};
use tactile_dbm::patterns::{make_triangle_dataset, AcquisitionConfig, Dataset, SkinGeometry, TactilePattern};

use common::*;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

/// Collects named sub-checks; passes only if all of them do.
#[derive(Default)]
struct Checks {
    failed: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn check(&mut self, name: &str, ok: bool) {
        if !ok {
            self.failed.push(name.to_string());
        }
    }

    fn note(&mut self, s: String) {
        self.notes.push(s);
    }

    fn finish(self) -> Verdict {
        let mut detail = self.notes.join("; ");
        if !self.failed.is_empty() {
            detail.push_str(&format!(" | failed: {}", self.failed.join(", ")));
        }
        verdict(self.failed.is_empty(), detail)
    }
}

// ---------------------------------------------------------------------------
// Full experiment pipeline shared by criteria 1-4.

struct TrialRun {
    trained: TrainedTrial,
    adapted: HomeostasisTrial,
    ablation: HomeostasisTrial,
}

struct KindRun {
    kind: ReceptiveFieldKind,
    trials: Vec<TrialRun>,
}

struct Pipeline {
    config: ExperimentConfig,
    dataset: Dataset,
    runs: Vec<KindRun>,
}

fn run_trials(
    config: &ExperimentConfig,
    dataset: &Dataset,
    kind: ReceptiveFieldKind,
    range: std::ops::Range<usize>,
) -> Vec<TrialRun> {
    let ablation_cfg = HomeostasisConfig {
        eta: 0.0,
        ..config.homeo.clone()
    };
    range
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(config.seed, t);
            let trained = train_trial(kind, dataset, &config.train, t, seed).expect("training");
            let adapted = homeostasis_trial(&trained.params, dataset, &config.homeo, &config.scenarios, t, seed)
                .expect("homeostasis");
            let ablation = homeostasis_trial(&trained.params, dataset, &ablation_cfg, &config.scenarios, t, seed)
                .expect("ablation");
            TrialRun {
                trained,
                adapted,
                ablation,
            }
        })
        .collect()
}

impl Pipeline {
    fn run(trials: usize) -> Self {
        let config = ExperimentConfig::default();
        let dataset = make_triangle_dataset(SkinGeometry::STANDARD);
        let runs = ReceptiveFieldKind::ALL
            .iter()
            .map(|&kind| KindRun {
                kind,
                trials: run_trials(&config, &dataset, kind, 0..trials),
            })
            .collect();
        Self { config, dataset, runs }
    }

    fn kind(&self, kind: ReceptiveFieldKind) -> &KindRun {
        self.runs.iter().find(|r| r.kind == kind).unwrap()
    }
}

impl KindRun {
    fn mean_of(&self, f: impl Fn(&TrialRun) -> f64) -> f64 {
        mean(&self.trials.iter().map(f).collect::<Vec<_>>())
    }

    fn rho(&self) -> Option<f64> {
        let loss: Vec<f64> = self.trials.iter().map(|t| t.adapted.result.dq_loss).collect();
        let gain: Vec<f64> = self.trials.iter().map(|t| t.adapted.result.dq_gain).collect();
        pearson_correlation(&loss, &gain).ok()
    }
}

fn training(p: &Pipeline) -> Verdict {
    let run = p.kind(ReceptiveFieldKind::Circular);
    let q = |phase: Phase| run.mean_of(|t| t.trained.final_q(phase).unwrap());
    let (p1, p2, dbm) = (q(Phase::Pretrain1), q(Phase::Pretrain2), q(Phase::Dbm));
    let mut c = Checks::default();
    c.note(format!(
        "circular, {} trials: phase 1 {p1:.3}, phase 2 {p2:.3}, DBM {dbm:.3}",
        run.trials.len()
    ));
    c.check("phase 1 >= 0.80", p1 >= 0.8);
    c.check("phase 2 >= 0.80", p2 >= 0.8);
    c.check("DBM >= 0.90", dbm >= 0.9);
    c.finish()
}

/// Reference scores per kind: (Q_pattern, Q_corrupted, Q_blank).
fn reference_table(kind: ReceptiveFieldKind) -> (f64, f64, f64) {
    match kind {
        ReceptiveFieldKind::Circular => (0.87, 0.58, 0.50),
        ReceptiveFieldKind::Linear => (0.83, 0.50, 0.42),
    }
}

fn scenarios(p: &Pipeline) -> Verdict {
    let mut c = Checks::default();
    let mut pattern_means = Vec::new();
    for run in &p.runs {
        let k = run.kind.as_str();
        let pat = run.mean_of(|t| t.adapted.result.q_pattern);
        let cor = run.mean_of(|t| t.adapted.result.q_corrupted);
        let blank = run.mean_of(|t| t.adapted.result.q_blank);
        pattern_means.push(pat);
        c.note(format!("{k} {pat:.3}/{cor:.3}/{blank:.3}"));
        c.check(&format!("{k} Q_pattern in [0.75, 1]"), (0.75..=1.0).contains(&pat));
        c.check(&format!("{k} Q_pattern > Q_corrupted"), pat > cor);
        c.check(&format!("{k} Q_corrupted >= Q_blank"), cor >= blank);
        let (tp, tc, tb) = reference_table(run.kind);
        c.check(&format!("{k} Q_pattern within 0.15 of {tp}"), (pat - tp).abs() <= 0.15);
        c.check(
            &format!("{k} Q_corrupted within 0.15 of {tc}"),
            (cor - tc).abs() <= 0.15,
        );
        c.check(&format!("{k} Q_blank within 0.15 of {tb}"), (blank - tb).abs() <= 0.15);
    }
    let circ = p
        .kind(ReceptiveFieldKind::Circular)
        .mean_of(|t| t.adapted.result.q_pattern);
    let lin = p
        .kind(ReceptiveFieldKind::Linear)
        .mean_of(|t| t.adapted.result.q_pattern);
    c.check("circular Q_pattern >= linear Q_pattern - 0.05", circ >= lin - 0.05);
    c.finish()
}

fn homeostasis(p: &Pipeline) -> Verdict {
    let steps = p.config.homeo.steps;
    let mut c = Checks::default();
    for run in &p.runs {
        let k = run.kind.as_str();
        let gain = run.mean_of(|t| t.adapted.result.dq_gain);
        let head = run.mean_of(|t| t.adapted.trace.mean_between(0, 100));
        let tail = run.mean_of(|t| t.adapted.trace.mean_between(steps - 500, steps));
        let ablation = run.mean_of(|t| t.ablation.result.dq_gain);
        c.note(format!(
            "{k}: gain {gain:.3}, trace {head:.3} -> {tail:.3}, eta=0 gain {ablation:.3}"
        ));
        c.check(&format!("{k} mean dQ_gain >= 0.10"), gain >= 0.1);
        c.check(&format!("{k} trace tail > head"), tail > head);
        c.check(&format!("{k} eta=0 |dQ_gain| <= 0.03"), ablation.abs() <= 0.03);
    }
    c.finish()
}

fn correlation(p: &Pipeline) -> Verdict {
    let rho_text = |r: Option<f64>| r.map_or("undefined".to_string(), |x| format!("{x:.3}"));
    let best = |runs: &[KindRun]| runs.iter().filter_map(|r| r.rho()).fold(f64::NEG_INFINITY, f64::max);
    let mut notes: Vec<String> = p
        .runs
        .iter()
        .map(|r| format!("{} rho {} over {}", r.kind, rho_text(r.rho()), r.trials.len()))
        .collect();
    if best(&p.runs) >= 0.5 {
        return verdict(true, notes.join("; "));
    }
    // Escalate to 20 independently trained networks per kind.
    let extended: Vec<KindRun> = p
        .runs
        .iter()
        .map(|r| {
            let n = r.trials.len();
            let mut trials = run_trials(&p.config, &p.dataset, r.kind, 0..n);
            trials.extend(run_trials(&p.config, &p.dataset, r.kind, n..2 * n));
            KindRun { kind: r.kind, trials }
        })
        .collect();
    notes.extend(
        extended
            .iter()
            .map(|r| format!("escalated {} rho {} over {}", r.kind, rho_text(r.rho()), r.trials.len())),
    );
    verdict(best(&extended) >= 0.5, notes.join("; "))
}

// ---------------------------------------------------------------------------
// Criterion 5: exact-inference oracles.

fn random_rbm(nv: usize, nh: usize, scale: f64, rng: &mut ChaCha8Rng) -> RbmParams {
    let w = Array2::from_shape_fn((nv, nh), |_| rng.random_range(-scale..scale));
    let b = Array1::from_shape_fn(nv, |_| rng.random_range(-scale..scale));
    let c = Array1::from_shape_fn(nh, |_| rng.random_range(-scale..scale));
    RbmParams::new(w, b, c, ConnectivityMask::full(nv, nh)).unwrap()
}

fn exact_oracles() -> Verdict {
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    // (a) analytic free energy against brute-force enumeration.
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = random_rbm(4, 3, 3.0, &mut rng);
        for a in 0..16 {
            let v = bits(a, 4);
            let analytic = p
                .free_energy(&LayerState::from_values(Array1::from(v.clone())).unwrap())
                .unwrap();
            worst = worst.max((analytic - brute_free_energy(&p, &v)).abs());
        }
    }
    c.note(format!("(a) max free-energy error {worst:.1e}"));
    c.check("(a) free energy within 1e-10", worst <= 1e-10);

    // (b) normalisation of the exact visible distribution.
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let p = random_rbm(6, 4, 2.0, &mut rng);
        worst = worst.max((visible_distribution(Model::Rbm(&p)).unwrap().iter().sum::<f64>() - 1.0).abs());
        let lower = random_rbm(4, 3, 2.0, &mut rng);
        let upper = random_rbm(3, 3, 2.0, &mut rng);
        let dbm = DbmParams::from_rbms(&lower, &upper).unwrap();
        worst = worst.max((visible_distribution(Model::Dbm(&dbm)).unwrap().iter().sum::<f64>() - 1.0).abs());
    }
    c.note(format!("(b) max |sum p - 1| {worst:.1e}"));
    c.check("(b) sum p(v) = 1 within 1e-9", worst <= 1e-9);

    // (c) KL(data || model) falls over 500 PCD updates.
    let data_idx = [index_of(&[0, 1, 2]), index_of(&[3, 4, 5])];
    let batch: Vec<LayerState> = data_idx
        .iter()
        .map(|&a| LayerState::from_values(Array1::from(bits(a, 6))).unwrap())
        .collect();
    let cfg = TrainConfig {
        learning_rate: 0.05,
        ..TrainConfig::default()
    };
    let mut rbm = RbmParams::init_random(ConnectivityMask::full(6, 4), &mut rng);
    let mut pcd = PcdState::for_rbm(&rbm, cfg.particle_count, &mut rng).unwrap();
    let kl_start = kl_data_model(&rbm, &data_idx);
    for _ in 0..500 {
        pcd_update_rbm(&mut rbm, &batch, &mut pcd, &cfg, &mut rng).unwrap();
    }
    let kl_end = kl_data_model(&rbm, &data_idx);
    c.note(format!("(c) KL {kl_start:.3} -> {kl_end:.3}"));
    c.check("(c) KL decreases", kl_end < kl_start);

    // (d) accumulated PCD updates point along the exact gradient. Unit 1 is
    // on in both patterns so the gradient does not vanish at a near-uniform
    // start.
    let data_idx = [index_of(&[0, 1]), index_of(&[1, 2, 3])];
    let batch: Vec<LayerState> = data_idx
        .iter()
        .map(|&a| LayerState::from_values(Array1::from(bits(a, 4))).unwrap())
        .collect();
    // Many particles so each update tracks the expected PCD gradient.
    let cfg = TrainConfig {
        learning_rate: 0.01,
        particle_count: 200,
        ..TrainConfig::default()
    };
    let mut rbm = RbmParams::init_random(ConnectivityMask::full(4, 3), &mut rng);
    let mut pcd = PcdState::for_rbm(&rbm, cfg.particle_count, &mut rng).unwrap();
    let mut products = Vec::new();
    for _ in 0..5 {
        let start = flatten(&rbm);
        let grad = exact_gradient(&rbm, &data_idx);
        for _ in 0..50 {
            pcd_update_rbm(&mut rbm, &batch, &mut pcd, &cfg, &mut rng).unwrap();
        }
        let delta: Vec<f64> = flatten(&rbm).iter().zip(&start).map(|(a, b)| a - b).collect();
        products.push(delta.iter().zip(&grad).map(|(d, g)| d * g).sum::<f64>());
    }
    c.note(format!(
        "(d) inner products over 250 updates {:?}",
        products.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>()
    ));
    c.check(
        "(d) positive inner product at 5 checkpoints",
        products.iter().all(|&x| x > 0.0),
    );
    c.finish()
}

// ---------------------------------------------------------------------------
// Criterion 6: metric and pipeline invariants.

fn invariants() -> Verdict {
    let mut c = Checks::default();

    // Dice over every pair of 6-cell patterns.
    let pats: Vec<TactilePattern> = (0..64)
        .map(|s| TactilePattern::new((0..6).map(|i| (s >> i) & 1 == 1).collect()))
        .collect();
    let mut dice_ok = true;
    for a in &pats {
        for b in &pats {
            let d = dice(a, b).unwrap();
            dice_ok &= d == dice(b, a).unwrap() && (0.0..=1.0).contains(&d) && ((d == 1.0) == (a == b));
        }
    }
    c.check("Dice symmetry, bounds and identity", dice_ok);

    // Q against a direct maximum over the dataset, all 2^18 patterns.
    let d = make_triangle_dataset(SkinGeometry::STANDARD);
    let q_ok = (0..1usize << 18).into_par_iter().all(|s| {
        let p = TactilePattern::new((0..18).map(|i| (s >> i) & 1 == 1).collect());
        let direct = d.iter().map(|t| dice(&p, t).unwrap()).fold(0.0, f64::max);
        performance_q(&p, &d).unwrap() == direct
    });
    c.check("Q equals brute-force max", q_ok);
    c.note("Dice and Q exhaustive".into());

    // Masked weights stay exactly zero through 1000 joint updates.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let batch: Vec<LayerState> = d.iter().map(LayerState::from).collect();
    let cfg = TrainConfig {
        learning_rate: 0.05,
        ..TrainConfig::default()
    };
    for kind in ReceptiveFieldKind::ALL {
        let mask = build_mask(kind, SkinGeometry::STANDARD);
        let mut params = DbmParams::from_rbms(
            &RbmParams::init_random(mask.clone(), &mut rng),
            &RbmParams::init_random(mask.clone(), &mut rng),
        )
        .unwrap();
        let mut pcd = PcdState::for_dbm(&params, 10, &mut rng).unwrap();
        for _ in 0..1000 {
            pcd_update_dbm(&mut params, &batch, &mut pcd, &cfg, &mut rng).unwrap();
        }
        let zeros_kept = [(&params.w1, &params.mask1), (&params.w2, &params.mask2)]
            .iter()
            .all(|(w, m)| w.indexed_iter().all(|(ij, &x)| m.allowed()[ij] || x.to_bits() == 0));
        c.check(&format!("{kind} mask zeros after 1000 updates"), zeros_kept);
    }

    // Reruns with one seed reproduce every output byte for byte.
    let tmp = tempfile::tempdir().unwrap();
    let small = |dir: &std::path::Path| {
        let mut cfg = ExperimentConfig {
            trials: 2,
            seed: 77,
            output_dir: dir.to_path_buf(),
            ..ExperimentConfig::default()
        };
        cfg.train.iterations = 100;
        cfg
    };
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let cfg = small(&tmp.path().join(run));
        cmd_train(&cfg).unwrap();
        cmd_scenarios(&cfg, &cfg.output_dir.join(CHECKPOINT_DIR)).unwrap();
        let mut files: Vec<_> = walk(&cfg.output_dir)
            .into_iter()
            .map(|p| {
                (
                    p.strip_prefix(&cfg.output_dir).unwrap().to_path_buf(),
                    std::fs::read(&p).unwrap(),
                )
            })
            .collect();
        files.sort();
        outputs.push(files);
    }
    c.check(
        "bit-identical reruns",
        outputs[0] == outputs[1] && !outputs[0].is_empty(),
    );

    // Only the deep stage of the decoder is doubled: with sentinel weights
    // W2 = a·I and W1 = b·I, p(h1_k | e_k) = σ(2a) and p(v_k | e_k) = σ(b).
    let (a, b) = (0.3, 0.7);
    let mut params = DbmParams::zeros(ConnectivityMask::full(18, 18), ConnectivityMask::full(18, 18));
    params.w1 = Array2::eye(18) * b;
    params.w2 = Array2::eye(18) * a;
    let unit = LayerState::from_bits(&(0..18).map(|i| i == 5).collect::<Vec<_>>());
    let logistic = |x: f64| 1.0 / (1.0 + (-x).exp());
    let ph1 = decode_hidden1_prob(&params, &unit)[5];
    let pv = decode_visible_prob(&params, &unit)[5];
    c.check(
        "decoder doubling on the deep stage only",
        (ph1 - logistic(2.0 * a)).abs() < 1e-15 && (pv - logistic(b)).abs() < 1e-15,
    );

    // Homeostasis touches hidden biases and nothing else.
    let mask = build_mask(ReceptiveFieldKind::Circular, SkinGeometry::STANDARD);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let params = DbmParams::from_rbms(
        &RbmParams::init_random(mask.clone(), &mut rng),
        &RbmParams::init_random(mask, &mut rng),
    )
    .unwrap();
    let homeo = HomeostasisConfig {
        steps: 200,
        eta: 0.05,
        ..HomeostasisConfig::default()
    };
    let mu = measure_baseline(&params, &d, &homeo, &mut rng).unwrap();
    let (adapted, _) = run_homeostasis(&params, &mu, &homeo, &d, 0, &mut rng).unwrap();
    let same = |x: &Array2<f64>, y: &Array2<f64>| x.iter().zip(y).all(|(p, q)| p.to_bits() == q.to_bits());
    c.check(
        "homeostasis changes only hidden biases",
        same(&adapted.w1, &params.w1)
            && same(&adapted.w2, &params.w2)
            && adapted.visible_bias == params.visible_bias
            && adapted.mask1 == params.mask1
            && adapted.mask2 == params.mask2
            && (adapted.hidden1_bias != params.hidden1_bias || adapted.hidden2_bias != params.hidden2_bias),
    );
    c.finish()
}

fn walk(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(walk(&path));
        } else {
            out.push(path);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Criterion 7: acquisition pipeline.

fn acquisition() -> Verdict {
    let mut c = Checks::default();
    let acq = AcquisitionConfig::default();
    c.check(
        "firmware thresholds 0.012 / 2 / 5 / 3",
        acq.force_threshold == 0.012 && acq.min_cells == 2 && acq.combine_iter == 5 && acq.display_duration == 3,
    );
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        output_dir: tmp.path().to_path_buf(),
        ..ExperimentConfig::default()
    };
    let triangles = make_triangle_dataset(SkinGeometry::STANDARD);

    let clean = cmd_simulate_skin(&cfg, 30, SkinStream::Triangles, false).unwrap();
    c.note(format!("noise-free acceptance rate {:.2}", clean.acceptance_rate()));
    c.check("noise-free acceptance rate 1.0", clean.acceptance_rate() == 1.0);
    c.check(
        "noise-free rounds reproduce the triangle set",
        clean.dataset == triangles.patterns(),
    );
    let written = tactile_dbm::patterns::read_patterns(&clean.path).unwrap();
    c.check("dataset file round-trips", written == triangles.patterns());

    let noisy = cmd_simulate_skin(&cfg, 30, SkinStream::Triangles, true).unwrap();
    c.check(
        "sub-threshold noise does not change acceptance",
        noisy.dataset == triangles.patterns(),
    );

    let blank = cmd_simulate_skin(&cfg, 30, SkinStream::Blank, true).unwrap();
    c.check("all-zero rounds rejected", blank.accepted.is_empty());
    let single = cmd_simulate_skin(&cfg, 30, SkinStream::SingleCell, true).unwrap();
    c.check("single-cell rounds rejected", single.accepted.is_empty());
    c.finish()
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);

fn main() -> ExitCode {
    let pipeline = Pipeline::run(10);
    let criteria: Vec<Criterion> = vec![
        ("1 training reproduction", Box::new(|| training(&pipeline))),
        ("2 scenario table", Box::new(|| scenarios(&pipeline))),
        ("3 homeostasis gain", Box::new(|| homeostasis(&pipeline))),
        ("4 loss/gain correlation", Box::new(|| correlation(&pipeline))),
        ("5 exact-inference oracles", Box::new(exact_oracles)),
        ("6 metric and pipeline invariants", Box::new(invariants)),
        ("7 acquisition pipeline", Box::new(acquisition)),
    ];
    let mut all = true;
    for (name, check) in &criteria {
        let v = check();
        all &= v.passed;
        println!(
            "criterion {name}: {} | {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    println!(
        "acceptance: {}",
        if all {
            "all criteria passed"
        } else {
            "some criteria FAILED"
        }
    );
    if all || !strict {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
