//! End to end through the command layer: acquire a dataset from the
//! simulated skin, train, score the scenarios and run homeostasis. Files
//! land in a temporary directory (or the first argument).
//!
//! A reduced trial count keeps the run short.

use std::path::PathBuf;

use tactile_dbm::harness::{
    all_passed, cmd_homeostasis, cmd_scenarios, cmd_simulate_skin, cmd_train, ExperimentConfig, SkinStream,
    CHECKPOINT_DIR,
};

fn main() -> tactile_dbm::Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("tactile-dbm-pipeline"));
    let mut cfg = ExperimentConfig {
        trials: 3,
        output_dir: out.clone(),
        ..ExperimentConfig::default()
    };

    let skin = cmd_simulate_skin(&cfg, 30, SkinStream::Triangles, true)?;
    println!(
        "skin: {} of {} rounds accepted, {} distinct patterns",
        skin.accepted.len(),
        skin.rounds,
        skin.dataset.len()
    );
    cfg.dataset = Some(skin.path.clone());

    let train = cmd_train(&cfg)?;
    let scen = cmd_scenarios(&cfg, &out.join(CHECKPOINT_DIR))?;
    let homeo = cmd_homeostasis(&cfg, &out.join(CHECKPOINT_DIR))?;

    let mut checks = train.check();
    checks.extend(scen.check());
    checks.extend(homeo.check(cfg.homeo.steps));
    for c in &checks {
        println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("all passed: {}; outputs in {}", all_passed(&checks), out.display());
    Ok(())
}
