//! Score a trained network on intact, corrupted and blank input.

use tactile_dbm::boltzmann::TrainConfig;
use tactile_dbm::connectivity::ReceptiveFieldKind;
use tactile_dbm::harness::{evaluate_scenarios, train_trial, ScenarioConfig};
use tactile_dbm::metrics::dq_loss;
use tactile_dbm::patterns::{make_triangle_dataset, SkinGeometry};

fn main() -> tactile_dbm::Result<()> {
    let dataset = make_triangle_dataset(SkinGeometry::STANDARD);
    for kind in [ReceptiveFieldKind::Linear, ReceptiveFieldKind::Circular] {
        let trained = train_trial(kind, &dataset, &TrainConfig::default(), 0, 1)?;
        let s = evaluate_scenarios(&trained.params, &dataset, &ScenarioConfig::default(), 1)?;
        println!(
            "{:<8} pattern {:.3}  corrupted {:.3}  blank {:.3}  loss {:.3}",
            kind.as_str(),
            s.q_pattern,
            s.q_corrupted,
            s.q_blank,
            dq_loss(s.q_pattern, s.q_blank)
        );
    }
    Ok(())
}
