//! Deprive a trained network of input and let homeostasis restore its
//! activity. Prints the performance trace and the hallucination gain.

use tactile_dbm::boltzmann::TrainConfig;
use tactile_dbm::connectivity::ReceptiveFieldKind;
use tactile_dbm::harness::{homeostasis_trial, train_trial, ScenarioConfig};
use tactile_dbm::homeostasis::HomeostasisConfig;
use tactile_dbm::patterns::{make_triangle_dataset, SkinGeometry};

fn main() -> tactile_dbm::Result<()> {
    let dataset = make_triangle_dataset(SkinGeometry::STANDARD);
    let seed = 2;
    let trained = train_trial(ReceptiveFieldKind::Circular, &dataset, &TrainConfig::default(), 0, seed)?;
    let homeo = HomeostasisConfig::default();
    let run = homeostasis_trial(&trained.params, &dataset, &homeo, &ScenarioConfig::default(), 0, seed)?;

    for lo in (0..homeo.steps).step_by(250) {
        println!(
            "steps {lo:>4}..{:>4}: mean Q {:.3}",
            lo + 250,
            run.trace.mean_between(lo, lo + 250)
        );
    }
    let r = &run.result;
    println!(
        "blank {:.3} -> hallucination {:.3} (gain {:.3}, loss {:.3})",
        r.q_blank, r.q_hallucination, r.dq_gain, r.dq_loss
    );

    let shift = &run.adapted.hidden1_bias - &trained.params.hidden1_bias;
    println!("hidden1 bias shift: {:.3?}", shift.to_vec());
    Ok(())
}
