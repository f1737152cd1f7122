//! Read out hand-set deepest-layer states through a trained network and
//! display them as LED frames.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tactile_dbm::boltzmann::{LayerState, TrainConfig};
use tactile_dbm::connectivity::ReceptiveFieldKind;
use tactile_dbm::decoder::{decode, DecodeConfig, DecodeMode};
use tactile_dbm::harness::train_trial;
use tactile_dbm::metrics::best_match;
use tactile_dbm::patterns::{make_triangle_dataset, render_led_frames, AcquisitionConfig, SkinGeometry};

fn main() -> tactile_dbm::Result<()> {
    let dataset = make_triangle_dataset(SkinGeometry::STANDARD);
    let trained = train_trial(ReceptiveFieldKind::Circular, &dataset, &TrainConfig::default(), 0, 4)?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = DecodeConfig {
        mode: DecodeMode::Threshold,
        samples_per_decode: 1,
    };

    let states = [
        ("all off", LayerState::zeros(18)),
        ("all on", LayerState::ones(18)),
        ("random", LayerState::random(18, &mut rng)),
    ];
    for (name, h2) in &states {
        let v = decode(&trained.params, h2, &cfg, &mut rng)?;
        let (idx, q) = best_match(&v, &dataset)?;
        println!("{name}: closest pattern {idx}, Q {q:.2}");
        println!("{}\n", render_led_frames(&v, &AcquisitionConfig::default())[0]);
    }
    Ok(())
}
