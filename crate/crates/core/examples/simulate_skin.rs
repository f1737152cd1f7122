//! Acquire tactile patterns from simulated force frames.
//!
//! Presses each triangle for one round with sensor noise, then tries a
//! single-cell press that falls below the minimum cell count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tactile_dbm::patterns::{
    acquire_pattern, make_triangle_dataset, render_led_frames, simulate_round, AcquisitionConfig, SkinGeometry,
    TactilePattern,
};

fn main() -> tactile_dbm::Result<()> {
    let config = AcquisitionConfig::default();
    let geom = SkinGeometry::STANDARD;
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    for (round, touch) in make_triangle_dataset(geom).iter().enumerate() {
        let frames = simulate_round(touch, &config, round * config.combine_iter, true, &mut rng);
        match acquire_pattern(&frames, &config)? {
            Some(p) => {
                println!("round {round}: accepted {} cells", p.active_count());
                println!("{}", render_led_frames(&p, &config)[0]);
            }
            None => println!("round {round}: rejected"),
        }
    }

    let single = TactilePattern::from_active(geom.cell_count(), &[7])?;
    let frames = simulate_round(&single, &config, 0, true, &mut rng);
    let verdict = acquire_pattern(&frames, &config)?;
    println!("single cell press accepted: {}", verdict.is_some());
    Ok(())
}
