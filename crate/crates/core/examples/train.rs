//! Train one circular-field DBM and report the learning curves.
//!
//! Usage: `cargo run --release --example train [linear|circular]`

use tactile_dbm::boltzmann::{Phase, TrainConfig};
use tactile_dbm::connectivity::ReceptiveFieldKind;
use tactile_dbm::harness::train_trial;
use tactile_dbm::patterns::{make_triangle_dataset, SkinGeometry};

fn main() -> tactile_dbm::Result<()> {
    let kind = match std::env::args().nth(1).as_deref() {
        Some("linear") => ReceptiveFieldKind::Linear,
        _ => ReceptiveFieldKind::Circular,
    };
    let dataset = make_triangle_dataset(SkinGeometry::STANDARD);
    let trained = train_trial(kind, &dataset, &TrainConfig::default(), 0, 0)?;

    for (phase, trace) in &trained.curves {
        let every = (trace.len() / 5).max(1);
        let points: Vec<String> = trace
            .entries()
            .iter()
            .step_by(every)
            .map(|p| format!("{}:{:.2}", p.step, p.q))
            .collect();
        println!("{phase:<9} {}", points.join("  "));
    }
    println!(
        "final Q: pretrain1 {:.3}, pretrain2 {:.3}, dbm {:.3} ({:?})",
        trained.final_q(Phase::Pretrain1).unwrap_or(f64::NAN),
        trained.final_q(Phase::Pretrain2).unwrap_or(f64::NAN),
        trained.final_q(Phase::Dbm).unwrap_or(f64::NAN),
        trained.stop
    );
    Ok(())
}
