//! Print the linear and circular column-restricted connectivity masks.

use tactile_dbm::connectivity::{build_mask, ReceptiveFieldKind};
use tactile_dbm::patterns::SkinGeometry;

fn main() {
    let geom = SkinGeometry::STANDARD;
    for kind in [ReceptiveFieldKind::Linear, ReceptiveFieldKind::Circular] {
        let mask = build_mask(kind, geom);
        println!(
            "{kind:?}: {} connections",
            mask.allowed().iter().filter(|&&a| a).count()
        );
        // One row per visible column, one character per hidden column.
        for col in 0..geom.cols {
            let row: String = (0..geom.cols)
                .map(|h| {
                    if mask.is_allowed(geom.cell_at(0, col), geom.cell_at(0, h)) {
                        '#'
                    } else {
                        '.'
                    }
                })
                .collect();
            println!("  column {col}: {row}");
        }
    }
}
