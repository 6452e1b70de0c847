//! Minimum feature size audit of a synthetic design: a bar that is thick
//! enough next to one that is not.

use padtop::cli::audit_feature_size;
use padtop::mesh::build_regular;

fn main() -> padtop::Result<()> {
    let mesh = build_regular(60, 30, 60.0, 30.0)?;
    let field: Vec<f64> = (0..mesh.len())
        .map(|e| {
            let (ix, iy) = mesh.cell_index(e);
            let thick = ix < 30 && (8..18).contains(&iy);
            let thin = ix >= 30 && (8..11).contains(&iy);
            if thick || thin {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    for r_min in [1.0, 2.0, 4.0] {
        let rep = audit_feature_size(&field, &mesh, r_min)?;
        println!(
            "r_min {r_min}: solid uncovered {:>4} of {} ({:.1}%), void uncovered {:.1}%, smallest solid feature radius {:.2}",
            rep.solid.uncovered,
            rep.solid.pixels,
            100.0 * rep.solid.violation_fraction,
            100.0 * rep.void.violation_fraction,
            rep.solid.min_radius
        );
    }
    Ok(())
}
