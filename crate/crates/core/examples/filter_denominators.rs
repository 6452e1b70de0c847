//! Filter denominators at a corner, an edge and the interior of a small
//! grid for every padding treatment, next to the analytic cone volumes.

use padtop::filter::{FilterMode, FilterOperator};
use padtop::geometry::{cone_volume_2d, sectioned_cone_volume_2d, FilterRadius, Point2};
use padtop::mesh::{build_regular, ExtensionSpec};

fn main() -> padtop::Result<()> {
    let r = FilterRadius::new(4.0)?;
    let mut mesh = build_regular(24, 12, 24.0, 12.0)?;
    // no padding along the left edge, as on a symmetry line
    mesh.exclude_segments_on_line(Point2::new(0.0, 0.0), Point2::new(0.0, 1.0));
    let extended = mesh.extend(&ExtensionSpec { t_pad: r.value(), affect_fea: false, affect_volume: false })?;

    let rows = [("bottom-left corner", 0), ("bottom edge", 12), ("right edge", 6 * 24 + 23), ("interior", 6 * 24 + 12)];
    println!("{:<20} {:>10} {:>10} {:>10} {:>10}", "row", "none", "real", "mm", "av");
    let ops: Vec<FilterOperator> = FilterMode::ALL
        .iter()
        .map(|&m| FilterOperator::build(if m == FilterMode::RealExtension { &extended } else { &mesh }, r, m))
        .collect::<padtop::Result<_>>()?;
    for (name, i) in rows {
        print!("{name:<20}");
        for op in &ops {
            print!(" {:>10.4}", op.denominators()[i]);
        }
        println!();
    }
    println!("full cone {:.4}", cone_volume_2d(r));
    for s in [-2.0, 0.0, 0.5, 2.0] {
        println!("cone kept beyond a cut at s = {s:>4}: {:.4}", sectioned_cone_volume_2d(r, s));
    }
    Ok(())
}
