//! Kernel volume summed over cell centres of a unit grid against the
//! perfect cone, for growing radii.

use padtop::filter::{FilterMode, FilterOperator};
use padtop::geometry::{cone_volume_2d, FilterRadius};
use padtop::mesh::build_regular;

fn main() -> padtop::Result<()> {
    println!("{:>6} {:>14} {:>14} {:>10}", "r", "discrete", "cone", "diff %");
    for rad in [1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0] {
        let r = FilterRadius::new(rad)?;
        let n = 2 * rad.ceil() as usize + 3;
        let mesh = build_regular(n, n, n as f64, n as f64)?;
        let op = FilterOperator::build(&mesh, r, FilterMode::NoTreatment)?;
        let discrete = op.denominators()[(n / 2) * n + n / 2];
        let cone = cone_volume_2d(r);
        println!("{rad:>6} {discrete:>14.6} {cone:>14.6} {:>10.6}", 100.0 * (discrete - cone).abs() / cone);
    }
    Ok(())
}
