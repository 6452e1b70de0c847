//! Polygonal MBB mesh: filter denominators under mirroring and approximate
//! volume, then a short optimization.
//!
//!     cargo run --release --example irregular_mesh -- 7500 60

use padtop::filter::{FilterMode, FilterOperator};
use padtop::optimizer::{run, OptimizerConfig, Scenario};
use padtop::problems::{preset, MeshKind};

fn main() -> padtop::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let mut problem = preset("mbb")?;
    problem.n_cells = args.first().copied().unwrap_or(7500);
    let max_iter = args.get(1).copied().unwrap_or(60);

    let t = std::time::Instant::now();
    let mesh = problem.build_mesh(MeshKind::Irregular, 1)?;
    println!("{} cells, h = {:.4}, built in {:.1?}", mesh.len(), mesh.element_size, t.elapsed());

    let r = problem.radius()?;
    let mm = FilterOperator::build(&mesh, r, FilterMode::MeshMirroring)?;
    let av = FilterOperator::build(&mesh, r, FilterMode::ApproximateVolume)?;
    let worst = mm
        .denominators()
        .iter()
        .zip(av.denominators())
        .map(|(a, b)| (a - b).abs() / b)
        .fold(0.0, f64::max);
    println!("largest mm/av denominator gap {:.3}%", 100.0 * worst);

    let mut cfg = OptimizerConfig::new(FilterMode::MeshMirroring, Scenario::FilterOnly, problem.v_int);
    cfg.max_iter = max_iter;
    cfg.full_history = false;
    let t = std::time::Instant::now();
    let out = run(&problem, &mesh, &cfg, &problem.schedule()?, &mut |h| {
        if h.iter % 10 == 0 {
            println!("{:4}  c_ero {:9.3}  vol_int {:.4}  beta {:5.2}", h.iter, h.c_ero, h.vol_int, h.beta);
        }
    })?;
    let last = out.state.history.last().expect("at least one record");
    println!("c_int {:.2}, vol_int {:.4} after {} iterations ({:.1?})", last.c_int, last.vol_int, last.iter, t.elapsed());
    Ok(())
}
