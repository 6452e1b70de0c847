//! Heat conduction: uniform heat generation, a cold strip in the middle of
//! the left edge, checkerboard starting design.
//!
//!     cargo run --release --example heat_sink -- 100

use padtop::filter::FilterMode;
use padtop::optimizer::{run, OptimizerConfig, Scenario};
use padtop::problems::{preset, MeshKind};

fn main() -> padtop::Result<()> {
    let nelx = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let problem = preset("heatsink")?.with_resolution(nelx)?;
    let mesh = problem.build_mesh(MeshKind::Regular, 0)?;
    for mode in [FilterMode::NoTreatment, FilterMode::ApproximateVolume] {
        let mut cfg = OptimizerConfig::new(mode, Scenario::FilterOnly, problem.v_int);
        cfg.full_history = false;
        let out = run(&problem, &mesh, &cfg, &problem.schedule()?, &mut |_| {})?;
        let e = &out.final_eval;
        println!("{mode:<5} thermal compliance {:.4}  vol_int {:.4}  ({} iterations)", e.c_int, e.vol_int, out.state.iteration);
    }
    Ok(())
}
