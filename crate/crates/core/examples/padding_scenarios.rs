//! The four ways a real domain extension can enter the problem: only the
//! filter, the filter and the analysis, the filter and the volume, or all
//! three. A coarse MBB keeps the run short.
//!
//!     cargo run --release --example padding_scenarios -- 120

use padtop::filter::FilterMode;
use padtop::optimizer::{run, OptimizerConfig, Scenario};
use padtop::problems::{preset, MeshKind};

fn main() -> padtop::Result<()> {
    let nelx = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(120);
    let problem = preset("mbb")?.with_resolution(nelx)?;
    let mesh = problem.build_mesh(MeshKind::Regular, 0)?;
    for scenario in [Scenario::FilterOnly, Scenario::FilterFEA, Scenario::FilterVolume, Scenario::FilterFEAVolume] {
        let mut cfg = OptimizerConfig::new(FilterMode::RealExtension, scenario, problem.v_int);
        cfg.full_history = false;
        let out = run(&problem, &mesh, &cfg, &problem.schedule()?, &mut |_| {})?;
        let last = out.state.history.last().expect("at least one record");
        println!("{:<16} c_int {:8.2}  vol_int {:.4}  vol_dil {:.4}", scenario.name(), last.c_int, last.vol_int, last.vol_dil);
    }
    Ok(())
}
