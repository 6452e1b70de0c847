//! MBB half-beam with a chosen padding treatment.
//!
//!     cargo run --release --example mbb_padding -- mm 300
//!
//! First argument: none | real | mm | av. Second: elements along x.

use padtop::filter::FilterMode;
use padtop::optimizer::{run, OptimizerConfig, Scenario};
use padtop::problems::{preset, MeshKind};

fn main() -> padtop::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mode = args.first().and_then(|s| FilterMode::parse(s)).unwrap_or(FilterMode::MeshMirroring);
    let nelx = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(150);
    let problem = preset("mbb")?.with_resolution(nelx)?;
    let mesh = problem.build_mesh(MeshKind::Regular, 0)?;
    let cfg = OptimizerConfig::new(mode, Scenario::FilterOnly, problem.v_int);
    let t = std::time::Instant::now();
    let out = run(&problem, &mesh, &cfg, &problem.schedule()?, &mut |h| {
        if h.iter % 20 == 0 {
            println!("{:4}  c_int {:9.3}  vol_int {:.4}  beta {:5.2}  change {:.4}", h.iter, h.c_int, h.vol_int, h.beta, h.max_change);
        }
    })?;
    let last = out.state.history.last().expect("at least one record");
    println!(
        "{mode}: c_int {:.2} vol_int {:.4} after {} iterations ({:.1?})",
        last.c_int, last.vol_int, last.iter, t.elapsed()
    );
    Ok(())
}
