//! Cantilever with a tip load, mesh mirroring on the free edges. Writes the
//! intermediate design as a PGM image.
//!
//!     cargo run --release --example cantilever -- 100 cantilever.pgm

use std::fs::File;
use std::io::BufWriter;

use padtop::cli::{audit_feature_size, write_pgm, Raster};
use padtop::filter::FilterMode;
use padtop::optimizer::{run, OptimizerConfig, Scenario};
use padtop::problems::{preset, MeshKind};

fn main() -> padtop::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let nelx = args.first().and_then(|s| s.parse().ok()).unwrap_or(100);
    let path = args.get(1).map_or("cantilever.pgm", String::as_str);
    let problem = preset("cantilever")?.with_resolution(nelx)?;
    let mesh = problem.build_mesh(MeshKind::Regular, 0)?;
    let mut cfg = OptimizerConfig::new(FilterMode::MeshMirroring, Scenario::FilterOnly, problem.v_int);
    cfg.full_history = false;
    let out = run(&problem, &mesh, &cfg, &problem.schedule()?, &mut |h| {
        if h.iter % 50 == 0 {
            println!("{:4}  c_ero {:9.3}  vol_int {:.4}", h.iter, h.c_ero, h.vol_int);
        }
    })?;
    let e = &out.final_eval;
    let audit = audit_feature_size(&e.intermediate, &mesh, problem.radius()?.r_min())?;
    println!(
        "c_int {:.3}, vol_int {:.4}, solid pixels below the minimum size {:.2}%",
        e.c_int,
        e.vol_int,
        100.0 * audit.solid.violation_fraction
    );
    write_pgm(&Raster::from_mesh(&mesh, &e.intermediate)?, BufWriter::new(File::create(path)?))?;
    println!("wrote {path}");
    Ok(())
}
