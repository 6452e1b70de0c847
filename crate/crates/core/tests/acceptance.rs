//! Acceptance checks, one `[PASS]` / `[FAIL]` line per criterion.
//!
//!     cargo test --release --test acceptance            # all criteria
//!     cargo test --release --test acceptance -- 3 6     # a subset
//!
//! Full optimization runs are cached under the cargo target directory,
//! keyed by a hash of this test binary and the run settings, so results
//! are only reused while the code is unchanged. `PADTOP_ACCEPTANCE_FRESH=1`
//! ignores the cache. Failing criteria are reported but only change the
//! exit status when `PADTOP_ACCEPTANCE_STRICT=1`.

use std::collections::hash_map::DefaultHasher;
use std::fs;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Instant;

use padtop::cli::{execute, RunConfig};
use padtop::filter::{FilterMode, FilterOperator};
use padtop::geometry::{cone_volume_2d, FilterRadius, Point2};
use padtop::mesh::{build_regular, ExtensionSpec, Mesh};
use padtop::optimizer::{Evaluator, OptimizerConfig, Scenario};
use padtop::problems::{preset, MeshKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;
type Criterion<'a> = (usize, &'static str, Box<dyn Fn() -> Check + 'a>);

#[derive(Debug, Clone, Copy)]
struct Spec {
    mesh: MeshKind,
    /// elements along x (regular) or cell count (irregular)
    size: usize,
    mode: FilterMode,
    scenario: Scenario,
    v_int: f64,
}

impl Spec {
    fn regular(size: usize, mode: FilterMode, scenario: Scenario, v_int: f64) -> Self {
        Self { mesh: MeshKind::Regular, size, mode, scenario, v_int }
    }

    fn irregular(size: usize, mode: FilterMode) -> Self {
        Self { mesh: MeshKind::Irregular, size, mode, scenario: Scenario::FilterOnly, v_int: 0.3 }
    }

    fn key(&self) -> String {
        let mesh = if self.mesh == MeshKind::Regular { "reg" } else { "irr" };
        format!("mbb-{mesh}{}-{}-{}-v{}", self.size, self.mode, self.scenario, self.v_int).replace('+', "_")
    }
}

#[derive(Debug, Clone, Default)]
struct Outcome {
    c_int: f64,
    vol_int: f64,
    iterations: usize,
    converged: bool,
    unmet: usize,
    solid_violation: f64,
    seconds: f64,
    cached: bool,
}

impl Outcome {
    fn to_text(&self, tag: u64) -> String {
        format!(
            "tag = {tag}\nc_int = {:?}\nvol_int = {:?}\niterations = {}\nconverged = {}\nunmet = {}\nsolid_violation = {:?}\nseconds = {:.1}\n",
            self.c_int, self.vol_int, self.iterations, self.converged, self.unmet, self.solid_violation, self.seconds
        )
    }

    fn from_text(text: &str, tag: u64) -> Option<Self> {
        let get = |k: &str| text.lines().find_map(|l| l.strip_prefix(&format!("{k} = ")));
        if get("tag")?.parse::<u64>().ok()? != tag {
            return None;
        }
        Some(Self {
            c_int: get("c_int")?.parse().ok()?,
            vol_int: get("vol_int")?.parse().ok()?,
            iterations: get("iterations")?.parse().ok()?,
            converged: get("converged")?.parse().ok()?,
            unmet: get("unmet")?.parse().ok()?,
            solid_violation: get("solid_violation")?.parse().ok()?,
            seconds: get("seconds")?.parse().ok()?,
            cached: true,
        })
    }
}

struct Runner {
    dir: PathBuf,
    tag: u64,
    fresh: bool,
}

impl Runner {
    fn new() -> Self {
        let exe = std::env::current_exe().expect("test binary path");
        let mut h = DefaultHasher::new();
        fs::read(&exe).expect("readable test binary").hash(&mut h);
        Self {
            dir: Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance-runs"),
            tag: h.finish(),
            fresh: std::env::var("PADTOP_ACCEPTANCE_FRESH").is_ok_and(|v| v == "1"),
        }
    }

    fn get(&self, spec: Spec) -> std::result::Result<Outcome, String> {
        let out = self.dir.join(spec.key());
        let record = out.join("outcome.txt");
        if !self.fresh {
            if let Some(o) = fs::read_to_string(&record).ok().and_then(|t| Outcome::from_text(&t, self.tag)) {
                return Ok(o);
            }
        }
        eprintln!("  running {} ...", spec.key());
        let cfg = RunConfig {
            mesh: spec.mesh,
            nelx: (spec.mesh == MeshKind::Regular).then_some(spec.size),
            nel: (spec.mesh == MeshKind::Irregular).then_some(spec.size),
            filter_mode: spec.mode,
            scenario: spec.scenario,
            v_int: Some(spec.v_int),
            out: out.clone(),
            lean_history: true,
            quiet: true,
            ..RunConfig::default()
        };
        let o = execute(&cfg).map_err(|e| format!("{}: {e}", spec.key()))?;
        let last = o.result.state.history.last().expect("history has the initial record");
        let outcome = Outcome {
            c_int: last.c_int,
            vol_int: last.vol_int,
            iterations: last.iter,
            converged: o.result.converged,
            unmet: o.result.infeasible_steps.len(),
            solid_violation: o.audit.solid.violation_fraction,
            seconds: o.seconds,
            cached: false,
        };
        eprintln!("  done {}: c_int {:.2}, vol_int {:.4} in {:.0} s", spec.key(), outcome.c_int, outcome.vol_int, outcome.seconds);
        fs::write(&record, outcome.to_text(self.tag)).map_err(|e| e.to_string())?;
        Ok(outcome)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn describe(o: &Outcome) -> String {
    format!(
        "c_int {:.2} vol {:.4} ({} it{}{})",
        o.c_int,
        o.vol_int,
        o.iterations,
        if o.converged { ", converged" } else { "" },
        if o.cached { ", cached" } else { "" }
    )
}

fn table_reproduction(r: &Runner) -> Check {
    let cases = [
        (FilterMode::MeshMirroring, 326.5),
        (FilterMode::ApproximateVolume, 326.9),
        (FilterMode::RealExtension, 331.5),
        (FilterMode::NoTreatment, 310.2),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (mode, target) in cases {
        let o = r.get(Spec::regular(300, mode, Scenario::FilterOnly, 0.3))?;
        let dev = rel(o.c_int, target);
        let vol_ok = (o.vol_int - 0.3).abs() <= 1e-3;
        ok &= dev < 0.05 && vol_ok;
        parts.push(format!("{mode}: {} vs {target} ({:+.1}%, {:.0} s)", describe(&o), 100.0 * (o.c_int / target - 1.0), o.seconds));
    }
    let msg = parts.join("; ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn scenario_ordering(r: &Runner) -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for v in [0.3, 0.4, 0.5] {
        let base = r.get(Spec::regular(300, FilterMode::MeshMirroring, Scenario::FilterOnly, v))?;
        let mut row = format!("V={v}: filter {:.1}", base.c_int);
        for s in [Scenario::FilterFEA, Scenario::FilterVolume, Scenario::FilterFEAVolume] {
            let o = r.get(Spec::regular(300, FilterMode::RealExtension, s, v))?;
            ok &= base.c_int < o.c_int;
            row.push_str(&format!(" | {s} {:.1} (vol {:.4})", o.c_int, o.vol_int));
        }
        parts.push(row);
    }
    let msg = parts.join("; ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn mm_av_equivalence(r: &Runner) -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [300, 150] {
        let mm = r.get(Spec::regular(n, FilterMode::MeshMirroring, Scenario::FilterOnly, 0.3))?;
        let av = r.get(Spec::regular(n, FilterMode::ApproximateVolume, Scenario::FilterOnly, 0.3))?;
        let d = rel(av.c_int, mm.c_int);
        ok &= d < 0.01;
        parts.push(format!("{n}x{}: mm {:.2} av {:.2} diff {:.3}%", n / 3, mm.c_int, av.c_int, 100.0 * d));
    }
    let msg = parts.join("; ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Brute-force kernel sum around a cell of a unit grid.
fn discrete_cone(rad: f64) -> f64 {
    let n = rad.ceil() as i64 + 1;
    let mut sum = 0.0;
    for i in -n..=n {
        for j in -n..=n {
            sum += (1.0 - (i as f64).hypot(j as f64) / rad).max(0.0);
        }
    }
    sum
}

fn cone_discretization() -> Check {
    let mut errs = Vec::new();
    for rad in [2.0, 4.0, 8.0, 16.0] {
        let r = FilterRadius::new(rad).unwrap();
        let brute = discrete_cone(rad);
        // the filter assembles the same sum for an interior row
        let n = 2 * rad as usize + 5;
        let mesh = build_regular(n, n, n as f64, n as f64).unwrap();
        let op = FilterOperator::build(&mesh, r, FilterMode::NoTreatment).unwrap();
        let centre = (n / 2) * n + n / 2;
        if rel(op.denominators()[centre], brute) > 1e-12 {
            return Err(format!("filter row sum {} disagrees with brute force {brute} at r={rad}", op.denominators()[centre]));
        }
        errs.push((rad, 100.0 * rel(brute, cone_volume_2d(r))));
    }
    let at4 = errs[1].1;
    let monotone = errs.windows(2).all(|w| w[1].1 < w[0].1);
    let list: Vec<String> = errs.iter().map(|(r, e)| format!("r={r}: {e:.6}%")).collect();
    let msg = format!("{}; r=4 below 1%: {}; monotone: {monotone}", list.join(", "), at4 < 1.0);
    if at4 < 1.0 && monotone {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn length_scale_audit(r: &Runner) -> Check {
    let none = r.get(Spec::regular(300, FilterMode::NoTreatment, Scenario::FilterOnly, 0.3))?;
    let mm = r.get(Spec::regular(300, FilterMode::MeshMirroring, Scenario::FilterOnly, 0.3))?;
    let msg = format!(
        "solid violation: none {:.4}%, mm {:.4}%",
        100.0 * none.solid_violation,
        100.0 * mm.solid_violation
    );
    if none.solid_violation > mm.solid_violation && mm.solid_violation < 0.02 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn gradient_check() -> Check {
    let mut p = preset("mbb").unwrap().with_resolution(12).unwrap();
    p.set("r_fil_elements", "2.5").unwrap();
    let base = p.build_mesh(MeshKind::Regular, 1).unwrap();
    let mut worst_all: f64 = 0.0;
    let mut parts = Vec::new();
    for mode in FilterMode::ALL {
        let cfg = OptimizerConfig::new(mode, Scenario::FilterOnly, 0.3);
        let ev = Evaluator::new(&p, &base, &cfg).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rho: Vec<f64> = (0..ev.mesh().len()).map(|_| rng.gen_range(0.2..0.9)).collect();
        let beta = 2.0;
        let e = ev.evaluate(&rho, beta, false).map_err(|e| e.to_string())?;
        let free = ev.free_indices();
        let h = 1e-3;
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let j = free[rng.gen_range(0..free.len())];
            let c = |t: f64| {
                let mut x = rho.clone();
                x[j] += t;
                ev.evaluate(&x, beta, false).unwrap().c_ero
            };
            let fd = (-c(2.0 * h) + 8.0 * c(h) - 8.0 * c(-h) + c(-2.0 * h)) / (12.0 * h);
            worst = worst.max(rel(fd, e.dc[j]));
        }
        worst_all = worst_all.max(worst);
        parts.push(format!("{mode} {worst:.1e}"));
    }
    let msg = format!("max relative error over 10 elements: {}", parts.join(", "));
    if worst_all < 1e-5 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn filter_invariants() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cases = 0;
    for _ in 0..40 {
        let nelx = rng.gen_range(4..24);
        let nely = rng.gen_range(4..14);
        let rad = rng.gen_range(1.0..4.5);
        let r = FilterRadius::new(rad).unwrap();
        let mut base = build_regular(nelx, nely, nelx as f64, nely as f64).unwrap();
        if rng.gen_bool(0.5) {
            base.exclude_segments_on_line(Point2::new(0.0, 0.0), Point2::new(0.0, 1.0));
        }
        let rho: Vec<f64> = (0..base.len()).map(|_| rng.gen::<f64>()).collect();
        let none = FilterOperator::build(&base, r, FilterMode::NoTreatment).unwrap();
        let mm = FilterOperator::build(&base, r, FilterMode::MeshMirroring).unwrap();
        let av = FilterOperator::build(&base, r, FilterMode::ApproximateVolume).unwrap();
        let full = base.extend(&ExtensionSpec { t_pad: rad, affect_fea: false, affect_volume: false }).unwrap();
        let real = FilterOperator::build(&full, r, FilterMode::RealExtension).unwrap();

        // partition of unity
        if none.row_sums().iter().zip(none.denominators()).any(|(s, d)| rel(*s, *d) > 1e-12) {
            return Err(format!("partition of unity broken on {nelx}x{nely} r={rad}"));
        }
        let ones = none.apply(&vec![1.0; base.len()]).unwrap();
        if ones.iter().any(|v| (v - 1.0).abs() > 1e-12) {
            return Err("uniform field not a fixed point".into());
        }
        // numerator unchanged, denominators only grow
        let num = none.numerator(&rho).unwrap();
        for op in [&mm, &av] {
            let n = op.numerator(&rho).unwrap();
            if n.iter().zip(&num).any(|(a, b)| (a - b).abs() > 1e-12 * b.abs().max(1.0)) {
                return Err(format!("{} numerator differs", op.mode()));
            }
            if op.denominators().iter().zip(none.denominators()).any(|(a, b)| *a < b - 1e-12) {
                return Err(format!("{} denominator shrank", op.mode()));
            }
        }
        // real extension over a full radius reproduces mirroring
        for i in 0..base.len() {
            if rel(real.denominators()[i], mm.denominators()[i]) > 1e-9 {
                return Err(format!("real vs mm denominators differ at row {i} on {nelx}x{nely} r={rad}"));
            }
        }
        // adjoint identity
        for op in [&none, &mm, &av] {
            let y: Vec<f64> = (0..base.len()).map(|_| rng.gen::<f64>() - 0.5).collect();
            let lhs: f64 = op.apply(&rho).unwrap().iter().zip(&y).map(|(a, b)| a * b).sum();
            let rhs: f64 = op.apply_transpose(&y).unwrap().iter().zip(&rho).map(|(a, b)| a * b).sum();
            if (lhs - rhs).abs() > 1e-12 * lhs.abs().max(1.0) {
                return Err(format!("{} adjoint identity off by {:e}", op.mode(), lhs - rhs));
            }
        }
        cases += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    let msg = format!("{cases} random meshes, all properties hold, {secs:.1} s");
    if secs < 60.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Rows whose filter disk reaches a padded boundary segment.
fn boundary_rows(mesh: &Mesh, r: f64) -> Vec<usize> {
    mesh.elements
        .iter()
        .filter(|e| mesh.boundary.iter().any(|s| !s.pad_excluded && s.distance(e.centroid) < r))
        .map(|e| e.id)
        .collect()
}

fn irregular_meshes(r: &Runner) -> Check {
    let p = preset("mbb").unwrap();
    let rad = p.radius().unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [30_000, 7_500, 1_875] {
        let mut q = p.clone();
        q.n_cells = n;
        let mesh = q.build_mesh(MeshKind::Irregular, 1).map_err(|e| e.to_string())?;
        let mm_op = FilterOperator::build(&mesh, rad, FilterMode::MeshMirroring).unwrap();
        let av_op = FilterOperator::build(&mesh, rad, FilterMode::ApproximateVolume).unwrap();
        let none_op = FilterOperator::build(&mesh, rad, FilterMode::NoTreatment).unwrap();
        let ones = vec![1.0; mesh.len()];
        // the plain filter keeps a uniform field; padded filters may only lower it
        let plain = none_op.apply(&ones).unwrap().iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        let padded_ok = [&mm_op, &av_op]
            .iter()
            .flat_map(|op| op.apply(&ones).unwrap())
            .all(|v| v > 0.0 && v <= 1.0 + 1e-12);
        let rows = boundary_rows(&mesh, rad.value());
        let den = rows.iter().map(|&i| rel(mm_op.denominators()[i], av_op.denominators()[i])).fold(0.0, f64::max);
        let mm = r.get(Spec::irregular(n, FilterMode::MeshMirroring))?;
        let av = r.get(Spec::irregular(n, FilterMode::ApproximateVolume))?;
        let c = rel(av.c_int, mm.c_int);
        let vols = (mm.vol_int - 0.3).abs() <= 1e-3 && (av.vol_int - 0.3).abs() <= 1e-3;
        ok &= plain < 1e-12 && padded_ok && den < 0.02 && c < 0.02 && vols;
        parts.push(format!(
            "{n} cells: plain fixed point {plain:.0e}, boundary denominators mm/av max {:.2}%, mm {}, av {}, compliance diff {:.2}%",
            100.0 * den,
            describe(&mm),
            describe(&av),
            100.0 * c
        ));
    }
    let msg = parts.join("; ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn determinism() -> Check {
    let root = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance-determinism");
    let mut dirs = Vec::new();
    for run in ["a", "b"] {
        let out = root.join(run);
        let _ = fs::remove_dir_all(&out);
        let status = Command::new(env!("CARGO_BIN_EXE_padtop"))
            .args(["--problem", "mbb", "--nelx", "90", "--filter", "mm", "--max-iter", "40", "--quiet", "--out"])
            .arg(&out)
            .stdout(Stdio::null())
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("padtop exited with {status}"));
        }
        dirs.push(out);
    }
    for f in ["history.csv", "density_ero.pgm", "density_int.pgm", "density_dil.pgm"] {
        let a = fs::read(dirs[0].join(f)).map_err(|e| e.to_string())?;
        let b = fs::read(dirs[1].join(f)).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("{f} differs between runs"));
        }
    }
    Ok("history.csv and all PGM outputs bit-identical across two processes".into())
}

fn main() {
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let runner = Runner::new();
    let criteria: [Criterion; 9] = [
        (1, "table reproduction on the 300x100 MBB", Box::new(|| table_reproduction(&runner))),
        (2, "padding only in the filter gives the lowest compliance", Box::new(|| scenario_ordering(&runner))),
        (3, "mesh mirroring and approximate volume agree", Box::new(|| mm_av_equivalence(&runner))),
        (4, "discrete cone close to the perfect cone", Box::new(cone_discretization)),
        (5, "length-scale audit", Box::new(|| length_scale_audit(&runner))),
        (6, "adjoint sensitivities vs finite differences", Box::new(gradient_check)),
        (7, "filter invariants", Box::new(filter_invariants)),
        (8, "irregular meshes", Box::new(|| irregular_meshes(&runner))),
        (9, "deterministic CLI outputs", Box::new(determinism)),
    ];
    let mut failed = 0;
    let mut ran = 0;
    for (id, name, check) in &criteria {
        if !wanted.is_empty() && !wanted.contains(id) {
            continue;
        }
        ran += 1;
        match check() {
            Ok(detail) => println!("[PASS] {id} {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {id} {name}: {detail}");
            }
        }
    }
    println!("{} of {ran} criteria pass", ran - failed);
    if failed > 0 && std::env::var("PADTOP_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
