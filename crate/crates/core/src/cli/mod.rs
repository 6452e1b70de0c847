//! Command-line front end: run configuration, outputs and the feature-size
//! audit.

pub mod audit;
pub mod raster;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;

pub use audit::{audit_feature_size, FeatureSizeReport, PhaseReport};
pub use raster::{read_pgm, write_pgm, Raster};

use crate::error::{Error, Result};
use crate::filter::FilterMode;
use crate::optimizer::{run, write_history_csv, OptimizerConfig, RunResult, Scenario};
use crate::problems::{preset, MeshKind, ProblemDefinition};

#[derive(Debug, Parser)]
#[command(name = "padtop", version, about = "Robust topology optimization with density-filter boundary padding")]
struct Args {
    /// Key-value file ("key = value" per line); flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// mbb | mbb_long | mbb_long_beta1 | cantilever | heatsink
    #[arg(long)]
    problem: Option<String>,
    /// regular | irregular
    #[arg(long)]
    mesh: Option<String>,
    #[arg(long)]
    nelx: Option<usize>,
    #[arg(long)]
    nely: Option<usize>,
    /// Cell count for irregular meshes.
    #[arg(long)]
    nel: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// none | real | mm | av
    #[arg(long)]
    filter: Option<String>,
    /// filter | filter+fea | filter+vol | filter+fea+vol
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    volfrac: Option<f64>,
    #[arg(long = "move")]
    move_limit: Option<f64>,
    #[arg(long)]
    beta_init: Option<f64>,
    #[arg(long)]
    beta_max: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the filter denominators as CSV.
    #[arg(long)]
    dump_denominators: bool,
    /// Compute intermediate and dilated compliances for the final design
    /// only (history rows before it hold NaN).
    #[arg(long)]
    lean_history: bool,
    /// Suppress per-iteration progress on stderr.
    #[arg(long, short)]
    quiet: bool,
}

/// Everything a single invocation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    pub mesh: MeshKind,
    pub nelx: Option<usize>,
    pub nely: Option<usize>,
    pub nel: Option<usize>,
    pub seed: u64,
    pub filter_mode: FilterMode,
    pub scenario: Scenario,
    pub v_int: Option<f64>,
    pub move_limit: f64,
    pub beta_init: Option<f64>,
    pub beta_max: Option<f64>,
    pub max_iter: usize,
    pub out: PathBuf,
    pub dump_denominators: bool,
    pub lean_history: bool,
    pub quiet: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: "mbb".into(),
            mesh: MeshKind::Regular,
            nelx: None,
            nely: None,
            nel: None,
            seed: 1,
            filter_mode: FilterMode::MeshMirroring,
            scenario: Scenario::FilterOnly,
            v_int: None,
            move_limit: 0.05,
            beta_init: None,
            beta_max: None,
            max_iter: 500,
            out: PathBuf::from("out"),
            dump_denominators: false,
            lean_history: false,
            quiet: false,
        }
    }
}

fn parse_mesh(s: &str) -> Result<MeshKind> {
    match s {
        "regular" => Ok(MeshKind::Regular),
        "irregular" => Ok(MeshKind::Irregular),
        _ => Err(Error::Config(format!("unknown mesh kind `{s}`"))),
    }
}

impl RunConfig {
    /// Applies one `key = value` setting; keys match the long flag names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::Config(format!("bad value `{v}` for `{key}`")))
        }
        match key.replace('_', "-").as_str() {
            "problem" => self.problem = value.to_string(),
            "mesh" => self.mesh = parse_mesh(value)?,
            "nelx" => self.nelx = Some(num(key, value)?),
            "nely" => self.nely = Some(num(key, value)?),
            "nel" => self.nel = Some(num(key, value)?),
            "seed" => self.seed = num(key, value)?,
            "filter" => {
                self.filter_mode =
                    FilterMode::parse(value).ok_or_else(|| Error::Config(format!("unknown filter `{value}`")))?
            }
            "scenario" => {
                self.scenario =
                    Scenario::parse(value).ok_or_else(|| Error::Config(format!("unknown scenario `{value}`")))?
            }
            "volfrac" => self.v_int = Some(num(key, value)?),
            "move" => self.move_limit = num(key, value)?,
            "beta-init" => self.beta_init = Some(num(key, value)?),
            "beta-max" => self.beta_max = Some(num(key, value)?),
            "max-iter" => self.max_iter = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "dump-denominators" => self.dump_denominators = num(key, value)?,
            "lean-history" => self.lean_history = num(key, value)?,
            "quiet" => self.quiet = num(key, value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn apply_file_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: n + 1, msg: "expected `key = value`".into() })?;
            self.set(k.trim(), v.trim())
                .map_err(|e| Error::Parse { line: n + 1, msg: e.to_string() })?;
        }
        Ok(())
    }

    /// The preset with this configuration's overrides applied.
    pub fn problem_definition(&self) -> Result<ProblemDefinition> {
        let mut p = preset(&self.problem)?;
        if let Some(n) = self.nelx {
            p = p.with_resolution(n)?;
        }
        if let Some(n) = self.nely {
            p.nely = n;
        }
        if let Some(n) = self.nel {
            p.n_cells = n;
        }
        if let Some(v) = self.v_int {
            p.v_int = v;
        }
        if let Some(b) = self.beta_init {
            p.beta_init = b;
        }
        if let Some(b) = self.beta_max {
            p.beta_max = b;
        }
        p.validate()?;
        Ok(p)
    }

    pub fn optimizer_config(&self, p: &ProblemDefinition) -> OptimizerConfig {
        OptimizerConfig {
            move_limit: self.move_limit,
            max_iter: self.max_iter,
            full_history: !self.lean_history,
            ..OptimizerConfig::new(self.filter_mode, self.scenario, p.v_int)
        }
    }
}

/// Outputs of a finished run.
#[derive(Debug)]
pub struct RunOutcome {
    pub problem: ProblemDefinition,
    pub result: RunResult,
    pub audit: FeatureSizeReport,
    pub seconds: f64,
}

/// Runs one configuration and writes its outputs into `cfg.out`.
pub fn execute(cfg: &RunConfig) -> Result<RunOutcome> {
    let problem = cfg.problem_definition()?;
    let opt = cfg.optimizer_config(&problem);
    opt.validate()?;
    let mesh = problem.build_mesh(cfg.mesh, cfg.seed)?;
    let schedule = problem.schedule()?;
    let start = Instant::now();
    let quiet = cfg.quiet;
    let result = run(&problem, &mesh, &opt, &schedule, &mut |h| {
        if !quiet && h.iter % 10 == 0 {
            eprintln!(
                "it {:4}  c_ero {:10.4}  c_int {:10.4}  vol_int {:.4}  beta {:6.2}  change {:.4}",
                h.iter, h.c_ero, h.c_int, h.vol_int, h.beta, h.max_change
            );
        }
    })?;
    let seconds = start.elapsed().as_secs_f64();

    // the evaluator's mesh carries any padding; outputs use it directly
    let eval_mesh = if opt.filter_mode == FilterMode::RealExtension {
        mesh.extend(&crate::mesh::ExtensionSpec {
            t_pad: problem.radius()?.dilation_distance(),
            affect_fea: opt.scenario.padded_fea(),
            affect_volume: opt.scenario.padded_volume(),
        })?
    } else {
        mesh
    };
    let r_min = problem.radius()?.r_min();
    let audit = audit_feature_size(&result.final_eval.intermediate, &eval_mesh, r_min)?;

    fs::create_dir_all(&cfg.out)?;
    let e = &result.final_eval;
    for (name, field) in [("ero", &e.eroded), ("int", &e.intermediate), ("dil", &e.dilated)] {
        let raster = Raster::from_mesh(&eval_mesh, field)?;
        write_pgm(&raster, create(&cfg.out.join(format!("density_{name}.pgm")))?)?;
    }
    write_history_csv(&result.state.history, create(&cfg.out.join("history.csv"))?)?;
    if cfg.dump_denominators {
        let filter = crate::filter::FilterOperator::build(&eval_mesh, problem.radius()?, opt.filter_mode)?;
        filter.write_denominators_csv(create(&cfg.out.join("denominators.csv"))?)?;
    }
    let outcome = RunOutcome { problem, result, audit, seconds };
    write_summary(cfg, &outcome, create(&cfg.out.join("summary.txt"))?)?;
    Ok(outcome)
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

fn write_summary<W: Write>(cfg: &RunConfig, o: &RunOutcome, mut w: W) -> Result<()> {
    let p = &o.problem;
    let last = o.result.state.history.last().expect("history has the initial record");
    writeln!(w, "problem = {}", p.name)?;
    writeln!(w, "mesh = {}", if cfg.mesh == MeshKind::Regular { "regular" } else { "irregular" })?;
    match cfg.mesh {
        MeshKind::Regular => writeln!(w, "resolution = {}x{}", p.nelx, p.nely)?,
        MeshKind::Irregular => writeln!(w, "cells = {}\nseed = {}", p.n_cells, cfg.seed)?,
    }
    writeln!(w, "filter = {}", cfg.filter_mode)?;
    writeln!(w, "scenario = {}", cfg.scenario)?;
    writeln!(w, "volfrac = {}", p.v_int)?;
    writeln!(w, "r_fil = {}", p.r_fil)?;
    writeln!(w, "move = {}", cfg.move_limit)?;
    writeln!(w, "beta_init = {}", p.beta_init)?;
    writeln!(w, "beta_max = {}", p.beta_max)?;
    writeln!(w, "max_iter = {}", cfg.max_iter)?;
    writeln!(w, "iterations = {}", last.iter)?;
    writeln!(w, "converged = {}", o.result.converged)?;
    writeln!(w, "c_ero = {}", last.c_ero)?;
    writeln!(w, "c_int = {}", last.c_int)?;
    writeln!(w, "c_dil = {}", last.c_dil)?;
    writeln!(w, "vol_int = {}", last.vol_int)?;
    writeln!(w, "vol_dil = {}", last.vol_dil)?;
    writeln!(w, "v_dil_bound = {}", o.result.state.v_dil_bound)?;
    writeln!(w, "bound_unmet_steps = {}", o.result.infeasible_steps.len())?;
    writeln!(w, "solid_violation = {}", o.audit.solid.violation_fraction)?;
    writeln!(w, "void_violation = {}", o.audit.void.violation_fraction)?;
    writeln!(w, "wall_time_s = {:.2}", o.seconds)?;
    Ok(())
}

fn configure_threads() {
    faer::set_global_parallelism(faer::Par::Seq);
    if let Some(n) = std::env::var("PADTOP_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Entry point of the `padtop` binary. Returns the process exit status:
/// 0 on success, 2 for bad flags or configuration, 1 for run failures.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cfg = match build_config(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    configure_threads();
    match execute(&cfg) {
        Ok(o) => {
            let last = o.result.state.history.last().expect("history has the initial record");
            println!(
                "{} {} {}: c_int = {:.4}, vol_int = {:.4}, {} iterations, outputs in {}",
                o.problem.name,
                cfg.filter_mode,
                cfg.scenario,
                last.c_int,
                last.vol_int,
                last.iter,
                cfg.out.display()
            );
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn build_config(a: &Args) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &a.config {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.apply_file_text(&text)?;
    }
    let mut flags: Vec<(&str, String)> = Vec::new();
    let mut put = |k: &'static str, v: Option<String>| {
        if let Some(v) = v {
            flags.push((k, v));
        }
    };
    put("problem", a.problem.clone());
    put("mesh", a.mesh.clone());
    put("nelx", a.nelx.map(|v| v.to_string()));
    put("nely", a.nely.map(|v| v.to_string()));
    put("nel", a.nel.map(|v| v.to_string()));
    put("seed", a.seed.map(|v| v.to_string()));
    put("filter", a.filter.clone());
    put("scenario", a.scenario.clone());
    put("volfrac", a.volfrac.map(|v| v.to_string()));
    put("move", a.move_limit.map(|v| v.to_string()));
    put("beta-init", a.beta_init.map(|v| v.to_string()));
    put("beta-max", a.beta_max.map(|v| v.to_string()));
    put("max-iter", a.max_iter.map(|v| v.to_string()));
    put("out", a.out.as_ref().map(|v| v.display().to_string()));
    for (k, v) in flags {
        cfg.set(k, &v)?;
    }
    cfg.dump_denominators |= a.dump_denominators;
    cfg.lean_history |= a.lean_history;
    cfg.quiet |= a.quiet;
    // surface configuration mistakes as usage errors
    let p = cfg.problem_definition()?;
    cfg.optimizer_config(&p).validate()?;
    Ok(cfg)
}
