//! Robust three-field compliance minimization with OC updates.
//!
//! The objective is the compliance of the eroded design. The volume
//! constraint acts on the dilated design, and its bound is rescaled
//! periodically so the intermediate design meets the target fraction.

use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::filter::{FilterMode, FilterOperator};
use crate::mesh::{ElementRole, ExtensionSpec, Mesh};
use crate::physics::FeSystem;
use crate::problems::{InitialField, ProblemDefinition};
use crate::projection::{heaviside, project_triple, ContinuationSchedule, HeavisideParams, RobustThresholds};

/// Which parts of the analysis see the padding layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    FilterOnly,
    FilterFEA,
    FilterVolume,
    FilterFEAVolume,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::FilterOnly => "filter",
            Scenario::FilterFEA => "filter+fea",
            Scenario::FilterVolume => "filter+vol",
            Scenario::FilterFEAVolume => "filter+fea+vol",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "filter" => Some(Scenario::FilterOnly),
            "filter+fea" => Some(Scenario::FilterFEA),
            "filter+vol" => Some(Scenario::FilterVolume),
            "filter+fea+vol" => Some(Scenario::FilterFEAVolume),
            _ => None,
        }
    }

    pub fn padded_fea(self) -> bool {
        matches!(self, Scenario::FilterFEA | Scenario::FilterFEAVolume)
    }

    pub fn padded_volume(self) -> bool {
        matches!(self, Scenario::FilterVolume | Scenario::FilterFEAVolume)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub move_limit: f64,
    pub oc_damping: f64,
    pub max_iter: usize,
    pub change_tol: f64,
    pub volume_rescale_period: usize,
    pub scenario: Scenario,
    pub filter_mode: FilterMode,
    pub v_int: f64,
    pub thresholds: RobustThresholds,
    /// Record intermediate and dilated compliances (two extra solves per
    /// iteration). When off they are computed for the final design only.
    pub full_history: bool,
}

impl OptimizerConfig {
    pub fn new(filter_mode: FilterMode, scenario: Scenario, v_int: f64) -> Self {
        Self {
            move_limit: 0.05,
            oc_damping: 0.5,
            max_iter: 500,
            change_tol: 0.01,
            volume_rescale_period: 20,
            scenario,
            filter_mode,
            v_int,
            thresholds: RobustThresholds::default(),
            full_history: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.move_limit > 0.0 && self.move_limit <= 1.0) {
            return Err(Error::InvalidArgument(format!("move limit {} outside (0, 1]", self.move_limit)));
        }
        if !(self.oc_damping > 0.0) {
            return Err(Error::InvalidArgument("oc damping must be positive".into()));
        }
        if !(self.v_int > 0.0 && self.v_int < 1.0) {
            return Err(Error::InvalidArgument(format!("volume fraction {} outside (0, 1)", self.v_int)));
        }
        if self.volume_rescale_period == 0 {
            return Err(Error::InvalidArgument("rescale period must be positive".into()));
        }
        if !(self.change_tol >= 0.0) {
            return Err(Error::InvalidArgument("change tolerance must be non-negative".into()));
        }
        if self.scenario != Scenario::FilterOnly && self.filter_mode != FilterMode::RealExtension {
            return Err(Error::IncompatibleMode("padding of FEA or volume needs the real extension"));
        }
        self.thresholds.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRecord {
    pub iter: usize,
    pub c_ero: f64,
    pub c_int: f64,
    pub c_dil: f64,
    pub vol_int: f64,
    pub vol_dil: f64,
    pub beta: f64,
    pub max_change: f64,
}

pub const HISTORY_HEADER: &str = "iter,c_ero,c_int,c_dil,vol_int,vol_dil,beta,max_change";

pub fn write_history_csv<W: Write>(history: &[HistoryRecord], mut out: W) -> Result<()> {
    writeln!(out, "{HISTORY_HEADER}")?;
    for h in history {
        writeln!(
            out,
            "{},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            h.iter, h.c_ero, h.c_int, h.c_dil, h.vol_int, h.vol_dil, h.beta, h.max_change
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationState {
    pub rho: Vec<f64>,
    pub beta: f64,
    pub v_dil_bound: f64,
    pub iteration: usize,
    pub history: Vec<HistoryRecord>,
}

/// Element volumes entering a volume measure, normalized by the area of
/// the original domain.
#[derive(Debug, Clone)]
pub struct VolumeConstraint {
    pub volumes: Vec<f64>,
    pub include_padding: bool,
    pub area: f64,
}

impl VolumeConstraint {
    pub fn new(mesh: &Mesh, include_padding: bool) -> Self {
        let volumes = mesh
            .elements
            .iter()
            .map(|e| if include_padding || e.role != ElementRole::Padding { e.area } else { 0.0 })
            .collect();
        Self { volumes, include_padding, area: mesh.domain_area() }
    }

    pub fn measure(&self, field: &[f64]) -> f64 {
        self.volumes.iter().zip(field).map(|(v, x)| v * x).sum::<f64>() / self.area
    }
}

/// New dilated-volume bound `v_int_target * V(dil) / V(int)`, or the old
/// bound when the intermediate volume vanishes.
pub fn rescale_dilated_bound(old: f64, vol_dil: f64, vol_int: f64, v_int_target: f64) -> f64 {
    if vol_int > 0.0 {
        v_int_target * vol_dil / vol_int
    } else {
        old
    }
}

pub const OC_BISECTIONS: usize = 50;

/// Result of one optimality-criteria step.
#[derive(Debug, Clone, PartialEq)]
pub struct OcStep {
    pub rho: Vec<f64>,
    pub lambda: f64,
    /// False when even the largest multiplier leaves the volume above the
    /// bound; `rho` is then the most volume-reducing move-limited design.
    pub bound_met: bool,
}

/// Inputs of an optimality-criteria step. Only the entries listed in
/// `free` change.
#[derive(Debug, Clone, Copy)]
pub struct OcProblem<'a> {
    pub rho: &'a [f64],
    pub dc: &'a [f64],
    pub dv: &'a [f64],
    pub free: &'a [usize],
    pub bound: f64,
    pub move_limit: f64,
    pub damping: f64,
}

/// Optimality-criteria update with a bisected multiplier. `volume`
/// evaluates the constrained volume of a candidate design and must be
/// non-increasing in the multiplier.
pub fn oc_update(p: OcProblem<'_>, mut volume: impl FnMut(&[f64]) -> Result<f64>) -> Result<OcStep> {
    if let Some(j) = p.free.iter().copied().find(|&j| !(p.dc[j].is_finite() && p.dv[j].is_finite())) {
        return Err(Error::NonFinite(format!("sensitivity of element {j}")));
    }
    let candidate = |lambda: f64| -> Vec<f64> {
        let mut x = p.rho.to_vec();
        for &j in p.free {
            let ratio = (-p.dc[j]).max(0.0) / (lambda * p.dv[j].max(1e-300));
            let lo = (p.rho[j] - p.move_limit).max(0.0);
            let hi = (p.rho[j] + p.move_limit).min(1.0);
            x[j] = (p.rho[j] * ratio.powf(p.damping)).clamp(lo, hi);
        }
        x
    };
    let mut eval = |x: &[f64]| -> Result<f64> {
        let v = volume(x)?;
        if !v.is_finite() {
            return Err(Error::Bisection(format!("volume evaluated to {v}")));
        }
        Ok(v)
    };
    let (mut l1, mut l2) = (1e-9f64, 1e9f64);
    let top = candidate(l2);
    if eval(&top)? > p.bound {
        return Ok(OcStep { rho: top, lambda: l2, bound_met: false });
    }
    for _ in 0..OC_BISECTIONS {
        let mid = (l1 * l2).sqrt();
        if eval(&candidate(mid))? > p.bound {
            l1 = mid;
        } else {
            l2 = mid;
        }
    }
    Ok(OcStep { rho: candidate(l2), lambda: l2, bound_met: true })
}

/// Fields and derivatives of one design evaluation.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub filtered: Vec<f64>,
    pub eroded: Vec<f64>,
    pub intermediate: Vec<f64>,
    pub dilated: Vec<f64>,
    pub c_ero: f64,
    pub c_int: f64,
    pub c_dil: f64,
    pub vol_int: f64,
    pub vol_dil: f64,
    /// d c_ero / d rho
    pub dc: Vec<f64>,
    /// d vol_dil / d rho
    pub dv: Vec<f64>,
}

/// Everything that stays fixed during a run.
pub struct Evaluator {
    mesh: Mesh,
    filter: FilterOperator,
    fea: FeSystem,
    vol_int: VolumeConstraint,
    vol_dil: VolumeConstraint,
    roles: Vec<ElementRole>,
    thresholds: RobustThresholds,
}

impl fmt::Debug for Evaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Evaluator")
            .field("elements", &self.mesh.len())
            .field("filter", &self.filter.mode())
            .field("fea", &self.fea)
            .finish()
    }
}

impl Evaluator {
    /// `base` is the unextended problem mesh; it is extended here when the
    /// filter mode asks for real padding.
    pub fn new(problem: &ProblemDefinition, base: &Mesh, cfg: &OptimizerConfig) -> Result<Self> {
        cfg.validate()?;
        let r = problem.radius()?;
        let (mesh, filter) = if cfg.filter_mode == FilterMode::RealExtension {
            let spec = ExtensionSpec {
                t_pad: r.dilation_distance(),
                affect_fea: cfg.scenario.padded_fea(),
                affect_volume: cfg.scenario.padded_volume(),
            };
            let mesh = base.extend(&spec)?;
            // the filter sees void at least one radius deep; without this the
            // outer padding rows are truncated and pull the intermediate
            // design out of the domain
            let deep = base.extend(&ExtensionSpec { t_pad: spec.t_pad.max(r.value()), ..spec })?;
            let filter = FilterOperator::build_with_deep_padding(&mesh, &deep, r)?;
            (mesh, filter)
        } else {
            (base.clone(), FilterOperator::build(base, r, cfg.filter_mode)?)
        };
        let fea = FeSystem::new(&mesh, problem.material, &problem.load_case, cfg.scenario.padded_fea())?;
        Ok(Self {
            vol_int: VolumeConstraint::new(&mesh, false),
            vol_dil: VolumeConstraint::new(&mesh, cfg.scenario.padded_volume()),
            roles: mesh.roles().collect(),
            mesh,
            filter,
            fea,
            thresholds: cfg.thresholds,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn filter(&self) -> &FilterOperator {
        &self.filter
    }

    pub fn fea(&self) -> &FeSystem {
        &self.fea
    }

    pub fn free_indices(&self) -> Vec<usize> {
        self.mesh.design_indices()
    }

    fn override_passive(&self, field: &mut [f64], deriv: &mut [f64]) {
        for (k, role) in self.roles.iter().enumerate() {
            match role {
                ElementRole::PassiveSolid => {
                    field[k] = 1.0;
                    deriv[k] = 0.0;
                }
                ElementRole::PassiveVoid => {
                    field[k] = 0.0;
                    deriv[k] = 0.0;
                }
                ElementRole::Design | ElementRole::Padding => {}
            }
        }
    }

    /// Volume of the dilated design, the quantity the OC step constrains.
    pub fn dilated_volume(&self, rho: &[f64], beta: f64) -> Result<f64> {
        let filtered = self.filter.apply(rho)?;
        let p = HeavisideParams::new(beta, self.thresholds.dilated)?;
        let mut dil: Vec<f64> = filtered.iter().map(|&x| heaviside(x, p)).collect();
        for (k, role) in self.roles.iter().enumerate() {
            match role {
                ElementRole::PassiveSolid => dil[k] = 1.0,
                ElementRole::PassiveVoid => dil[k] = 0.0,
                _ => {}
            }
        }
        Ok(self.vol_dil.measure(&dil))
    }

    pub fn evaluate(&self, rho: &[f64], beta: f64, all_compliances: bool) -> Result<Evaluation> {
        let filtered = self.filter.apply(rho)?;
        let mut t = project_triple(&filtered, beta, &self.thresholds)?;
        self.override_passive(&mut t.eroded, &mut t.d_eroded);
        self.override_passive(&mut t.intermediate, &mut t.d_intermediate);
        self.override_passive(&mut t.dilated, &mut t.d_dilated);

        let ero = self.fea.solve(&t.eroded)?;
        let (c_int, c_dil) = if all_compliances {
            (self.fea.solve(&t.intermediate)?.compliance, self.fea.solve(&t.dilated)?.compliance)
        } else {
            (f64::NAN, f64::NAN)
        };
        let dc_tilde: Vec<f64> = ero.sensitivities.iter().zip(&t.d_eroded).map(|(s, d)| s * d).collect();
        let dv_tilde: Vec<f64> = self
            .vol_dil
            .volumes
            .iter()
            .zip(&t.d_dilated)
            .map(|(v, d)| v * d / self.vol_dil.area)
            .collect();
        Ok(Evaluation {
            c_ero: ero.compliance,
            c_int,
            c_dil,
            vol_int: self.vol_int.measure(&t.intermediate),
            vol_dil: self.vol_dil.measure(&t.dilated),
            dc: self.filter.apply_transpose(&dc_tilde)?,
            dv: self.filter.apply_transpose(&dv_tilde)?,
            filtered,
            eroded: t.eroded,
            intermediate: t.intermediate,
            dilated: t.dilated,
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub state: OptimizationState,
    /// Evaluation of the final design.
    pub final_eval: Evaluation,
    pub converged: bool,
    /// Iterations whose OC step could not bring the dilated volume down
    /// to its bound within the move limit.
    pub infeasible_steps: Vec<usize>,
}

/// Runs the optimization on `base` (the problem mesh before any padding).
pub fn run(
    problem: &ProblemDefinition,
    base: &Mesh,
    cfg: &OptimizerConfig,
    schedule: &ContinuationSchedule,
    observer: &mut dyn FnMut(&HistoryRecord),
) -> Result<RunResult> {
    schedule.validate()?;
    let ev = Evaluator::new(problem, base, cfg)?;
    let initial = if problem.initial == InitialField::Grid { InitialField::Grid } else { InitialField::Uniform };
    let init_problem = ProblemDefinition { v_int: cfg.v_int, ..problem.clone() };
    let mut rho = init_problem.initial_field(ev.mesh(), initial);
    let free = ev.free_indices();

    let mut state = OptimizationState {
        rho: Vec::new(),
        beta: schedule.beta_at(0),
        v_dil_bound: cfg.v_int,
        iteration: 0,
        history: Vec::new(),
    };
    let mut infeasible_steps = Vec::new();
    let mut change = f64::INFINITY;
    let mut k = 0;
    loop {
        let beta = schedule.beta_at(k);
        let e = ev.evaluate(&rho, beta, cfg.full_history)?;
        if k % cfg.volume_rescale_period == 0 {
            state.v_dil_bound = rescale_dilated_bound(state.v_dil_bound, e.vol_dil, e.vol_int, cfg.v_int);
        }
        let rec = HistoryRecord {
            iter: k,
            c_ero: e.c_ero,
            c_int: e.c_int,
            c_dil: e.c_dil,
            vol_int: e.vol_int,
            vol_dil: e.vol_dil,
            beta,
            max_change: if k == 0 { 0.0 } else { change },
        };
        if !e.c_ero.is_finite() || (cfg.full_history && !(e.c_int.is_finite() && e.c_dil.is_finite())) {
            return Err(Error::NonFinite(format!("compliance at iteration {k}: {rec:?}")));
        }
        state.history.push(rec);
        observer(&rec);
        state.beta = beta;
        state.iteration = k;

        let converged = k > 0 && schedule.saturated_at(k) && change < cfg.change_tol;
        if converged || k >= cfg.max_iter {
            let e = if cfg.full_history { e } else { ev.evaluate(&rho, beta, true)? };
            if let Some(last) = state.history.last_mut() {
                last.c_int = e.c_int;
                last.c_dil = e.c_dil;
            }
            state.rho = rho;
            return Ok(RunResult { state, final_eval: e, converged, infeasible_steps });
        }

        let step = oc_update(
            OcProblem {
                rho: &rho,
                dc: &e.dc,
                dv: &e.dv,
                free: &free,
                bound: state.v_dil_bound,
                move_limit: cfg.move_limit,
                damping: cfg.oc_damping,
            },
            |x| ev.dilated_volume(x, beta),
        )
        .map_err(|err| Error::Bisection(format!("iteration {k}: {err}")))?;
        if !step.bound_met {
            infeasible_steps.push(k);
        }
        let next = step.rho;
        change = free.iter().map(|&j| (next[j] - rho[j]).abs()).fold(0.0, f64::max);
        rho = next;
        k += 1;
    }
}
