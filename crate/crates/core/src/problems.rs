//! Benchmark problem presets: MBB half-beam (3:1 and 6:1), cantilever and
//! heat sink.
//!
//! Geometry is in physical units. The filter radius is stored physically
//! too, so changing the resolution keeps the length scale of the design.

use crate::error::{Error, Result};
use crate::geometry::{FilterRadius, Point2};
use crate::mesh::{build_irregular, build_regular, ElementRole, Mesh, PassiveRegion, Region};
use crate::physics::{LoadCase, MaterialModel, NodalLoad, NodeSelector, Physics, Support};
use crate::projection::ContinuationSchedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialField {
    Uniform,
    /// Checkerboard of squares with side `2 r_min`, rescaled to the target mean.
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    Regular,
    Irregular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemDefinition {
    pub name: String,
    pub width: f64,
    pub height: f64,
    pub nelx: usize,
    pub nely: usize,
    /// Cell count for polygonal meshes.
    pub n_cells: usize,
    pub load_case: LoadCase,
    pub passive: Vec<PassiveRegion>,
    /// Boundary lines (given by two points) whose segments get no padding.
    pub pad_excluded: Vec<(Point2, Point2)>,
    pub r_fil: f64,
    pub v_int: f64,
    pub material: MaterialModel,
    pub initial: InitialField,
    pub beta_init: f64,
    pub beta_max: f64,
}

impl ProblemDefinition {
    pub fn element_size(&self) -> f64 {
        self.width / self.nelx as f64
    }

    /// Filter radius in element widths at the current resolution.
    pub fn r_fil_elements(&self) -> f64 {
        self.r_fil / self.element_size()
    }

    pub fn radius(&self) -> Result<FilterRadius> {
        FilterRadius::new(self.r_fil)
    }

    pub fn domain(&self) -> Vec<Point2> {
        vec![
            Point2::new(0.0, 0.0),
            Point2::new(self.width, 0.0),
            Point2::new(self.width, self.height),
            Point2::new(0.0, self.height),
        ]
    }

    pub fn schedule(&self) -> Result<ContinuationSchedule> {
        ContinuationSchedule::new(self.beta_init, self.beta_max)
    }

    /// Sets the regular resolution by element count along x; the y count
    /// follows the aspect ratio.
    pub fn with_resolution(mut self, nelx: usize) -> Result<Self> {
        let nely = (nelx as f64 * self.height / self.width).round() as usize;
        if nelx == 0 || nely == 0 {
            return Err(Error::InvalidArgument(format!("resolution {nelx} too coarse")));
        }
        self.nelx = nelx;
        self.nely = nely;
        Ok(self)
    }

    pub fn build_mesh(&self, kind: MeshKind, seed: u64) -> Result<Mesh> {
        let mut mesh = match kind {
            MeshKind::Regular => build_regular(self.nelx, self.nely, self.width, self.height)?,
            MeshKind::Irregular => build_irregular(self.n_cells, &self.domain(), seed)?,
        };
        for &(a, b) in &self.pad_excluded {
            mesh.exclude_segments_on_line(a, b);
        }
        let empty = mesh.apply_passive_regions(&self.passive);
        if let Some(&k) = empty.first() {
            return Err(Error::InvalidArgument(format!("passive region {k} contains no element centroid")));
        }
        mesh.validate()?;
        Ok(mesh)
    }

    /// Initial design over all mesh elements: passive elements at their
    /// fixed value, padding at zero.
    pub fn initial_field(&self, mesh: &Mesh, kind: InitialField) -> Vec<f64> {
        let mut rho: Vec<f64> = mesh
            .elements
            .iter()
            .map(|e| match e.role {
                ElementRole::PassiveSolid => 1.0,
                ElementRole::PassiveVoid | ElementRole::Padding => 0.0,
                ElementRole::Design => match kind {
                    InitialField::Uniform => self.v_int,
                    InitialField::Grid => {
                        let side = self.r_fil; // 2 r_min
                        let cx = (e.centroid.x / side).floor() as i64;
                        let cy = (e.centroid.y / side).floor() as i64;
                        if (cx + cy).rem_euclid(2) == 0 {
                            1.0
                        } else {
                            0.0
                        }
                    }
                },
            })
            .collect();
        if kind == InitialField::Grid {
            let (mut total, mut filled) = (0.0, 0.0);
            for e in mesh.elements.iter().filter(|e| e.role == ElementRole::Design) {
                total += e.area;
                filled += e.area * rho[e.id];
            }
            let scale = if filled > 0.0 { self.v_int * total / filled } else { 0.0 };
            for e in mesh.elements.iter().filter(|e| e.role == ElementRole::Design) {
                rho[e.id] = (rho[e.id] * scale).min(1.0);
            }
        }
        rho
    }

    /// Applies one `key = value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = |v: &str| -> Result<f64> {
            v.parse().map_err(|_| Error::Config(format!("`{key}` expects a number, got `{v}`")))
        };
        let count = |v: &str| -> Result<usize> {
            v.parse().map_err(|_| Error::Config(format!("`{key}` expects a count, got `{v}`")))
        };
        match key {
            "nelx" => {
                let n = count(value)?;
                *self = self.clone().with_resolution(n)?;
            }
            "nely" => self.nely = count(value)?,
            "nel" | "n_cells" => self.n_cells = count(value)?,
            "volfrac" | "v_int" => self.v_int = num(value)?,
            "r_fil" => self.set_radius(num(value)?),
            "r_fil_elements" => self.set_radius(num(value)? * self.element_size()),
            "beta_init" => self.beta_init = num(value)?,
            "beta_max" => self.beta_max = num(value)?,
            "penal" => self.material.penal = num(value)?,
            "nu" => self.material.nu = num(value)?,
            "emin" => self.material.emin = num(value)?,
            "initial" => {
                self.initial = match value {
                    "uniform" => InitialField::Uniform,
                    "grid" => InitialField::Grid,
                    _ => return Err(Error::Config(format!("unknown initial field `{value}`"))),
                }
            }
            _ => return Err(Error::Config(format!("unknown problem key `{key}`"))),
        }
        Ok(())
    }

    /// Changes the filter radius. Passive box sides that were one radius
    /// long follow it, keeping the side that touches the domain boundary
    /// (or the box centre) in place.
    pub fn set_radius(&mut self, r_fil: f64) {
        let old = self.r_fil;
        let tol = 1e-9 * self.width.max(self.height);
        let resize = |lo: &mut f64, hi: &mut f64, extent: f64| {
            if ((*hi - *lo) - old).abs() > tol {
                return;
            }
            if lo.abs() <= tol {
                *hi = *lo + r_fil;
            } else if (*hi - extent).abs() <= tol {
                *lo = *hi - r_fil;
            } else {
                let c = 0.5 * (*lo + *hi);
                *lo = c - 0.5 * r_fil;
                *hi = c + 0.5 * r_fil;
            }
        };
        for p in &mut self.passive {
            let Region { min, max } = &mut p.region;
            resize(&mut min.x, &mut max.x, self.width);
            resize(&mut min.y, &mut max.y, self.height);
        }
        self.r_fil = r_fil;
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_int > 0.0 && self.v_int < 1.0) {
            return Err(Error::InvalidArgument(format!("volume fraction {} outside (0, 1)", self.v_int)));
        }
        if self.nelx == 0 || self.nely == 0 || self.n_cells == 0 {
            return Err(Error::InvalidArgument("empty mesh resolution".into()));
        }
        self.radius()?;
        self.material.validate()?;
        self.schedule()?;
        Ok(())
    }
}

pub const PRESETS: [&str; 5] = ["mbb", "mbb_long", "mbb_long_beta1", "cantilever", "heatsink"];

fn box_at(x0: f64, y0: f64, side: f64) -> PassiveRegion {
    PassiveRegion { region: Region::new(Point2::new(x0, y0), Point2::new(x0 + side, y0 + side)), solid: true }
}

fn mbb(width: f64, nelx: usize) -> ProblemDefinition {
    let h = width / nelx as f64;
    let r_fil = 8.0 * h;
    let side = r_fil; // 2 r_min
    let tol = 1e-9 * width;
    ProblemDefinition {
        name: String::new(),
        width,
        height: 1.0,
        nelx,
        nely: 100,
        n_cells: nelx * 100,
        load_case: LoadCase {
            physics: Physics::Elastic,
            loads: vec![NodalLoad { at: NodeSelector::Nearest(Point2::new(0.0, 1.0)), value: [0.0, -1.0] }],
            supports: vec![
                Support {
                    at: NodeSelector::OnSegment { a: Point2::new(0.0, 0.0), b: Point2::new(0.0, 1.0), tol },
                    fixed: [true, false],
                },
                Support { at: NodeSelector::Nearest(Point2::new(width, 0.0)), fixed: [false, true] },
            ],
        },
        passive: vec![box_at(0.0, 1.0 - side, side), box_at(width - side, 0.0, side)],
        pad_excluded: vec![(Point2::new(0.0, 0.0), Point2::new(0.0, 1.0))],
        r_fil,
        v_int: 0.3,
        material: MaterialModel::default(),
        initial: InitialField::Uniform,
        beta_init: 1.5,
        beta_max: 38.4,
    }
}

pub fn preset(name: &str) -> Result<ProblemDefinition> {
    let mut p = match name {
        "mbb" => ProblemDefinition { beta_max: 38.0, ..mbb(3.0, 300) },
        "mbb_long" => mbb(6.0, 600),
        "mbb_long_beta1" => ProblemDefinition { beta_init: 1.0, ..mbb(6.0, 600) },
        "cantilever" => {
            let (w, nelx) = (2.0, 200);
            let r_fil = 8.0 * w / nelx as f64;
            let tol = 1e-9 * w;
            ProblemDefinition {
                name: String::new(),
                width: w,
                height: 1.0,
                nelx,
                nely: 100,
                n_cells: 20_000,
                load_case: LoadCase {
                    physics: Physics::Elastic,
                    loads: vec![NodalLoad { at: NodeSelector::Nearest(Point2::new(w, 0.5)), value: [0.0, -1.0] }],
                    supports: vec![Support {
                        at: NodeSelector::OnSegment { a: Point2::new(0.0, 0.0), b: Point2::new(0.0, 1.0), tol },
                        fixed: [true, true],
                    }],
                },
                passive: vec![box_at(w - r_fil, 0.5 - r_fil / 2.0, r_fil)],
                pad_excluded: vec![(Point2::new(0.0, 0.0), Point2::new(0.0, 1.0))],
                r_fil,
                v_int: 0.4,
                material: MaterialModel::default(),
                initial: InitialField::Uniform,
                beta_init: 1.5,
                beta_max: 38.4,
            }
        }
        "heatsink" => {
            let (w, hgt, nelx) = (10.0 / 3.0, 1.0, 200);
            let r_fil = 10.0 * w / nelx as f64;
            let sink = 0.2 * hgt;
            let tol = 1e-9 * w;
            ProblemDefinition {
                name: String::new(),
                width: w,
                height: hgt,
                nelx,
                nely: 60,
                n_cells: 12_000,
                load_case: LoadCase {
                    physics: Physics::Thermal,
                    loads: vec![NodalLoad { at: NodeSelector::AllDomain, value: [1.0, 0.0] }],
                    supports: vec![Support {
                        at: NodeSelector::OnSegment {
                            a: Point2::new(0.0, 0.5 * (hgt - sink)),
                            b: Point2::new(0.0, 0.5 * (hgt + sink)),
                            tol,
                        },
                        fixed: [true, false],
                    }],
                },
                passive: vec![PassiveRegion {
                    region: Region::new(Point2::new(0.0, 0.5 * (hgt - sink)), Point2::new(r_fil, 0.5 * (hgt + sink))),
                    solid: true,
                }],
                pad_excluded: vec![],
                r_fil,
                v_int: 0.4,
                material: MaterialModel::default(),
                initial: InitialField::Grid,
                beta_init: 1.0,
                beta_max: 38.4,
            }
        }
        _ => return Err(Error::UnknownPreset(name.to_string())),
    };
    p.name = name.to_string();
    p.validate()?;
    Ok(p)
}
