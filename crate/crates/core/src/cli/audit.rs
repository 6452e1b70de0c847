//! Minimum feature size audit by morphological opening.
//!
//! A pixel of a phase is covered when some disk of radius `r_min` lies
//! entirely in that phase and contains it. Only pixels inside the domain
//! are tested, so the outside of the domain neither helps nor hurts.

use super::raster::Raster;
use crate::error::Result;
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseReport {
    /// Smallest radius of the largest phase disk covering any phase
    /// pixel, in physical units (capped at twice the audit radius).
    pub min_radius: f64,
    pub violation_fraction: f64,
    pub pixels: usize,
    pub uncovered: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureSizeReport {
    pub r_min: f64,
    pub solid: PhaseReport,
    pub void: PhaseReport,
}

pub fn audit_feature_size(field: &[f64], mesh: &Mesh, r_min: f64) -> Result<FeatureSizeReport> {
    let raster = Raster::from_mesh(mesh, field)?;
    Ok(audit_raster(&raster, r_min))
}

pub fn audit_raster(raster: &Raster, r_min: f64) -> FeatureSizeReport {
    let r = r_min / raster.cell;
    FeatureSizeReport {
        r_min,
        solid: phase(raster, r, true),
        void: phase(raster, r, false),
    }
}

fn phase(raster: &Raster, r: f64, solid: bool) -> PhaseReport {
    let (nx, ny) = (raster.nx as i64, raster.ny as i64);
    let in_phase = |ix: i64, iy: i64| raster.get(ix, iy).map(|v| (v > 0.5) == solid);
    let cap = 2.0 * r;
    let w = cap.ceil() as i64 + 1;

    // distance from each phase pixel to the nearest in-domain pixel of the
    // other phase, capped
    let mut clear = vec![0.0f64; raster.values.len()];
    for iy in 0..ny {
        for ix in 0..nx {
            if in_phase(ix, iy) != Some(true) {
                continue;
            }
            let mut d2 = cap * cap;
            for dy in -w..=w {
                for dx in -w..=w {
                    let q = (dx * dx + dy * dy) as f64;
                    if q < d2 && in_phase(ix + dx, iy + dy) == Some(false) {
                        d2 = q;
                    }
                }
            }
            clear[(iy * nx + ix) as usize] = d2.sqrt();
        }
    }

    let mut pixels = 0;
    let mut uncovered = 0;
    let mut min_radius = cap;
    for iy in 0..ny {
        for ix in 0..nx {
            if in_phase(ix, iy) != Some(true) {
                continue;
            }
            pixels += 1;
            let mut covered = false;
            let mut best = 0.0f64;
            for dy in -w..=w {
                for dx in -w..=w {
                    let (px, py) = (ix + dx, iy + dy);
                    if px < 0 || py < 0 || px >= nx || py >= ny {
                        continue;
                    }
                    let c = clear[(py * nx + px) as usize];
                    let dist = ((dx * dx + dy * dy) as f64).sqrt();
                    if dist < c {
                        best = best.max(c);
                        if c >= r && dist < r {
                            covered = true;
                        }
                    }
                }
            }
            if !covered {
                uncovered += 1;
            }
            min_radius = min_radius.min(best);
        }
    }
    PhaseReport {
        min_radius: if pixels == 0 { 0.0 } else { min_radius * raster.cell },
        violation_fraction: if pixels == 0 { 0.0 } else { uncovered as f64 / pixels as f64 },
        pixels,
        uncovered,
    }
}
