//! Element fields sampled on a pixel grid, plus 8-bit PGM output.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::filter::SpatialGrid;
use crate::geometry::{point_in_polygon, Point2};
use crate::mesh::{DomainKind, ElementRole, Mesh};

/// Row-major pixel grid, row 0 at the bottom. `None` marks pixels outside
/// the design domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub nx: usize,
    pub ny: usize,
    pub cell: f64,
    pub origin: Point2,
    pub values: Vec<Option<f64>>,
}

impl Raster {
    pub fn get(&self, ix: i64, iy: i64) -> Option<f64> {
        if ix < 0 || iy < 0 || ix >= self.nx as i64 || iy >= self.ny as i64 {
            return None;
        }
        self.values[iy as usize * self.nx + ix as usize]
    }

    /// One pixel per element on regular meshes, pixels of half the mean
    /// cell size on polygonal ones. Padding elements are left out.
    pub fn from_mesh(mesh: &Mesh, field: &[f64]) -> Result<Self> {
        if field.len() != mesh.len() {
            return Err(Error::LengthMismatch { expected: mesh.len(), got: field.len() });
        }
        let lo = mesh.lower_left();
        let hi = mesh.upper_right();
        match mesh.domain_kind {
            DomainKind::Regular => {
                let h = mesh.element_size;
                let nx = ((hi.x - lo.x) / h).round() as usize;
                let ny = ((hi.y - lo.y) / h).round() as usize;
                let mut values = vec![None; nx * ny];
                for e in mesh.elements.iter().filter(|e| e.role != ElementRole::Padding) {
                    let (ix, iy) = mesh.cell_index(e.id);
                    values[iy as usize * nx + ix as usize] = Some(field[e.id]);
                }
                Ok(Self { nx, ny, cell: h, origin: lo, values })
            }
            DomainKind::Irregular => {
                let cell = 0.5 * mesh.element_size;
                let nx = ((hi.x - lo.x) / cell).ceil() as usize;
                let ny = ((hi.y - lo.y) / cell).ceil() as usize;
                let originals: Vec<usize> =
                    mesh.elements.iter().filter(|e| e.role != ElementRole::Padding).map(|e| e.id).collect();
                let centroids: Vec<Point2> = originals.iter().map(|&e| mesh.elements[e].centroid).collect();
                let reach = originals
                    .iter()
                    .flat_map(|&e| mesh.polygon(e).into_iter().map(move |p| (e, p)))
                    .map(|(e, p)| p.dist(mesh.elements[e].centroid))
                    .fold(0.0, f64::max);
                let grid = SpatialGrid::new(&centroids, reach.max(cell));
                let mut values = vec![None; nx * ny];
                for iy in 0..ny {
                    for ix in 0..nx {
                        let p = Point2::new(lo.x + (ix as f64 + 0.5) * cell, lo.y + (iy as f64 + 0.5) * cell);
                        if !point_in_polygon(p, &mesh.domain) {
                            continue;
                        }
                        let mut best: Option<(f64, usize)> = None;
                        grid.for_each_candidate(p, reach, |k| {
                            let e = originals[k];
                            if point_in_polygon(p, &mesh.polygon(e)) {
                                let d = p.dist(centroids[k]);
                                if best.is_none_or(|(bd, be)| d < bd || (d == bd && e < be)) {
                                    best = Some((d, e));
                                }
                            }
                        });
                        values[iy * nx + ix] = best.map(|(_, e)| field[e]);
                    }
                }
                Ok(Self { nx, ny, cell, origin: lo, values })
            }
        }
    }

    /// 8-bit gray levels, top row first, 0 = solid, 255 = void or outside.
    pub fn gray_levels(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for iy in (0..self.ny).rev() {
            for ix in 0..self.nx {
                let v = self.values[iy * self.nx + ix].map_or(0.0, |v| v.clamp(0.0, 1.0));
                out.push((255.0 * (1.0 - v)).round() as u8);
            }
        }
        out
    }
}

pub fn write_pgm<W: Write>(raster: &Raster, mut out: W) -> Result<()> {
    write!(out, "P5\n{} {}\n255\n", raster.nx, raster.ny)?;
    out.write_all(&raster.gray_levels())?;
    Ok(())
}

/// Reads a binary 8-bit PGM into `(width, height, pixels)`, top row first.
pub fn read_pgm<R: BufRead>(mut input: R) -> Result<(usize, usize, Vec<u8>)> {
    let mut header = Vec::new();
    let mut fields = Vec::new();
    while fields.len() < 4 {
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            return Err(Error::Parse { line: header.len() + 1, msg: "truncated PGM header".into() });
        }
        header.push(line.clone());
        let content = line.split('#').next().unwrap_or("");
        fields.extend(content.split_whitespace().map(str::to_string));
    }
    let bad = |msg: &str| Error::Parse { line: 1, msg: msg.into() };
    if fields[0] != "P5" {
        return Err(bad("not a binary PGM"));
    }
    let w: usize = fields[1].parse().map_err(|_| bad("bad width"))?;
    let h: usize = fields[2].parse().map_err(|_| bad("bad height"))?;
    if fields[3] != "255" {
        return Err(bad("only 8-bit PGM is supported"));
    }
    let mut pixels = vec![0u8; w * h];
    input.read_exact(&mut pixels)?;
    Ok((w, h, pixels))
}
