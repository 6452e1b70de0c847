//! Density filter with boundary padding.
//!
//! All four modes share the numerator `sum_j v_j w(x_i, x_j) rho_j` over the
//! elements of the mesh at hand; they differ only in the per-row
//! denominator:
//!
//! * `NoTreatment`: the plain truncated sum.
//! * `RealExtension`: the plain sum on a mesh carrying void padding layers
//!   (taken at least one radius deep, see [`FilterOperator::build_with_deep_padding`]).
//! * `MeshMirroring`: the plain sum plus the weights of element copies
//!   reflected across every padded segment (and through right-angle corners
//!   joining two padded segments).
//! * `ApproximateVolume`: the analytic cone volume for rows whose filter
//!   disk crosses the padded boundary, a sectioned cone where an excluded
//!   segment cuts the disk.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    cone_volume_2d, mirror_point, nearest_segment, sectioned_cone_volume_2d, weight, BoundarySegment,
    FilterRadius, Point2,
};
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterMode {
    NoTreatment,
    RealExtension,
    MeshMirroring,
    ApproximateVolume,
}

impl FilterMode {
    pub fn name(self) -> &'static str {
        match self {
            FilterMode::NoTreatment => "none",
            FilterMode::RealExtension => "real",
            FilterMode::MeshMirroring => "mm",
            FilterMode::ApproximateVolume => "av",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(FilterMode::NoTreatment),
            "real" => Some(FilterMode::RealExtension),
            "mm" => Some(FilterMode::MeshMirroring),
            "av" => Some(FilterMode::ApproximateVolume),
            _ => None,
        }
    }

    pub const ALL: [FilterMode; 4] = [
        FilterMode::NoTreatment,
        FilterMode::RealExtension,
        FilterMode::MeshMirroring,
        FilterMode::ApproximateVolume,
    ];
}

impl fmt::Display for FilterMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Uniform bucket grid over element centroids.
pub(crate) struct SpatialGrid {
    origin: Point2,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl SpatialGrid {
    pub(crate) fn new(points: &[Point2], cell: f64) -> Self {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let nx = (((hi.x - lo.x) / cell).floor() as usize + 1).max(1);
        let ny = (((hi.y - lo.y) / cell).floor() as usize + 1).max(1);
        let mut buckets = vec![Vec::new(); nx * ny];
        let mut grid = Self { origin: lo, cell, nx, ny, buckets: Vec::new() };
        for (k, &p) in points.iter().enumerate() {
            let (ix, iy) = grid.bucket(p);
            buckets[iy * nx + ix].push(k as u32);
        }
        grid.buckets = buckets;
        grid
    }

    fn bucket(&self, p: Point2) -> (usize, usize) {
        let ix = ((p.x - self.origin.x) / self.cell).floor().clamp(0.0, (self.nx - 1) as f64) as usize;
        let iy = ((p.y - self.origin.y) / self.cell).floor().clamp(0.0, (self.ny - 1) as f64) as usize;
        (ix, iy)
    }

    /// Calls `f` with every stored index whose bucket intersects the box of
    /// half-width `radius` around `p`.
    pub(crate) fn for_each_candidate(&self, p: Point2, radius: f64, mut f: impl FnMut(usize)) {
        let lo = |v: f64, o: f64, n: usize| (((v - radius - o) / self.cell).floor().max(0.0) as usize).min(n);
        let hi = |v: f64, o: f64, n: usize| {
            let t = ((v + radius - o) / self.cell).floor();
            if t < 0.0 {
                None
            } else {
                Some((t as usize).min(n - 1))
            }
        };
        let (Some(x1), Some(y1)) = (hi(p.x, self.origin.x, self.nx), hi(p.y, self.origin.y, self.ny)) else {
            return;
        };
        let x0 = lo(p.x, self.origin.x, self.nx);
        let y0 = lo(p.y, self.origin.y, self.ny);
        for iy in y0..=y1 {
            for ix in x0..=x1 {
                for &k in &self.buckets[iy * self.nx + ix] {
                    f(k as usize);
                }
            }
        }
    }
}

/// Sparse density-filter operator in row-compressed storage.
///
/// `weights(i, j) = v_j w(x_i, x_j) > 0`, columns sorted within each row.
#[derive(Debug, Clone)]
pub struct FilterOperator {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    weights: Vec<f64>,
    t_row_ptr: Vec<usize>,
    t_cols: Vec<u32>,
    t_weights: Vec<f64>,
    denominators: Vec<f64>,
    mode: FilterMode,
    radius: FilterRadius,
    multi_cut_rows: Vec<usize>,
}

impl FilterOperator {
    pub fn build(mesh: &Mesh, r: FilterRadius, mode: FilterMode) -> Result<Self> {
        match (mode, mesh.is_extended()) {
            (FilterMode::RealExtension, false) => return Err(Error::IncompatibleMode("real")),
            (FilterMode::RealExtension, true) | (_, false) => {}
            (m, true) => return Err(Error::IncompatibleMode(m.name())),
        }
        let rv = r.value();
        let centroids: Vec<Point2> = mesh.elements.iter().map(|e| e.centroid).collect();
        let areas: Vec<f64> = mesh.elements.iter().map(|e| e.area).collect();
        let grid = SpatialGrid::new(&centroids, rv);
        let n = centroids.len();

        let rows: Vec<Vec<(u32, f64)>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let xi = centroids[i];
                let mut row = Vec::new();
                grid.for_each_candidate(xi, rv, |j| {
                    let w = weight(xi, centroids[j], r);
                    if w > 0.0 {
                        row.push((j as u32, areas[j] * w));
                    }
                });
                row.sort_unstable_by_key(|&(j, _)| j);
                row
            })
            .collect();

        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let nnz: usize = rows.iter().map(Vec::len).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut weights = Vec::with_capacity(nnz);
        for row in &rows {
            for &(j, w) in row {
                cols.push(j);
                weights.push(w);
            }
            row_ptr.push(cols.len());
        }
        drop(rows);

        let plain: Vec<f64> = (0..n).map(|i| weights[row_ptr[i]..row_ptr[i + 1]].iter().sum()).collect();
        let mut multi_cut_rows = Vec::new();
        let denominators = match mode {
            FilterMode::NoTreatment | FilterMode::RealExtension => plain,
            FilterMode::MeshMirroring => {
                let extra = mirrored_weights(mesh, &centroids, &areas, &grid, r);
                plain.iter().zip(&extra).map(|(p, e)| p + e).collect()
            }
            FilterMode::ApproximateVolume => {
                let (d, multi) = approximate_volumes(&mesh.boundary, &centroids, &plain, r);
                multi_cut_rows = multi;
                d
            }
        };
        if let Some((row, &value)) = denominators.iter().enumerate().find(|(_, d)| !(**d > 0.0)) {
            return Err(Error::NonPositiveDenominator { row, value });
        }

        let (t_row_ptr, t_cols, t_weights) = transpose(n, &row_ptr, &cols, &weights);
        Ok(Self {
            row_ptr,
            cols,
            weights,
            t_row_ptr,
            t_cols,
            t_weights,
            denominators,
            mode,
            radius: r,
            multi_cut_rows,
        })
    }

    /// Real-extension operator on `mesh` whose denominators come from
    /// `deep`, a wider extension of the same base mesh. Every element of
    /// `mesh` must appear in `deep` (matched by centroid). The extra void
    /// layers only add weight to the denominators, so the padding behaves
    /// as if it went on past the band that takes part in the analysis.
    pub fn build_with_deep_padding(mesh: &Mesh, deep: &Mesh, r: FilterRadius) -> Result<Self> {
        if !mesh.is_extended() || !deep.is_extended() {
            return Err(Error::IncompatibleMode("real"));
        }
        let full = Self::build(deep, r, FilterMode::RealExtension)?;
        let deep_centroids: Vec<Point2> = deep.elements.iter().map(|e| e.centroid).collect();
        let tol = 1e-6 * mesh.element_size;
        let grid = SpatialGrid::new(&deep_centroids, mesh.element_size);
        let keep = mesh
            .elements
            .iter()
            .map(|e| {
                let mut hit = None;
                grid.for_each_candidate(e.centroid, tol, |j| {
                    if (deep_centroids[j] - e.centroid).norm() <= tol {
                        hit = Some(j);
                    }
                });
                hit.ok_or_else(|| Error::InvalidArgument(format!("element {} has no counterpart in the deep padding", e.id)))
            })
            .collect::<Result<Vec<usize>>>()?;
        Ok(full.restrict(&keep))
    }

    /// Operator on the elements `keep` (new index = position in `keep`).
    /// Rows keep their denominators; dropped columns must carry zero density.
    fn restrict(&self, keep: &[usize]) -> Self {
        let mut new_index = vec![u32::MAX; self.len()];
        for (k, &old) in keep.iter().enumerate() {
            new_index[old] = k as u32;
        }
        let n = keep.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        for &old in keep {
            let mut row: Vec<(u32, f64)> =
                self.row(old).filter(|&(j, _)| new_index[j] != u32::MAX).map(|(j, w)| (new_index[j], w)).collect();
            row.sort_unstable_by_key(|&(j, _)| j);
            for (j, w) in row {
                cols.push(j);
                weights.push(w);
            }
            row_ptr.push(cols.len());
        }
        let denominators = keep.iter().map(|&old| self.denominators[old]).collect();
        let (t_row_ptr, t_cols, t_weights) = transpose(n, &row_ptr, &cols, &weights);
        Self {
            row_ptr,
            cols,
            weights,
            t_row_ptr,
            t_cols,
            t_weights,
            denominators,
            mode: self.mode,
            radius: self.radius,
            multi_cut_rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.denominators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.denominators.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn mode(&self) -> FilterMode {
        self.mode
    }

    pub fn radius(&self) -> FilterRadius {
        self.radius
    }

    pub fn denominators(&self) -> &[f64] {
        &self.denominators
    }

    /// Rows whose filter disk is cut by more than one excluded segment;
    /// only the nearest cut is accounted for.
    pub fn multi_cut_rows(&self) -> &[usize] {
        &self.multi_cut_rows
    }

    /// Stored `(column, weight)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()].iter().map(|&j| j as usize).zip(self.weights[span].iter().copied())
    }

    /// Sum of the stored weights of each row.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.row(i).map(|(_, w)| w).sum()).collect()
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), got });
        }
        Ok(())
    }

    /// Unnormalized numerator `sum_j weights(i, j) rho_j`.
    pub fn numerator(&self, rho: &[f64]) -> Result<Vec<f64>> {
        self.check_len(rho.len())?;
        Ok((0..self.len())
            .into_par_iter()
            .map(|i| self.row(i).map(|(j, w)| w * rho[j]).sum())
            .collect())
    }

    /// Filtered field `sum_j weights(i, j) rho_j / D_i`.
    pub fn apply(&self, rho: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.numerator(rho)?;
        for (o, d) in out.iter_mut().zip(&self.denominators) {
            *o /= d;
        }
        Ok(out)
    }

    /// Adjoint of [`apply`](Self::apply): `g_j = sum_i y_i weights(i, j) / D_i`.
    pub fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_len(y.len())?;
        let scaled: Vec<f64> = y.iter().zip(&self.denominators).map(|(v, d)| v / d).collect();
        Ok((0..self.len())
            .into_par_iter()
            .map(|j| {
                let span = self.t_row_ptr[j]..self.t_row_ptr[j + 1];
                self.t_cols[span.clone()]
                    .iter()
                    .zip(&self.t_weights[span])
                    .map(|(&i, &w)| w * scaled[i as usize])
                    .sum()
            })
            .collect())
    }

    /// Writes `element_id,denominator,mode` lines.
    pub fn write_denominators_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "element_id,denominator,mode")?;
        for (i, d) in self.denominators.iter().enumerate() {
            writeln!(out, "{i},{d:?},{}", self.mode)?;
        }
        Ok(())
    }
}

fn transpose(n: usize, row_ptr: &[usize], cols: &[u32], vals: &[f64]) -> (Vec<usize>, Vec<u32>, Vec<f64>) {
    let mut count = vec![0usize; n + 1];
    for &j in cols {
        count[j as usize + 1] += 1;
    }
    for k in 0..n {
        count[k + 1] += count[k];
    }
    let t_ptr = count.clone();
    let mut next = count;
    let mut t_cols = vec![0u32; cols.len()];
    let mut t_vals = vec![0.0; cols.len()];
    for i in 0..n {
        for k in row_ptr[i]..row_ptr[i + 1] {
            let j = cols[k] as usize;
            t_cols[next[j]] = i as u32;
            t_vals[next[j]] = vals[k];
            next[j] += 1;
        }
    }
    (t_ptr, t_cols, t_vals)
}

/// Right-angle corners joining two consecutive padded segments.
fn padded_corners(boundary: &[BoundarySegment]) -> Vec<Point2> {
    let n = boundary.len();
    (0..n)
        .filter_map(|k| {
            let s1 = &boundary[k];
            let s2 = &boundary[(k + 1) % n];
            let d1 = s1.b - s1.a;
            let d2 = s2.b - s2.a;
            let square = d1.dot(d2).abs() <= 1e-9 * d1.norm() * d2.norm();
            (!s1.pad_excluded && !s2.pad_excluded && s1.b == s2.a && square).then_some(s1.b)
        })
        .collect()
}

/// Per-row sum of `v_j w(x_i, x_j^m)` over mirrored element copies.
fn mirrored_weights(
    mesh: &Mesh,
    centroids: &[Point2],
    areas: &[f64],
    grid: &SpatialGrid,
    r: FilterRadius,
) -> Vec<f64> {
    let rv = r.value();
    let padded: Vec<&BoundarySegment> = mesh.boundary.iter().filter(|s| !s.pad_excluded).collect();
    let corners = padded_corners(&mesh.boundary);
    (0..centroids.len())
        .into_par_iter()
        .map(|i| {
            let xi = centroids[i];
            let mut sum = 0.0;
            for seg in padded.iter().filter(|s| s.distance(xi) < rv) {
                // a reflected copy within r of x_i has its original within 3r
                grid.for_each_candidate(xi, 3.0 * rv, |j| {
                    let xm = mirror_point(centroids[j], seg.closest_point(centroids[j]));
                    let w = weight(xi, xm, r);
                    if w > 0.0 {
                        sum += areas[j] * w;
                    }
                });
            }
            for &c in corners.iter().filter(|c| c.dist(xi) < rv) {
                let target = c * 2.0 - xi;
                grid.for_each_candidate(target, rv, |j| {
                    let w = weight(xi, c * 2.0 - centroids[j], r);
                    if w > 0.0 {
                        sum += areas[j] * w;
                    }
                });
            }
            sum
        })
        .collect()
}

/// Approximate-volume denominators, never below the row's own weight sum.
fn approximate_volumes(
    boundary: &[BoundarySegment],
    centroids: &[Point2],
    plain: &[f64],
    r: FilterRadius,
) -> (Vec<f64>, Vec<usize>) {
    let rv = r.value();
    let full = cone_volume_2d(r);
    let mut multi = Vec::new();
    let d = centroids
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            let cuts = boundary.iter().filter(|s| s.pad_excluded && s.distance(xi) < rv).count();
            if cuts > 1 {
                multi.push(i);
            }
            let cut = nearest_segment(xi, boundary, |s| s.pad_excluded).filter(|&(_, _, d)| d < rv);
            let padded = nearest_segment(xi, boundary, |s| !s.pad_excluded).is_some_and(|(_, _, d)| d < rv);
            let target = match cut {
                Some((k, _, _)) => sectioned_cone_volume_2d(r, boundary[k].signed_line_distance(xi)),
                None if padded => full,
                None => return plain[i],
            };
            target.max(plain[i])
        })
        .collect();
    (d, multi)
}
