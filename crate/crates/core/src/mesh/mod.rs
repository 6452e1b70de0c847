//! Regular and polygonal discretizations of a planar design domain.
//!
//! Elements keep their ids through every transformation: padding layers are
//! appended after the original elements, so `elements[..original_count()]`
//! is always the unextended mesh.

mod io;
mod voronoi;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{polygon_centroid, polygon_signed_area, BoundarySegment, Point2};

pub use io::{read_mesh, write_mesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementRole {
    Design,
    PassiveSolid,
    PassiveVoid,
    Padding,
}

impl ElementRole {
    fn precedence(self) -> u8 {
        match self {
            ElementRole::PassiveSolid => 3,
            ElementRole::PassiveVoid => 2,
            ElementRole::Padding => 1,
            ElementRole::Design => 0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ElementRole::Design => "design",
            ElementRole::PassiveSolid => "solid",
            ElementRole::PassiveVoid => "void",
            ElementRole::Padding => "padding",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "design" => Some(ElementRole::Design),
            "solid" => Some(ElementRole::PassiveSolid),
            "void" => Some(ElementRole::PassiveVoid),
            "padding" => Some(ElementRole::Padding),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub id: usize,
    pub centroid: Point2,
    pub area: f64,
    /// Counterclockwise polygon vertices.
    pub node_ids: Vec<usize>,
    pub role: ElementRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Regular,
    Irregular,
}

/// Thickness of a real extension and which analyses see it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionSpec {
    pub t_pad: f64,
    pub affect_fea: bool,
    pub affect_volume: bool,
}

impl ExtensionSpec {
    /// Extension by the dilation distance `0.3 r_fil`.
    pub fn for_filter_radius(r_fil: f64) -> Self {
        Self { t_pad: 0.3 * r_fil, affect_fea: false, affect_volume: false }
    }
}

/// Axis-aligned rectangle used to mark passive regions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub min: Point2,
    pub max: Point2,
}

impl Region {
    pub fn new(min: Point2, max: Point2) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassiveRegion {
    pub region: Region,
    pub solid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub elements: Vec<Element>,
    pub nodes: Vec<Point2>,
    pub boundary: Vec<BoundarySegment>,
    pub domain_kind: DomainKind,
    /// Characteristic element size `h`.
    pub element_size: f64,
    /// Counterclockwise outline of the (unextended) design domain.
    pub domain: Vec<Point2>,
    original: usize,
    extension: Option<f64>,
}

impl Mesh {
    pub(crate) fn from_parts(
        elements: Vec<Element>,
        nodes: Vec<Point2>,
        boundary: Vec<BoundarySegment>,
        domain_kind: DomainKind,
        element_size: f64,
        domain: Vec<Point2>,
        extension: Option<f64>,
    ) -> Self {
        let original = elements.iter().filter(|e| e.role != ElementRole::Padding).count();
        Self { elements, nodes, boundary, domain_kind, element_size, domain, original, extension }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Number of elements of the unextended mesh.
    pub fn original_count(&self) -> usize {
        self.original
    }

    pub fn is_extended(&self) -> bool {
        self.extension.is_some()
    }

    /// Padding thickness if this mesh carries a real extension.
    pub fn extension(&self) -> Option<f64> {
        self.extension
    }

    pub fn domain_area(&self) -> f64 {
        polygon_signed_area(&self.domain)
    }

    pub fn polygon(&self, e: usize) -> Vec<Point2> {
        self.elements[e].node_ids.iter().map(|&n| self.nodes[n]).collect()
    }

    pub fn roles(&self) -> impl Iterator<Item = ElementRole> + '_ {
        self.elements.iter().map(|e| e.role)
    }

    pub fn design_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&e| self.elements[e].role == ElementRole::Design).collect()
    }

    /// Regular meshes only: lattice cell of element `e` relative to the
    /// domain's lower-left corner (negative on the padding band).
    pub fn cell_index(&self, e: usize) -> (i64, i64) {
        let o = self.lower_left();
        let c = self.elements[e].centroid;
        let h = self.element_size;
        (((c.x - o.x) / h).floor() as i64, ((c.y - o.y) / h).floor() as i64)
    }

    /// Lower-left corner of the domain bounding box.
    pub fn lower_left(&self) -> Point2 {
        let x = self.domain.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let y = self.domain.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
        Point2::new(x, y)
    }

    pub fn upper_right(&self) -> Point2 {
        let x = self.domain.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
        let y = self.domain.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
        Point2::new(x, y)
    }

    /// Marks elements whose centroid lies in a region as passive. Returns
    /// the indices of regions that captured no element.
    pub fn apply_passive_regions(&mut self, regions: &[PassiveRegion]) -> Vec<usize> {
        let mut empty = Vec::new();
        for (k, pr) in regions.iter().enumerate() {
            let role = if pr.solid { ElementRole::PassiveSolid } else { ElementRole::PassiveVoid };
            let mut hit = false;
            for el in &mut self.elements {
                if pr.region.contains(el.centroid) {
                    hit = true;
                    if role.precedence() > el.role.precedence() {
                        el.role = role;
                    }
                }
            }
            if !hit {
                empty.push(k);
            }
        }
        empty
    }

    /// Marks the pad-excluded flag on every segment lying on the line
    /// through `a` and `b`.
    pub fn exclude_segments_on_line(&mut self, a: Point2, b: Point2) {
        let d = b - a;
        let tol = 1e-9 * self.element_size.max(d.norm());
        for seg in &mut self.boundary {
            let on = |p: Point2| (d.cross(p - a) / d.norm()).abs() <= tol;
            if on(seg.a) && on(seg.b) {
                seg.pad_excluded = true;
            }
        }
    }

    /// Checks the structural invariants every mesh must satisfy.
    pub fn validate(&self) -> Result<()> {
        let scale = self.element_size * self.element_size;
        for el in &self.elements {
            let poly = self.polygon(el.id);
            let a = polygon_signed_area(&poly);
            if !(el.area > 0.0) || a <= 1e-12 * scale {
                return Err(Error::DegenerateCell { cell: el.id, area: a });
            }
        }
        let tol = match self.domain_kind {
            DomainKind::Regular => 1e-9,
            DomainKind::Irregular => 1e-6,
        };
        let total: f64 = self.elements[..self.original].iter().map(|e| e.area).sum();
        let domain = self.domain_area();
        if (total - domain).abs() > tol * domain {
            return Err(Error::InvalidArgument(format!(
                "element areas sum to {total}, domain area is {domain}"
            )));
        }
        Ok(())
    }

    /// Real extension of the domain by `spec.t_pad` outside every segment
    /// that is not pad-excluded. Padding elements are void and appended
    /// after the original elements.
    pub fn extend(&self, spec: &ExtensionSpec) -> Result<Mesh> {
        if !(spec.t_pad >= 0.0) {
            return Err(Error::InvalidArgument("t_pad must be non-negative".into()));
        }
        if self.is_extended() {
            return Err(Error::AlreadyExtended);
        }
        if spec.t_pad == 0.0 {
            return Ok(self.clone());
        }
        if self.boundary.iter().all(|s| s.pad_excluded) {
            return Err(Error::AllSegmentsExcluded);
        }
        match self.domain_kind {
            DomainKind::Regular => self.extend_regular(spec.t_pad),
            DomainKind::Irregular => self.extend_mirrored(spec.t_pad),
        }
    }

    fn extend_regular(&self, t_pad: f64) -> Result<Mesh> {
        let h = self.element_size;
        let o = self.lower_left();
        let ur = self.upper_right();
        let nelx = ((ur.x - o.x) / h).round() as i64;
        let nely = ((ur.y - o.y) / h).round() as i64;
        let layers = (t_pad / h - 1e-9).ceil().max(1.0) as i64;
        let tol = 1e-9 * h;

        let mut nodes = self.nodes.clone();
        let mut lattice: HashMap<(i64, i64), usize> = HashMap::new();
        for (k, p) in self.nodes.iter().enumerate() {
            let i = ((p.x - o.x) / h).round() as i64;
            let j = ((p.y - o.y) / h).round() as i64;
            lattice.insert((i, j), k);
        }
        let mut node_at = |i: i64, j: i64, nodes: &mut Vec<Point2>| -> usize {
            *lattice.entry((i, j)).or_insert_with(|| {
                nodes.push(Point2::new(o.x + i as f64 * h, o.y + j as f64 * h));
                nodes.len() - 1
            })
        };

        let mut elements = self.elements.clone();
        for ix in -layers..nelx + layers {
            for iy in -layers..nely + layers {
                if (0..nelx).contains(&ix) && (0..nely).contains(&iy) {
                    continue;
                }
                let c = Point2::new(o.x + (ix as f64 + 0.5) * h, o.y + (iy as f64 + 0.5) * h);
                let xb = Point2::new(c.x.clamp(o.x, ur.x), c.y.clamp(o.y, ur.y));
                let padded = self
                    .boundary
                    .iter()
                    .filter(|s| s.distance(xb) <= tol)
                    .all(|s| !s.pad_excluded);
                if !padded {
                    continue;
                }
                let ids = vec![
                    node_at(ix, iy, &mut nodes),
                    node_at(ix + 1, iy, &mut nodes),
                    node_at(ix + 1, iy + 1, &mut nodes),
                    node_at(ix, iy + 1, &mut nodes),
                ];
                push_element(&mut elements, &nodes, ids, ElementRole::Padding);
            }
        }
        Ok(Mesh::from_parts(
            elements,
            nodes,
            self.boundary.clone(),
            self.domain_kind,
            h,
            self.domain.clone(),
            Some(t_pad),
        ))
    }

    /// Irregular meshes are extended with mirror images of the cells that
    /// come within `t_pad` of each padded segment, plus point reflections
    /// through right-angle corners joining two padded segments.
    fn extend_mirrored(&self, t_pad: f64) -> Result<Mesh> {
        let h = self.element_size;
        let mut nodes = self.nodes.clone();
        let mut dedup = NodeDedup::new(h);
        for (k, p) in self.nodes.iter().enumerate() {
            dedup.insert(*p, k);
        }
        let mut elements = self.elements.clone();
        let near = |poly: &[Point2], seg: &BoundarySegment| {
            poly.iter().map(|&p| seg.signed_line_distance(p)).fold(f64::INFINITY, f64::min) < t_pad
        };

        for seg in self.boundary.iter().filter(|s| !s.pad_excluded) {
            for e in 0..self.original {
                let poly = self.polygon(e);
                if !seg.projects_inside(self.elements[e].centroid) || !near(&poly, seg) {
                    continue;
                }
                let image: Vec<Point2> = poly.iter().rev().map(|&p| seg.reflect(p)).collect();
                let ids = image.iter().map(|&p| dedup.get_or_push(p, &mut nodes)).collect();
                push_element(&mut elements, &nodes, ids, ElementRole::Padding);
            }
        }

        let nseg = self.boundary.len();
        for k in 0..nseg {
            let s1 = &self.boundary[k];
            let s2 = &self.boundary[(k + 1) % nseg];
            if s1.pad_excluded || s2.pad_excluded || s1.b != s2.a {
                continue;
            }
            let d1 = s1.b - s1.a;
            let d2 = s2.b - s2.a;
            if d1.dot(d2).abs() > 1e-9 * d1.norm() * d2.norm() {
                continue;
            }
            let corner = s1.b;
            for e in 0..self.original {
                let poly = self.polygon(e);
                if !(near(&poly, s1) && near(&poly, s2)) {
                    continue;
                }
                let image: Vec<Point2> = poly.iter().map(|&p| corner * 2.0 - p).collect();
                let ids = image.iter().map(|&p| dedup.get_or_push(p, &mut nodes)).collect();
                push_element(&mut elements, &nodes, ids, ElementRole::Padding);
            }
        }
        Ok(Mesh::from_parts(
            elements,
            nodes,
            self.boundary.clone(),
            self.domain_kind,
            h,
            self.domain.clone(),
            Some(t_pad),
        ))
    }
}

fn push_element(elements: &mut Vec<Element>, nodes: &[Point2], node_ids: Vec<usize>, role: ElementRole) {
    let poly: Vec<Point2> = node_ids.iter().map(|&n| nodes[n]).collect();
    let id = elements.len();
    elements.push(Element {
        id,
        centroid: polygon_centroid(&poly),
        area: polygon_signed_area(&poly),
        node_ids,
        role,
    });
}

/// Merges nodes closer than `1e-7 h` through a quantized hash.
struct NodeDedup {
    scale: f64,
    map: HashMap<(i64, i64), usize>,
}

impl NodeDedup {
    fn new(h: f64) -> Self {
        Self { scale: 1.0 / (1e-7 * h), map: HashMap::new() }
    }

    fn key(&self, p: Point2) -> (i64, i64) {
        ((p.x * self.scale).round() as i64, (p.y * self.scale).round() as i64)
    }

    fn insert(&mut self, p: Point2, id: usize) {
        let k = self.key(p);
        self.map.entry(k).or_insert(id);
    }

    fn get_or_push(&mut self, p: Point2, nodes: &mut Vec<Point2>) -> usize {
        let (kx, ky) = self.key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(&id) = self.map.get(&(kx + dx, ky + dy)) {
                    return id;
                }
            }
        }
        nodes.push(p);
        let id = nodes.len() - 1;
        self.map.insert((kx, ky), id);
        id
    }
}

fn rectangle(width: f64, height: f64) -> Vec<Point2> {
    vec![
        Point2::new(0.0, 0.0),
        Point2::new(width, 0.0),
        Point2::new(width, height),
        Point2::new(0.0, height),
    ]
}

/// Counterclockwise boundary segments of a closed polygon.
pub fn polygon_segments(domain: &[Point2]) -> Result<Vec<BoundarySegment>> {
    (0..domain.len())
        .map(|k| BoundarySegment::new(domain[k], domain[(k + 1) % domain.len()]))
        .collect()
}

/// Axis-aligned grid of square quadrilaterals on `[0, width] x [0, height]`.
///
/// Elements and nodes are numbered column by column from the bottom-left
/// corner: element `ix * nely + iy`, node `ix * (nely + 1) + iy`.
pub fn build_regular(nelx: usize, nely: usize, width: f64, height: f64) -> Result<Mesh> {
    if nelx == 0 || nely == 0 {
        return Err(Error::InvalidArgument("grid needs at least one element per side".into()));
    }
    if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
        return Err(Error::InvalidArgument("domain dimensions must be positive".into()));
    }
    let hx = width / nelx as f64;
    let hy = height / nely as f64;
    if (hx - hy).abs() > 1e-9 * hx {
        return Err(Error::InvalidArgument(format!(
            "cells must be square: {hx} x {hy}"
        )));
    }
    let mut nodes = Vec::with_capacity((nelx + 1) * (nely + 1));
    for i in 0..=nelx {
        for j in 0..=nely {
            nodes.push(Point2::new(i as f64 * hx, j as f64 * hx));
        }
    }
    let mut elements = Vec::with_capacity(nelx * nely);
    for ix in 0..nelx {
        for iy in 0..nely {
            let n1 = ix * (nely + 1) + iy;
            let n2 = (ix + 1) * (nely + 1) + iy;
            push_element(&mut elements, &nodes, vec![n1, n2, n2 + 1, n1 + 1], ElementRole::Design);
        }
    }
    let domain = rectangle(nelx as f64 * hx, nely as f64 * hx);
    let boundary = polygon_segments(&domain)?;
    Ok(Mesh::from_parts(elements, nodes, boundary, DomainKind::Regular, hx, domain, None))
}

/// Centroidal Voronoi tessellation of a convex domain with `n_elements`
/// cells, seeded deterministically from `seed`.
pub fn build_irregular(n_elements: usize, domain: &[Point2], seed: u64) -> Result<Mesh> {
    voronoi::build(n_elements, domain, seed, voronoi::LLOYD_ITERATIONS)
}

/// Same as [`build_irregular`] with an explicit number of Lloyd iterations.
pub fn build_irregular_with_iterations(
    n_elements: usize,
    domain: &[Point2],
    seed: u64,
    lloyd_iterations: usize,
) -> Result<Mesh> {
    voronoi::build(n_elements, domain, seed, lloyd_iterations)
}
