//! Centroidal Voronoi meshes on convex polygonal domains.
//!
//! Each Lloyd step triangulates the seeds together with their reflections
//! across every domain edge. The bisector between a seed and its reflection
//! is the edge itself, so the Voronoi cells of the original seeds tile the
//! domain exactly; a final half-plane clip removes round-off overshoot.

use delaunator::{next_halfedge, triangulate, Point, EMPTY};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{push_element, polygon_segments, DomainKind, ElementRole, Mesh, NodeDedup};
use crate::error::{Error, Result};
use crate::geometry::{clip_half_plane, point_in_polygon, polygon_centroid, polygon_signed_area, Point2};

pub(super) const LLOYD_ITERATIONS: usize = 100;

pub(super) fn build(n: usize, domain: &[Point2], seed: u64, iterations: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one cell".into()));
    }
    let domain = convex_ccw(domain)?;
    let area = polygon_signed_area(&domain);
    let h = (area / n as f64).sqrt();

    let mut seeds = sample_seeds(n, &domain, seed);
    for _ in 0..iterations {
        let cells = voronoi_cells(&seeds, &domain)?;
        for (s, cell) in seeds.iter_mut().zip(&cells) {
            if polygon_signed_area(cell) > 0.0 {
                *s = polygon_centroid(cell);
            }
        }
    }
    let cells = voronoi_cells(&seeds, &domain)?;

    let mut nodes = Vec::new();
    let mut dedup = NodeDedup::new(h);
    let mut elements = Vec::with_capacity(n);
    for (k, cell) in cells.iter().enumerate() {
        let mut ids: Vec<usize> = cell.iter().map(|&p| dedup.get_or_push(p, &mut nodes)).collect();
        ids.dedup();
        while ids.len() > 1 && ids.first() == ids.last() {
            ids.pop();
        }
        let poly: Vec<Point2> = ids.iter().map(|&i| nodes[i]).collect();
        let a = if ids.len() >= 3 { polygon_signed_area(&poly) } else { 0.0 };
        if !(a > 1e-12 * h * h) {
            return Err(Error::DegenerateCell { cell: k, area: a });
        }
        push_element(&mut elements, &nodes, ids, ElementRole::Design);
    }
    let boundary = polygon_segments(&domain)?;
    Ok(Mesh::from_parts(elements, nodes, boundary, DomainKind::Irregular, h, domain, None))
}

/// Returns the domain in counterclockwise order, rejecting non-convex or
/// degenerate outlines.
fn convex_ccw(domain: &[Point2]) -> Result<Vec<Point2>> {
    if domain.len() < 3 {
        return Err(Error::InvalidArgument("domain polygon needs at least 3 vertices".into()));
    }
    let mut d = domain.to_vec();
    if polygon_signed_area(&d) < 0.0 {
        d.reverse();
    }
    if !(polygon_signed_area(&d) > 0.0) {
        return Err(Error::InvalidArgument("domain polygon has zero area".into()));
    }
    let n = d.len();
    for i in 0..n {
        let e1 = d[(i + 1) % n] - d[i];
        let e2 = d[(i + 2) % n] - d[(i + 1) % n];
        if e1.cross(e2) < 0.0 {
            return Err(Error::InvalidArgument("irregular meshing needs a convex domain".into()));
        }
    }
    Ok(d)
}

fn sample_seeds(n: usize, domain: &[Point2], seed: u64) -> Vec<Point2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = bbox(domain);
    let mut seeds = Vec::with_capacity(n);
    while seeds.len() < n {
        let p = Point2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        if point_in_polygon(p, domain) {
            seeds.push(p);
        }
    }
    seeds
}

fn bbox(pts: &[Point2]) -> (Point2, Point2) {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    (lo, hi)
}

fn circumcenter(a: Point2, b: Point2, c: Point2) -> Point2 {
    let (bx, by) = (b.x - a.x, b.y - a.y);
    let (cx, cy) = (c.x - a.x, c.y - a.y);
    let bl = bx * bx + by * by;
    let cl = cx * cx + cy * cy;
    let d = 0.5 / (bx * cy - by * cx);
    Point2::new(a.x + (cy * bl - by * cl) * d, a.y + (bx * cl - cx * bl) * d)
}

/// Voronoi cells of `seeds` restricted to the convex `domain`, each as a
/// counterclockwise polygon.
fn voronoi_cells(seeds: &[Point2], domain: &[Point2]) -> Result<Vec<Vec<Point2>>> {
    let n = seeds.len();
    let segs = polygon_segments(domain)?;
    let mut pts: Vec<Point> = Vec::with_capacity(n * (segs.len() + 1) + 4);
    pts.extend(seeds.iter().map(|p| Point { x: p.x, y: p.y }));
    for s in &segs {
        pts.extend(seeds.iter().map(|&p| {
            let m = s.reflect(p);
            Point { x: m.x, y: m.y }
        }));
    }
    let (lo, hi) = bbox(domain);
    let c = (lo + hi) * 0.5;
    let far = 10.0 * (hi.x - lo.x).max(hi.y - lo.y);
    for (dx, dy) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
        pts.push(Point { x: c.x + dx * far, y: c.y + dy * far });
    }

    let tri = triangulate(&pts);
    let p2 = |i: usize| Point2::new(pts[i].x, pts[i].y);
    let mut inedge = vec![EMPTY; n];
    for e in 0..tri.triangles.len() {
        let end = tri.triangles[next_halfedge(e)];
        if end < n && (inedge[end] == EMPTY || tri.halfedges[e] == EMPTY) {
            inedge[end] = e;
        }
    }

    let mut cells = Vec::with_capacity(n);
    for (i, &start) in inedge.iter().enumerate() {
        if start == EMPTY {
            return Err(Error::DegenerateCell { cell: i, area: 0.0 });
        }
        let mut cell = Vec::new();
        let mut e = start;
        loop {
            let t = e / 3;
            cell.push(circumcenter(
                p2(tri.triangles[3 * t]),
                p2(tri.triangles[3 * t + 1]),
                p2(tri.triangles[3 * t + 2]),
            ));
            e = tri.halfedges[next_halfedge(e)];
            if e == EMPTY {
                return Err(Error::DegenerateCell { cell: i, area: f64::INFINITY });
            }
            if e == start {
                break;
            }
        }
        if polygon_signed_area(&cell) < 0.0 {
            cell.reverse();
        }
        for s in &segs {
            cell = clip_half_plane(&cell, s.a, s.b);
        }
        cells.push(cell);
    }
    Ok(cells)
}
