//! Planar geometry kernels used by the filter and the mesh generators.
//!
//! Everything here is a pure function of its arguments. Lengths are in
//! physical domain units; the filter kernel is the linear cone
//! `w = max(0, 1 - d / r)`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// A straight piece of the design-domain boundary.
///
/// Segments of a domain are oriented counterclockwise, so the domain lies to
/// the left of `a -> b`. `pad_excluded` switches the padding off locally, as
/// on a symmetry line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySegment {
    pub a: Point2,
    pub b: Point2,
    pub pad_excluded: bool,
}

impl BoundarySegment {
    pub fn new(a: Point2, b: Point2) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidArgument("segment endpoints must be finite".into()));
        }
        if a == b {
            return Err(Error::InvalidArgument("segment endpoints coincide".into()));
        }
        Ok(Self { a, b, pad_excluded: false })
    }

    pub fn excluded(mut self, flag: bool) -> Self {
        self.pad_excluded = flag;
        self
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    /// Closest point of the segment to `p`, clamped to the endpoints.
    pub fn closest_point(&self, p: Point2) -> Point2 {
        let d = self.b - self.a;
        let t = ((p - self.a).dot(d) / d.dot(d)).clamp(0.0, 1.0);
        self.a + d * t
    }

    pub fn distance(&self, p: Point2) -> f64 {
        p.dist(self.closest_point(p))
    }

    /// Signed distance from `p` to the supporting line, positive on the
    /// domain side (left of `a -> b`).
    pub fn signed_line_distance(&self, p: Point2) -> f64 {
        let d = self.b - self.a;
        d.cross(p - self.a) / d.norm()
    }

    /// Reflection of `p` across the supporting line.
    pub fn reflect(&self, p: Point2) -> Point2 {
        let d = self.b - self.a;
        let t = (p - self.a).dot(d) / d.dot(d);
        mirror_point(p, self.a + d * t)
    }

    /// True when the perpendicular foot of `p` falls inside the segment.
    pub fn projects_inside(&self, p: Point2) -> bool {
        let d = self.b - self.a;
        let t = (p - self.a).dot(d) / d.dot(d);
        (0.0..=1.0).contains(&t)
    }
}

/// Filter radius in physical units, strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FilterRadius(f64);

impl FilterRadius {
    pub fn new(r: f64) -> Result<Self> {
        if r.is_finite() && r > 0.0 {
            Ok(Self(r))
        } else {
            Err(Error::InvalidArgument(format!("filter radius must be positive, got {r}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Minimum length-scale radius tied to this filter radius (`r_fil = 2 r_min`).
    pub fn r_min(self) -> f64 {
        0.5 * self.0
    }

    /// Dilation distance of the 0.25 / 0.50 thresholds, `0.3 r_fil`.
    pub fn dilation_distance(self) -> f64 {
        0.3 * self.0
    }
}

/// Linear cone weight between two centroids.
pub fn weight(xi: Point2, xj: Point2, r: FilterRadius) -> f64 {
    (1.0 - xi.dist(xj) / r.0).max(0.0)
}

/// Volume under the 2D cone kernel, `pi r^2 / 3`.
pub fn cone_volume_2d(r: FilterRadius) -> f64 {
    PI * r.0 * r.0 / 3.0
}

/// Volume under the 3D cone kernel, `pi r^3 / 3`.
pub fn cone_volume_3d(r: FilterRadius) -> f64 {
    PI * r.0 * r.0 * r.0 / 3.0
}

/// Volume of the 2D cone kernel lying beyond a chord at distance `s` from
/// the apex, for `0 <= s <= r`.
fn cap_volume(r: f64, s: f64) -> f64 {
    if s >= r {
        return 0.0;
    }
    let half_chord = (r * r - s * s).sqrt();
    let log_term = if s > 0.0 {
        s * s * s / (3.0 * r) * ((r + half_chord) / s).ln()
    } else {
        0.0
    };
    r * r / 3.0 * (s / r).acos() - 2.0 * s / 3.0 * half_chord + log_term
}

/// Volume of the 2D cone kernel kept on one side of a cutting line.
///
/// `s` is the signed distance from the apex to the line, positive when the
/// apex lies inside the kept half-plane. The value is obtained in closed form
/// by integrating `(1 - rho / r) rho` in polar coordinates over the cap.
pub fn sectioned_cone_volume_2d(r: FilterRadius, s: f64) -> f64 {
    let r = r.0;
    if s >= r {
        PI * r * r / 3.0
    } else if s <= -r {
        0.0
    } else if s >= 0.0 {
        PI * r * r / 3.0 - cap_volume(r, s)
    } else {
        cap_volume(r, -s)
    }
}

/// Reflection of `xj` through the boundary point `xb`: `xj + 2 (xb - xj)`.
pub fn mirror_point(xj: Point2, xb: Point2) -> Point2 {
    xj + (xb - xj) * 2.0
}

/// Nearest point on any segment passing `keep`, with its segment index and
/// distance. Ties go to the lowest index.
pub(crate) fn nearest_segment(
    x: Point2,
    segments: &[BoundarySegment],
    keep: impl Fn(&BoundarySegment) -> bool,
) -> Option<(usize, Point2, f64)> {
    let mut best: Option<(usize, Point2, f64)> = None;
    for (k, seg) in segments.iter().enumerate().filter(|(_, s)| keep(s)) {
        let p = seg.closest_point(x);
        let d = x.dist(p);
        if best.is_none_or(|(_, _, bd)| d < bd) {
            best = Some((k, p, d));
        }
    }
    best
}

/// Closest point to `x` on the padded (non-excluded) part of the boundary.
pub fn closest_boundary_point(x: Point2, segments: &[BoundarySegment]) -> Result<(Point2, f64)> {
    if segments.is_empty() {
        return Err(Error::InvalidArgument("empty segment list".into()));
    }
    nearest_segment(x, segments, |s| !s.pad_excluded)
        .map(|(_, p, d)| (p, d))
        .ok_or(Error::AllSegmentsExcluded)
}

/// Signed area of a closed polygon, positive when counterclockwise.
pub fn polygon_signed_area(pts: &[Point2]) -> f64 {
    let n = pts.len();
    let mut twice = 0.0;
    for i in 0..n {
        twice += pts[i].cross(pts[(i + 1) % n]);
    }
    0.5 * twice
}

/// Area centroid of a closed, non-degenerate polygon.
///
/// Coordinates are taken relative to the first vertex to limit cancellation.
pub fn polygon_centroid(pts: &[Point2]) -> Point2 {
    let o = pts[0];
    let n = pts.len();
    let (mut cx, mut cy, mut twice) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let p = pts[i] - o;
        let q = pts[(i + 1) % n] - o;
        let c = p.cross(q);
        twice += c;
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
    }
    Point2::new(o.x + cx / (3.0 * twice), o.y + cy / (3.0 * twice))
}

/// Even-odd point-in-polygon test; points on an edge may go either way.
pub fn point_in_polygon(p: Point2, poly: &[Point2]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Clips `poly` against the half-plane on the left of the directed line
/// `a -> b` (Sutherland-Hodgman step).
pub(crate) fn clip_half_plane(poly: &[Point2], a: Point2, b: Point2) -> Vec<Point2> {
    let d = b - a;
    let side = |p: Point2| d.cross(p - a);
    let mut out = Vec::with_capacity(poly.len() + 2);
    let n = poly.len();
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let (sp, sq) = (side(p), side(q));
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp >= 0.0) != (sq >= 0.0) {
            let t = sp / (sp - sq);
            out.push(p + (q - p) * t);
        }
    }
    out
}
