//! Unit-modulus element matrices, dense row-major.

use crate::geometry::{polygon_centroid, Point2};

/// Plane-stress constitutive matrix for unit Young's modulus.
fn plane_stress(nu: f64) -> [[f64; 3]; 3] {
    let c = 1.0 / (1.0 - nu * nu);
    [[c, c * nu, 0.0], [c * nu, c, 0.0], [0.0, 0.0, c * (1.0 - nu) / 2.0]]
}

/// Bilinear quad with 2x2 Gauss points. `dofs` is 2 for elasticity, 1 for
/// conduction. Vertices counterclockwise.
pub fn q4(xy: &[Point2], nu: f64, dofs: usize) -> Vec<f64> {
    assert_eq!(xy.len(), 4);
    let xi_n = [-1.0, 1.0, 1.0, -1.0];
    let eta_n = [-1.0, -1.0, 1.0, 1.0];
    let g = 1.0 / 3f64.sqrt();
    let m = 4 * dofs;
    let d = plane_stress(nu);
    let mut k = vec![0.0; m * m];
    for (xi, eta) in [(-g, -g), (g, -g), (g, g), (-g, g)] {
        let dn_dxi: Vec<f64> = (0..4).map(|i| 0.25 * xi_n[i] * (1.0 + eta * eta_n[i])).collect();
        let dn_deta: Vec<f64> = (0..4).map(|i| 0.25 * eta_n[i] * (1.0 + xi * xi_n[i])).collect();
        let mut j = [[0.0; 2]; 2];
        for i in 0..4 {
            j[0][0] += dn_dxi[i] * xy[i].x;
            j[0][1] += dn_dxi[i] * xy[i].y;
            j[1][0] += dn_deta[i] * xy[i].x;
            j[1][1] += dn_deta[i] * xy[i].y;
        }
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let dx: Vec<f64> = (0..4).map(|i| (j[1][1] * dn_dxi[i] - j[0][1] * dn_deta[i]) / det).collect();
        let dy: Vec<f64> = (0..4).map(|i| (-j[1][0] * dn_dxi[i] + j[0][0] * dn_deta[i]) / det).collect();
        accumulate(&mut k, &dx, &dy, &d, dofs, det);
    }
    k
}

/// `k += w * B^T D B` for gradients `dx`, `dy` of the nodal shape functions.
fn accumulate(k: &mut [f64], dx: &[f64], dy: &[f64], d: &[[f64; 3]; 3], dofs: usize, w: f64) {
    let n = dx.len();
    let m = n * dofs;
    if dofs == 1 {
        for a in 0..n {
            for b in 0..n {
                k[a * m + b] += w * (dx[a] * dx[b] + dy[a] * dy[b]);
            }
        }
        return;
    }
    // B columns: node i contributes (dx, 0, dy) for u and (0, dy, dx) for v
    let bcol = |c: usize| -> [f64; 3] {
        let i = c / 2;
        if c.is_multiple_of(2) {
            [dx[i], 0.0, dy[i]]
        } else {
            [0.0, dy[i], dx[i]]
        }
    };
    for a in 0..m {
        let ba = bcol(a);
        let mut dba = [0.0; 3];
        for r in 0..3 {
            dba[r] = d[r][0] * ba[0] + d[r][1] * ba[1] + d[r][2] * ba[2];
        }
        for b in 0..m {
            let bb = bcol(b);
            k[a * m + b] += w * (dba[0] * bb[0] + dba[1] * bb[1] + dba[2] * bb[2]);
        }
    }
}

/// Constant-gradient triangle.
fn tri(p: [Point2; 3], nu: f64, dofs: usize) -> Vec<f64> {
    let two_a = (p[1] - p[0]).cross(p[2] - p[0]);
    let dx = [(p[1].y - p[2].y) / two_a, (p[2].y - p[0].y) / two_a, (p[0].y - p[1].y) / two_a];
    let dy = [(p[2].x - p[1].x) / two_a, (p[0].x - p[2].x) / two_a, (p[1].x - p[0].x) / two_a];
    let m = 3 * dofs;
    let mut k = vec![0.0; m * m];
    accumulate(&mut k, &dx, &dy, &plane_stress(nu), dofs, 0.5 * two_a);
    k
}

/// Polygon split into triangles around its centroid; the centroid node is
/// condensed out, leaving a matrix on the polygon vertices only.
pub fn polygon_fan(poly: &[Point2], nu: f64, dofs: usize) -> Vec<f64> {
    let nv = poly.len();
    let c = polygon_centroid(poly);
    let full = (nv + 1) * dofs;
    let mut k = vec![0.0; full * full];
    for i in 0..nv {
        let j = (i + 1) % nv;
        let kt = tri([c, poly[i], poly[j]], nu, dofs);
        let map: Vec<usize> = [nv, i, j].iter().flat_map(|&n| (0..dofs).map(move |d| n * dofs + d)).collect();
        let mt = 3 * dofs;
        for a in 0..mt {
            for b in 0..mt {
                k[map[a] * full + map[b]] += kt[a * mt + b];
            }
        }
    }
    // Schur complement on the trailing centroid block
    let m = nv * dofs;
    let kcc: Vec<f64> = (0..dofs).flat_map(|a| (0..dofs).map(move |b| (a, b))).map(|(a, b)| k[(m + a) * full + m + b]).collect();
    let inv = match dofs {
        1 => vec![1.0 / kcc[0]],
        _ => {
            let det = kcc[0] * kcc[3] - kcc[1] * kcc[2];
            vec![kcc[3] / det, -kcc[1] / det, -kcc[2] / det, kcc[0] / det]
        }
    };
    let mut out = vec![0.0; m * m];
    for a in 0..m {
        for b in 0..m {
            let mut s = k[a * full + b];
            for p in 0..dofs {
                for q in 0..dofs {
                    s -= k[a * full + m + p] * inv[p * dofs + q] * k[(m + q) * full + b];
                }
            }
            out[a * m + b] = s;
        }
    }
    // symmetrize round-off
    for a in 0..m {
        for b in a + 1..m {
            let v = 0.5 * (out[a * m + b] + out[b * m + a]);
            out[a * m + b] = v;
            out[b * m + a] = v;
        }
    }
    out
}
