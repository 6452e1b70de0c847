//! Linear finite-element analysis with SIMP interpolation.
//!
//! Elasticity uses plane-stress bilinear quads on regular meshes and
//! condensed triangle fans on polygonal cells. Heat conduction reuses the
//! same elements with one unknown per node.

pub mod elements;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{MatMut, Side};

use crate::error::{Error, Result};
use crate::geometry::{BoundarySegment, Point2};
use crate::mesh::{DomainKind, ElementRole, Mesh};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialModel {
    pub e0: f64,
    pub emin: f64,
    pub nu: f64,
    pub penal: f64,
}

impl Default for MaterialModel {
    fn default() -> Self {
        Self { e0: 1.0, emin: 1e-9, nu: 0.3, penal: 3.0 }
    }
}

impl MaterialModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.e0 > self.emin && self.emin > 0.0) {
            return Err(Error::InvalidArgument("need 0 < emin < e0".into()));
        }
        if !(self.nu > -1.0 && self.nu < 0.5) {
            return Err(Error::InvalidArgument("poisson ratio must lie in (-1, 0.5)".into()));
        }
        if !(self.penal >= 1.0) {
            return Err(Error::InvalidArgument("penalization must be >= 1".into()));
        }
        Ok(())
    }
}

pub fn simp_modulus(rho: f64, m: &MaterialModel) -> f64 {
    m.emin + rho.powf(m.penal) * (m.e0 - m.emin)
}

pub fn simp_modulus_derivative(rho: f64, m: &MaterialModel) -> f64 {
    m.penal * rho.powf(m.penal - 1.0) * (m.e0 - m.emin)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Physics {
    Elastic,
    Thermal,
}

impl Physics {
    pub fn dofs_per_node(self) -> usize {
        match self {
            Physics::Elastic => 2,
            Physics::Thermal => 1,
        }
    }
}

/// Picks nodes of the physical (non-padding) domain.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeSelector {
    Nearest(Point2),
    OnSegment { a: Point2, b: Point2, tol: f64 },
    AllDomain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodalLoad {
    pub at: NodeSelector,
    /// Per selected node; thermal problems read the first component only.
    pub value: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    pub at: NodeSelector,
    pub fixed: [bool; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadCase {
    pub physics: Physics,
    pub loads: Vec<NodalLoad>,
    pub supports: Vec<Support>,
}

fn select_nodes(mesh: &Mesh, domain_nodes: &[usize], sel: &NodeSelector) -> Result<Vec<usize>> {
    let picked: Vec<usize> = match sel {
        NodeSelector::Nearest(p) => {
            let best = domain_nodes
                .iter()
                .copied()
                .min_by(|&a, &b| mesh.nodes[a].dist(*p).total_cmp(&mesh.nodes[b].dist(*p)));
            best.into_iter().collect()
        }
        NodeSelector::OnSegment { a, b, tol } => {
            let seg = BoundarySegment::new(*a, *b)?;
            domain_nodes.iter().copied().filter(|&n| seg.distance(mesh.nodes[n]) <= *tol).collect()
        }
        NodeSelector::AllDomain => domain_nodes.to_vec(),
    };
    if picked.is_empty() {
        return Err(Error::InvalidArgument(format!("selector {sel:?} matched no nodes")));
    }
    Ok(picked)
}

#[derive(Debug, Clone)]
pub struct FeSolution {
    /// `f^T u`
    pub compliance: f64,
    /// d compliance / d rho_e, zero for elements outside the analysis.
    pub sensitivities: Vec<f64>,
    /// Nodal unknowns over the whole mesh, `dofs_per_node` per node.
    pub u: Vec<f64>,
}

const UNUSED: u32 = u32::MAX;

/// Assembled-once structure for repeated solves with changing densities.
pub struct FeSystem {
    material: MaterialModel,
    physics: Physics,
    n_elements: usize,
    n_nodes: usize,
    active: Vec<usize>,
    /// Index into `matrices` for each active element.
    matrix_of: Vec<usize>,
    matrices: Vec<Vec<f64>>,
    /// Global dof per local dof of each active element.
    elem_dofs: Vec<Vec<usize>>,
    /// Slot in `values` per local (a, b) pair, `UNUSED` if not stored.
    slots: Vec<Vec<u32>>,
    free_of: Vec<u32>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    symbolic: SymbolicLlt<usize>,
    force: Vec<f64>,
}

impl std::fmt::Debug for FeSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FeSystem")
            .field("physics", &self.physics)
            .field("active_elements", &self.active.len())
            .field("free_dofs", &self.n_free())
            .finish()
    }
}

impl FeSystem {
    /// `include_padding` decides whether padding elements take part in the
    /// analysis (as void material) or are left out entirely.
    pub fn new(mesh: &Mesh, material: MaterialModel, case: &LoadCase, include_padding: bool) -> Result<Self> {
        material.validate()?;
        let dpn = case.physics.dofs_per_node();
        let n_nodes = mesh.nodes.len();
        let active: Vec<usize> = mesh
            .elements
            .iter()
            .filter(|e| include_padding || e.role != ElementRole::Padding)
            .map(|e| e.id)
            .collect();

        let mut domain_mark = vec![false; n_nodes];
        for e in mesh.elements.iter().filter(|e| e.role != ElementRole::Padding) {
            for &n in &e.node_ids {
                domain_mark[n] = true;
            }
        }
        let domain_nodes: Vec<usize> = (0..n_nodes).filter(|&n| domain_mark[n]).collect();
        let mut used = vec![false; n_nodes];
        for &e in &active {
            for &n in &mesh.elements[e].node_ids {
                used[n] = true;
            }
        }

        let mut fixed = vec![false; n_nodes * dpn];
        if case.supports.is_empty() {
            return Err(Error::InvalidArgument("load case has no supports".into()));
        }
        for s in &case.supports {
            for n in select_nodes(mesh, &domain_nodes, &s.at)? {
                for d in 0..dpn {
                    fixed[n * dpn + d] |= s.fixed[d];
                }
            }
        }
        for d in 0..dpn {
            if !fixed.iter().skip(d).step_by(dpn).any(|&f| f) {
                return Err(Error::SingularSystem(format!("no support restrains component {d}")));
            }
        }
        let mut force = vec![0.0; n_nodes * dpn];
        for l in &case.loads {
            for n in select_nodes(mesh, &domain_nodes, &l.at)? {
                for d in 0..dpn {
                    force[n * dpn + d] += l.value[d];
                }
            }
        }

        let mut free_of = vec![UNUSED; n_nodes * dpn];
        let mut n_free = 0u32;
        for n in (0..n_nodes).filter(|&n| used[n]) {
            for d in 0..dpn {
                if !fixed[n * dpn + d] {
                    free_of[n * dpn + d] = n_free;
                    n_free += 1;
                }
            }
        }
        if n_free == 0 {
            return Err(Error::SingularSystem("every degree of freedom is fixed".into()));
        }

        let (matrices, matrix_of) = element_matrices(mesh, &active, material.nu, dpn);
        let elem_dofs: Vec<Vec<usize>> = active
            .iter()
            .map(|&e| mesh.elements[e].node_ids.iter().flat_map(|&n| (0..dpn).map(move |d| n * dpn + d)).collect())
            .collect();

        // upper-triangular pattern, rows sorted within each column
        let nf = n_free as usize;
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); nf];
        for dofs in &elem_dofs {
            for &ga in dofs {
                for &gb in dofs {
                    let (fa, fb) = (free_of[ga], free_of[gb]);
                    if fa != UNUSED && fb != UNUSED && fa <= fb {
                        cols[fb as usize].push(fa as usize);
                    }
                }
            }
        }
        let mut col_ptr = Vec::with_capacity(nf + 1);
        col_ptr.push(0);
        let mut row_idx = Vec::new();
        for c in &mut cols {
            c.sort_unstable();
            c.dedup();
            row_idx.extend_from_slice(c);
            col_ptr.push(row_idx.len());
        }
        drop(cols);
        let slots = elem_dofs
            .iter()
            .map(|dofs| {
                let mut s = Vec::with_capacity(dofs.len() * dofs.len());
                for &ga in dofs {
                    for &gb in dofs {
                        let (fa, fb) = (free_of[ga], free_of[gb]);
                        if fa == UNUSED || fb == UNUSED || fa > fb {
                            s.push(UNUSED);
                        } else {
                            let span = col_ptr[fb as usize]..col_ptr[fb as usize + 1];
                            let k = row_idx[span.clone()].binary_search(&(fa as usize)).expect("pattern entry");
                            s.push((span.start + k) as u32);
                        }
                    }
                }
                s
            })
            .collect();

        let sym = SymbolicSparseColMatRef::new_checked(nf, nf, &col_ptr, None, &row_idx);
        let symbolic = SymbolicLlt::try_new(sym, Side::Upper)
            .map_err(|e| Error::SingularSystem(format!("symbolic factorization failed: {e:?}")))?;

        Ok(Self {
            material,
            physics: case.physics,
            n_elements: mesh.len(),
            n_nodes,
            active,
            matrix_of,
            matrices,
            elem_dofs,
            slots,
            free_of,
            col_ptr,
            row_idx,
            symbolic,
            force,
        })
    }

    pub fn n_free(&self) -> usize {
        self.col_ptr.len() - 1
    }

    pub fn physics(&self) -> Physics {
        self.physics
    }

    pub fn material(&self) -> &MaterialModel {
        &self.material
    }

    pub fn active_elements(&self) -> &[usize] {
        &self.active
    }

    /// Full nodal load vector.
    pub fn force(&self) -> &[f64] {
        &self.force
    }

    /// Solves for the given physical densities (one per mesh element;
    /// entries of elements outside the analysis are ignored).
    pub fn solve(&self, rho: &[f64]) -> Result<FeSolution> {
        if rho.len() != self.n_elements {
            return Err(Error::LengthMismatch { expected: self.n_elements, got: rho.len() });
        }
        if let Some(&e) = self.active.iter().find(|&&e| !rho[e].is_finite()) {
            return Err(Error::NonFinite(format!("density of element {e}")));
        }
        let mut values = vec![0.0; self.row_idx.len()];
        for (k, &e) in self.active.iter().enumerate() {
            let ee = simp_modulus(rho[e].clamp(0.0, 1.0), &self.material);
            let ke = &self.matrices[self.matrix_of[k]];
            for (slot, kv) in self.slots[k].iter().zip(ke) {
                if *slot != UNUSED {
                    values[*slot as usize] += ee * kv;
                }
            }
        }
        let nf = self.n_free();
        let mut rhs = vec![0.0; nf];
        for (g, &f) in self.force.iter().enumerate() {
            if self.free_of[g] != UNUSED {
                rhs[self.free_of[g] as usize] = f;
            }
        }
        let sym = SymbolicSparseColMatRef::new_checked(nf, nf, &self.col_ptr, None, &self.row_idx);
        let llt = Llt::try_new_with_symbolic(self.symbolic.clone(), SparseColMatRef::new(sym, &values), Side::Upper)
            .map_err(|e| Error::SingularSystem(format!("{e:?}")))?;
        llt.solve_in_place(MatMut::from_column_major_slice_mut(&mut rhs, nf, 1));
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("displacement solution".into()));
        }

        let dpn = self.physics.dofs_per_node();
        let mut u = vec![0.0; self.n_nodes * dpn];
        for (g, &f) in self.free_of.iter().enumerate() {
            if f != UNUSED {
                u[g] = rhs[f as usize];
            }
        }
        let compliance: f64 = self.force.iter().zip(&u).map(|(f, x)| f * x).sum();
        let mut sensitivities = vec![0.0; self.n_elements];
        for (k, &e) in self.active.iter().enumerate() {
            let ke = &self.matrices[self.matrix_of[k]];
            let ue: Vec<f64> = self.elem_dofs[k].iter().map(|&g| u[g]).collect();
            let m = ue.len();
            let mut energy = 0.0;
            for a in 0..m {
                let row: f64 = (0..m).map(|b| ke[a * m + b] * ue[b]).sum();
                energy += ue[a] * row;
            }
            sensitivities[e] = -simp_modulus_derivative(rho[e].clamp(0.0, 1.0), &self.material) * energy;
        }
        Ok(FeSolution { compliance, sensitivities, u })
    }
}

fn element_matrices(mesh: &Mesh, active: &[usize], nu: f64, dpn: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    match mesh.domain_kind {
        DomainKind::Regular => {
            let shared = elements::q4(&mesh.polygon(active[0]), nu, dpn);
            (vec![shared], vec![0; active.len()])
        }
        DomainKind::Irregular => {
            let mats = active.iter().map(|&e| elements::polygon_fan(&mesh.polygon(e), nu, dpn)).collect();
            (mats, (0..active.len()).collect())
        }
    }
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::mesh::{build_irregular_with_iterations, build_regular, ExtensionSpec};

    fn cantilever_case() -> LoadCase {
        LoadCase {
            physics: Physics::Elastic,
            loads: vec![NodalLoad { at: NodeSelector::Nearest(Point2::new(4.0, 0.5)), value: [0.0, -1.0] }],
            supports: vec![Support {
                at: NodeSelector::OnSegment { a: Point2::new(0.0, 0.0), b: Point2::new(0.0, 1.0), tol: 1e-9 },
                fixed: [true, true],
            }],
        }
    }

    /// Dense Gaussian elimination on the same reduced system.
    fn dense_compliance(mesh: &Mesh, case: &LoadCase, rho: &[f64]) -> f64 {
        let sys = FeSystem::new(mesh, MaterialModel::default(), case, false).unwrap();
        let nf = sys.n_free();
        let mut a = vec![vec![0.0; nf + 1]; nf];
        for (k, &e) in sys.active.iter().enumerate() {
            let ee = simp_modulus(rho[e], &sys.material);
            let ke = &sys.matrices[sys.matrix_of[k]];
            let dofs = &sys.elem_dofs[k];
            let m = dofs.len();
            for i in 0..m {
                for j in 0..m {
                    let (fi, fj) = (sys.free_of[dofs[i]], sys.free_of[dofs[j]]);
                    if fi != UNUSED && fj != UNUSED {
                        a[fi as usize][fj as usize] += ee * ke[i * m + j];
                    }
                }
            }
        }
        for (g, &f) in sys.force.iter().enumerate() {
            if sys.free_of[g] != UNUSED {
                a[sys.free_of[g] as usize][nf] = f;
            }
        }
        for c in 0..nf {
            let p = (c..nf).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
            a.swap(c, p);
            for r in c + 1..nf {
                let f = a[r][c] / a[c][c];
                for k in c..=nf {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
        let mut x = vec![0.0; nf];
        for r in (0..nf).rev() {
            x[r] = (a[r][nf] - (r + 1..nf).map(|k| a[r][k] * x[k]).sum::<f64>()) / a[r][r];
        }
        let mut c = 0.0;
        for (g, &f) in sys.force.iter().enumerate() {
            if sys.free_of[g] != UNUSED {
                c += f * x[sys.free_of[g] as usize];
            }
        }
        c
    }

    #[test]
    fn sparse_matches_dense_solve() {
        let mesh = build_regular(8, 2, 4.0, 1.0).unwrap();
        let rho: Vec<f64> = (0..mesh.len()).map(|i| 0.3 + 0.7 * ((i * 7) % 11) as f64 / 10.0).collect();
        let sys = FeSystem::new(&mesh, MaterialModel::default(), &cantilever_case(), false).unwrap();
        let c = sys.solve(&rho).unwrap().compliance;
        let d = dense_compliance(&mesh, &cantilever_case(), &rho);
        assert!((c - d).abs() < 1e-10 * d, "{c} vs {d}");
    }

    #[test]
    fn compliance_scales_inversely_with_modulus() {
        let mesh = build_regular(12, 4, 3.0, 1.0).unwrap();
        let case = cantilever_case();
        let solid = FeSystem::new(&mesh, MaterialModel::default(), &case, false).unwrap();
        let soft = MaterialModel { e0: 2.0, emin: 2e-9, ..MaterialModel::default() };
        let soft = FeSystem::new(&mesh, soft, &case, false).unwrap();
        let ones = vec![1.0; mesh.len()];
        let c1 = solid.solve(&ones).unwrap().compliance;
        let c2 = soft.solve(&ones).unwrap().compliance;
        assert!((c1 - 2.0 * c2).abs() < 1e-10 * c1);
        assert!(c1 > 0.0);
    }

    #[test]
    fn sensitivities_match_finite_differences() {
        let mesh = build_regular(6, 3, 2.0, 1.0).unwrap();
        let case = cantilever_case();
        let sys = FeSystem::new(&mesh, MaterialModel::default(), &case, false).unwrap();
        let rho: Vec<f64> = (0..mesh.len()).map(|i| 0.4 + 0.05 * (i % 7) as f64).collect();
        let sol = sys.solve(&rho).unwrap();
        assert!(sol.sensitivities.iter().all(|&s| s <= 0.0));
        for e in [0, 5, 11, 17] {
            let h = 1e-6;
            let mut p = rho.clone();
            p[e] += h;
            let mut m = rho.clone();
            m[e] -= h;
            let fd = (sys.solve(&p).unwrap().compliance - sys.solve(&m).unwrap().compliance) / (2.0 * h);
            assert!((fd - sol.sensitivities[e]).abs() < 1e-5 * fd.abs(), "element {e}");
        }
    }

    #[test]
    fn void_padding_only_stiffens() {
        let mut mesh = build_regular(20, 10, 2.0, 1.0).unwrap();
        mesh.exclude_segments_on_line(Point2::new(0.0, 0.0), Point2::new(0.0, 1.0));
        let ext = mesh.extend(&ExtensionSpec::for_filter_radius(0.4)).unwrap();
        let case = LoadCase {
            physics: Physics::Elastic,
            loads: vec![NodalLoad { at: NodeSelector::Nearest(Point2::new(2.0, 0.5)), value: [0.0, -1.0] }],
            ..cantilever_case()
        };
        let mut rho = vec![0.5; ext.len()];
        for r in &mut rho[mesh.len()..] {
            *r = 0.0;
        }
        let without = FeSystem::new(&ext, MaterialModel::default(), &case, false).unwrap().solve(&rho).unwrap();
        let with = FeSystem::new(&ext, MaterialModel::default(), &case, true).unwrap().solve(&rho).unwrap();
        assert!(with.compliance <= without.compliance);
        assert!((with.compliance - without.compliance).abs() < 1e-6 * without.compliance);
        let plain = FeSystem::new(&mesh, MaterialModel::default(), &case, false).unwrap();
        let c0 = plain.solve(&rho[..mesh.len()]).unwrap().compliance;
        assert!((c0 - without.compliance).abs() < 1e-10 * c0);
    }

    #[test]
    fn thermal_one_element_oracle() {
        let mesh = build_regular(1, 1, 1.0, 1.0).unwrap();
        // two nodes fixed on the left, unit heat into each right node
        let case = LoadCase {
            physics: Physics::Thermal,
            loads: vec![NodalLoad {
                at: NodeSelector::OnSegment { a: Point2::new(1.0, 0.0), b: Point2::new(1.0, 1.0), tol: 1e-9 },
                value: [1.0, 0.0],
            }],
            supports: vec![Support {
                at: NodeSelector::OnSegment { a: Point2::new(0.0, 0.0), b: Point2::new(0.0, 1.0), tol: 1e-9 },
                fixed: [true, false],
            }],
        };
        let sys = FeSystem::new(&mesh, MaterialModel::default(), &case, false).unwrap();
        let sol = sys.solve(&[1.0]).unwrap();
        // reduced matrix [[4,-1],[-1,4]]/6, load (1,1): T = 6/3 = 2 at both
        assert!((sol.compliance - 4.0).abs() < 1e-12);
    }

    #[test]
    fn irregular_elastic_agrees_with_regular() {
        let dom = [Point2::new(0.0, 0.0), Point2::new(2.0, 0.0), Point2::new(2.0, 1.0), Point2::new(0.0, 1.0)];
        let irr = build_irregular_with_iterations(800, &dom, 5, 30).unwrap();
        let reg = build_regular(80, 40, 2.0, 1.0).unwrap();
        let case = LoadCase {
            physics: Physics::Elastic,
            loads: vec![NodalLoad {
                at: NodeSelector::OnSegment { a: Point2::new(2.0, 0.0), b: Point2::new(2.0, 1.0), tol: 1e-9 },
                value: [0.0, -1.0],
            }],
            ..cantilever_case()
        };
        let ci = FeSystem::new(&irr, MaterialModel::default(), &case, false).unwrap();
        let cr = FeSystem::new(&reg, MaterialModel::default(), &case, false).unwrap();
        // normalize by the total applied load squared since node counts differ
        let ni = ci.force().iter().filter(|f| **f != 0.0).count() as f64;
        let nr = cr.force().iter().filter(|f| **f != 0.0).count() as f64;
        let a = ci.solve(&vec![1.0; irr.len()]).unwrap().compliance / (ni * ni);
        let b = cr.solve(&vec![1.0; reg.len()]).unwrap().compliance / (nr * nr);
        assert!((a - b).abs() < 0.1 * b, "{a} vs {b}");
    }

    fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for c in 0..n {
            for r in c + 1..n {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            x[r] = (b[r] - (r + 1..n).map(|k| a[r][k] * x[k]).sum::<f64>()) / a[r][r];
        }
        x
    }

    #[test]
    fn single_quad_hand_assembly() {
        let nu: f64 = 0.3;
        let k = [
            0.5 - nu / 6.0,
            0.125 + nu / 8.0,
            -0.25 - nu / 12.0,
            -0.125 + 3.0 * nu / 8.0,
            -0.25 + nu / 12.0,
            -0.125 - nu / 8.0,
            nu / 6.0,
            0.125 - 3.0 * nu / 8.0,
        ];
        // free dofs: lower-right (u, v) and upper-right (u, v)
        let c = 1.0 / (1.0 - nu * nu);
        let a = vec![
            vec![c * k[0], c * k[5], c * k[6], c * k[3]],
            vec![c * k[5], c * k[0], c * k[7], c * k[2]],
            vec![c * k[6], c * k[7], c * k[0], c * k[1]],
            vec![c * k[3], c * k[2], c * k[1], c * k[0]],
        ];
        let x = gauss_solve(a, vec![1.0, 0.0, 1.0, 0.0]);
        let expect = x[0] + x[2];
        let mesh = build_regular(1, 1, 1.0, 1.0).unwrap();
        let case = LoadCase {
            physics: Physics::Elastic,
            loads: vec![NodalLoad {
                at: NodeSelector::OnSegment { a: Point2::new(1.0, 0.0), b: Point2::new(1.0, 1.0), tol: 1e-9 },
                value: [1.0, 0.0],
            }],
            ..cantilever_case()
        };
        let c = FeSystem::new(&mesh, MaterialModel::default(), &case, false).unwrap().solve(&[1.0]).unwrap().compliance;
        assert!((c - expect).abs() < 1e-12 * expect, "{c} vs {expect}");
    }

    #[test]
    fn thermal_two_by_two_dense_oracle() {
        let mesh = build_regular(2, 2, 2.0, 2.0).unwrap();
        let case = LoadCase {
            physics: Physics::Thermal,
            loads: vec![NodalLoad { at: NodeSelector::AllDomain, value: [1.0, 0.0] }],
            supports: vec![Support { at: NodeSelector::Nearest(Point2::new(0.0, 0.0)), fixed: [true, false] }],
        };
        // hand assembly of the 9-node grid from the unit conduction stencil
        let ke = [[4.0, -1.0, -2.0, -1.0], [-1.0, 4.0, -1.0, -2.0], [-2.0, -1.0, 4.0, -1.0], [-1.0, -2.0, -1.0, 4.0]];
        let mut kg = vec![vec![0.0; 9]; 9];
        for ex in 0..2 {
            for ey in 0..2 {
                let n1 = ex * 3 + ey;
                let n2 = (ex + 1) * 3 + ey;
                let nodes = [n1, n2, n2 + 1, n1 + 1];
                for a in 0..4 {
                    for b in 0..4 {
                        kg[nodes[a]][nodes[b]] += ke[a][b] / 6.0;
                    }
                }
            }
        }
        let reduced: Vec<Vec<f64>> = (1..9).map(|i| (1..9).map(|j| kg[i][j]).collect()).collect();
        let t = gauss_solve(reduced, vec![1.0; 8]);
        let expect: f64 = t.iter().sum();
        let sys = FeSystem::new(&mesh, MaterialModel::default(), &case, false).unwrap();
        let c = sys.solve(&[1.0; 4]).unwrap().compliance;
        assert!((c - expect).abs() < 1e-12 * expect);
        let doubled = MaterialModel { e0: 2.0, emin: 2e-9, ..MaterialModel::default() };
        let c2 = FeSystem::new(&mesh, doubled, &case, false).unwrap().solve(&[1.0; 4]).unwrap().compliance;
        assert!((c - 2.0 * c2).abs() < 1e-12 * c);
    }

    #[test]
    fn uniform_field_scaling() {
        let mesh = build_regular(12, 4, 3.0, 1.0).unwrap();
        let sys = FeSystem::new(&mesh, MaterialModel::default(), &cantilever_case(), false).unwrap();
        let c1 = sys.solve(&vec![1.0; mesh.len()]).unwrap().compliance;
        for alpha in [0.2, 0.5, 0.9] {
            let c = sys.solve(&vec![alpha; mesh.len()]).unwrap().compliance;
            let factor = 1e-9 + f64::powi(alpha, 3) * (1.0 - 1e-9);
            assert!((c - c1 / factor).abs() < 1e-9 * c);
        }
    }

    #[test]
    fn mirrored_problem_same_compliance() {
        let mesh = build_regular(12, 4, 3.0, 1.0).unwrap();
        let rho: Vec<f64> = (0..mesh.len()).map(|i| 0.2 + 0.6 * ((i * 5) % 9) as f64 / 8.0).collect();
        // mirror across x = 1.5: element (ix, iy) -> (11 - ix, iy)
        let mirrored: Vec<f64> = (0..mesh.len()).map(|e| rho[(11 - e / 4) * 4 + e % 4]).collect();
        let case = |x: f64| LoadCase {
            physics: Physics::Elastic,
            loads: vec![NodalLoad { at: NodeSelector::Nearest(Point2::new(1.0, 1.0)), value: [0.0, -1.0] }],
            supports: vec![Support {
                at: NodeSelector::OnSegment { a: Point2::new(x, 0.0), b: Point2::new(x, 1.0), tol: 1e-9 },
                fixed: [true, true],
            }],
        };
        let a = FeSystem::new(&mesh, MaterialModel::default(), &case(0.0), false).unwrap().solve(&rho).unwrap();
        let mut mcase = case(3.0);
        mcase.loads[0].at = NodeSelector::Nearest(Point2::new(2.0, 1.0));
        let b = FeSystem::new(&mesh, MaterialModel::default(), &mcase, false).unwrap().solve(&mirrored).unwrap();
        assert!((a.compliance - b.compliance).abs() < 1e-10 * a.compliance);
    }

    #[test]
    fn simp_examples() {
        let m = MaterialModel::default();
        assert_eq!(simp_modulus(0.0, &m), 1e-9);
        assert_eq!(simp_modulus(1.0, &m), 1.0);
        assert!((simp_modulus(0.5, &m) - (1e-9 + 0.125 * (1.0 - 1e-9))).abs() < 1e-16);
    }

    #[test]
    fn rejects_bad_input() {
        let mesh = build_regular(4, 2, 2.0, 1.0).unwrap();
        let mut case = cantilever_case();
        let sys = FeSystem::new(&mesh, MaterialModel::default(), &case, false).unwrap();
        assert!(sys.solve(&[1.0; 3]).is_err());
        let mut bad = vec![1.0; mesh.len()];
        bad[2] = f64::NAN;
        assert!(sys.solve(&bad).is_err());
        case.supports.clear();
        assert!(FeSystem::new(&mesh, MaterialModel::default(), &case, false).is_err());
        let sliding = LoadCase {
            supports: vec![Support {
                at: NodeSelector::OnSegment { a: Point2::new(0.0, 0.0), b: Point2::new(0.0, 1.0), tol: 1e-9 },
                fixed: [true, false],
            }],
            ..cantilever_case()
        };
        assert!(matches!(
            FeSystem::new(&mesh, MaterialModel::default(), &sliding, false),
            Err(Error::SingularSystem(_))
        ));
        let far = LoadCase {
            loads: vec![NodalLoad { at: NodeSelector::OnSegment { a: Point2::new(9.0, 9.0), b: Point2::new(9.0, 10.0), tol: 1e-9 }, value: [1.0, 0.0] }],
            ..cantilever_case()
        };
        assert!(FeSystem::new(&mesh, MaterialModel::default(), &far, false).is_err());
    }
}
