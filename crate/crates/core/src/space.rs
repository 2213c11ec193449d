//! Finite element space on the active mesh and the per-element integration
//! data shared by stabilization, assembly and error evaluation.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::element::{ElementGeometry, ElementType, Shape, Vec2};
use crate::error::Result;
use crate::geometry::{BcType, CellClass, ImplicitDomain};
use crate::mesh::{extract_active, ActiveMesh, BackgroundMesh};
use crate::quadrature::{tessellate_region, SurfaceRule, VolumeRule};

/// Continuous Lagrange space restricted to the active elements. Dofs are
/// numbered in lattice row-major order, which keeps matrices banded.
#[derive(Clone, Debug)]
pub struct FeSpace {
    mesh: BackgroundMesh,
    active: ActiveMesh,
    element_dofs: Vec<Vec<usize>>,
    dof_nodes: Vec<usize>,
}

impl FeSpace {
    pub fn new(mesh: BackgroundMesh, active: ActiveMesh) -> Self {
        let mut used = vec![false; mesh.n_nodes()];
        for &e in &active.active {
            for n in mesh.element_nodes(e) {
                used[n] = true;
            }
        }
        let mut node_to_dof = vec![usize::MAX; mesh.n_nodes()];
        let mut dof_nodes = Vec::new();
        for (node, _) in used.iter().enumerate().filter(|(_, u)| **u) {
            node_to_dof[node] = dof_nodes.len();
            dof_nodes.push(node);
        }
        let element_dofs = active
            .active
            .iter()
            .map(|&e| {
                mesh.element_nodes(e)
                    .into_iter()
                    .map(|n| node_to_dof[n])
                    .collect()
            })
            .collect();
        FeSpace {
            mesh,
            active,
            element_dofs,
            dof_nodes,
        }
    }

    pub fn mesh(&self) -> &BackgroundMesh {
        &self.mesh
    }

    pub fn active(&self) -> &ActiveMesh {
        &self.active
    }

    pub fn element_type(&self) -> ElementType {
        self.mesh.element_type()
    }

    pub fn order(&self) -> usize {
        self.element_type().order()
    }

    pub fn n_dofs(&self) -> usize {
        self.dof_nodes.len()
    }

    pub fn n_active(&self) -> usize {
        self.element_dofs.len()
    }

    /// Global dofs of the `i`-th active element in local order.
    pub fn element_dofs(&self, i: usize) -> &[usize] {
        &self.element_dofs[i]
    }

    pub fn dof_coordinate(&self, dof: usize) -> Vec2 {
        self.mesh.node_coordinate(self.dof_nodes[dof])
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(&self, f: impl Fn(Vec2) -> f64) -> Vec<f64> {
        (0..self.n_dofs()).map(|d| f(self.dof_coordinate(d))).collect()
    }
}

/// Integration data of one active element.
#[derive(Clone, Debug)]
pub struct CutElement {
    /// Background element id.
    pub id: usize,
    pub class: CellClass,
    pub geometry: ElementGeometry,
    /// Rules exact to degree `2p + 1`, `p` the total degree of the space.
    pub volume: VolumeRule,
    pub surface: SurfaceRule,
    /// Rules exact to degree `2p + 3`, used for error norms.
    pub error_volume: VolumeRule,
    pub error_surface: SurfaceRule,
}

impl CutElement {
    pub fn has_dirichlet(&self, domain: &ImplicitDomain) -> bool {
        self.surface
            .facets
            .iter()
            .any(|&f| domain.facets()[f].bc == BcType::Dirichlet)
    }
}

/// Domain, space and integration rules for one geometry configuration.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub domain: ImplicitDomain,
    pub space: FeSpace,
    pub elements: Vec<CutElement>,
    pub depth: usize,
}

impl Discretization {
    pub fn new(
        domain: ImplicitDomain,
        element_type: ElementType,
        k: usize,
        depth: usize,
    ) -> Result<Self> {
        let mesh = BackgroundMesh::covering(element_type, k, &domain)?;
        Self::on_mesh(domain, mesh, depth)
    }

    pub fn on_mesh(domain: ImplicitDomain, mesh: BackgroundMesh, depth: usize) -> Result<Self> {
        let active = extract_active(&mesh, &domain, depth)?;
        let space = FeSpace::new(mesh, active);
        // Cut pieces carry total-degree rules, so products of two basis
        // functions need twice the total degree of the space.
        let p = space.element_type().total_degree();
        let (deg, err_deg) = (2 * p + 1, 2 * p + 3);
        let elements = space
            .active()
            .active
            .par_iter()
            .map(|&id| {
                let geometry = space.mesh().element_geometry(id);
                let tess = tessellate_region(&geometry, &domain, depth);
                CutElement {
                    id,
                    class: space.active().classes[id],
                    volume: tess.volume_rule(deg),
                    surface: tess.surface_rule(deg),
                    error_volume: tess.volume_rule(err_deg),
                    error_surface: tess.surface_rule(err_deg),
                    geometry,
                }
            })
            .collect();
        Ok(Discretization {
            domain,
            space,
            elements,
            depth,
        })
    }

    pub fn element_type(&self) -> ElementType {
        self.space.element_type()
    }

    pub fn h(&self) -> f64 {
        self.space.mesh().h()
    }

    pub fn bc(&self, facet: usize) -> BcType {
        self.domain.facets()[facet].bc
    }

    /// Shape functions of active element `i` at physical point `x`.
    pub fn shape(&self, i: usize, x: Vec2) -> Shape {
        self.elements[i].geometry.eval(self.element_type(), x)
    }

    /// Value and gradient of the discrete function `coeffs` on element `i`.
    pub fn evaluate(&self, coeffs: &[f64], i: usize, x: Vec2) -> (f64, Vec2) {
        let s = self.shape(i, x);
        let dofs = self.space.element_dofs(i);
        let mut value = 0.0;
        let mut grad = Vec2::zeros();
        for (l, &d) in dofs.iter().enumerate() {
            value += coeffs[d] * s.values()[l];
            grad += s.grads()[l] * coeffs[d];
        }
        (value, grad)
    }

    /// Total measure of `Ω` covered by the support of each dof.
    pub fn support_measure(&self) -> Vec<f64> {
        let mut measure = vec![0.0; self.space.n_dofs()];
        for (i, el) in self.elements.iter().enumerate() {
            let m = el.volume.measure();
            for &d in self.space.element_dofs(i) {
                measure[d] += m;
            }
        }
        measure
    }
}

/// Boundary dof counts on the Dirichlet boundary.
///
/// `N` counts dofs whose basis function is nonzero at some Dirichlet surface
/// quadrature point. `M` is the rank of the boundary Gram matrix of those
/// dofs. The Gram is Jacobi scaled before the rank test so that dofs seeing
/// only a short stretch of boundary are not mistaken for null directions.
pub fn boundary_dof_counts(disc: &Discretization) -> (usize, usize) {
    let threshold = 1e-12 * disc.h();
    let mut index: HashMap<usize, usize> = HashMap::new();
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    for (i, el) in disc.elements.iter().enumerate() {
        let dofs = disc.space.element_dofs(i);
        for q in 0..el.surface.len() {
            if disc.bc(el.surface.facets[q]) != BcType::Dirichlet {
                continue;
            }
            let s = disc.shape(i, el.surface.points[q]);
            let w = el.surface.weights[q];
            let vals = s.values();
            for (a, &da) in dofs.iter().enumerate() {
                if vals[a].abs() > threshold {
                    let next = index.len();
                    index.entry(da).or_insert(next);
                }
            }
            for a in 0..dofs.len() {
                for b in 0..dofs.len() {
                    entries.push((dofs[a], dofs[b], w * vals[a] * vals[b]));
                }
            }
        }
    }
    let n = index.len();
    if n == 0 {
        return (0, 0);
    }
    let mut gram = DMatrix::<f64>::zeros(n, n);
    for (a, b, v) in entries {
        if let (Some(&i), Some(&j)) = (index.get(&a), index.get(&b)) {
            gram[(i, j)] += v;
        }
    }
    let scale: Vec<f64> = (0..n).map(|i| 1.0 / gram[(i, i)].sqrt()).collect();
    for i in 0..n {
        for j in 0..n {
            gram[(i, j)] *= scale[i] * scale[j];
        }
    }
    let eig = gram.symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let m = eig.eigenvalues.iter().filter(|&&v| v > 1e-10 * max).count();
    (m, n)
}
