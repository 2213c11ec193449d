//! Structured background mesh and active-element extraction.
//!
//! The mesh covers `[-1 - L h, 1 + L h]²` with `h = 1/K` and `L` margin
//! layers (one by default). Nodes live on a lattice of spacing `h/p`, where
//! `p` is the element order, numbered row-major from the lower-left corner.
//! Triangles come from splitting each cell along one diagonal; diagonals
//! alternate in a checkerboard anchored at `(-1, -1)` so that every group of
//! four cells forms a union-jack pattern.

use rayon::prelude::*;

use crate::element::{ElementGeometry, ElementType, Vec2};
use crate::error::{Error, Result};
use crate::geometry::{classify_element, CellClass, ImplicitDomain};

#[derive(Clone, Debug, PartialEq)]
pub struct BackgroundMesh {
    element_type: ElementType,
    k: usize,
    layers: usize,
}

impl BackgroundMesh {
    pub fn new(element_type: ElementType, k: usize) -> Result<Self> {
        Self::with_layers(element_type, k, 1)
    }

    pub fn with_layers(element_type: ElementType, k: usize, layers: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Config(format!("K must be at least 2, got {k}")));
        }
        if layers == 0 {
            return Err(Error::Config("at least one margin layer is required".into()));
        }
        Ok(BackgroundMesh {
            element_type,
            k,
            layers,
        })
    }

    /// Mesh with the fewest margin layers (at least one) that still covers
    /// the domain's bounding square.
    pub fn covering(element_type: ElementType, k: usize, domain: &ImplicitDomain) -> Result<Self> {
        let extent = domain.half_extent();
        if !extent.is_finite() {
            return Err(Error::Config("domain has no finite bounding square".into()));
        }
        let h = 1.0 / k as f64;
        let layers = ((extent - 1.0) / h - 1e-12).ceil().max(1.0) as usize;
        Self::with_layers(element_type, k, layers)
    }

    pub fn element_type(&self) -> ElementType {
        self.element_type
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn h(&self) -> f64 {
        1.0 / self.k as f64
    }

    pub fn cells_per_side(&self) -> usize {
        2 * self.k + 2 * self.layers
    }

    pub fn n_cells(&self) -> usize {
        self.cells_per_side().pow(2)
    }

    pub fn n_elements(&self) -> usize {
        match self.element_type {
            ElementType::TriP1 => 2 * self.n_cells(),
            _ => self.n_cells(),
        }
    }

    pub fn nodes_per_side(&self) -> usize {
        self.element_type.order() * self.cells_per_side() + 1
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes_per_side().pow(2)
    }

    fn lattice_coordinate(&self, index: usize) -> f64 {
        let p = self.element_type.order();
        (index as f64 - (p * self.layers) as f64) / (p * self.k) as f64 - 1.0
    }

    pub fn node_coordinate(&self, node: usize) -> Vec2 {
        let n = self.nodes_per_side();
        Vec2::new(
            self.lattice_coordinate(node % n),
            self.lattice_coordinate(node / n),
        )
    }

    /// Cell indices `(i, j)` of an element.
    pub fn cell_of(&self, element: usize) -> (usize, usize) {
        let cell = match self.element_type {
            ElementType::TriP1 => element / 2,
            _ => element,
        };
        (cell % self.cells_per_side(), cell / self.cells_per_side())
    }

    /// Whether cell `(i, j)` uses the lower-left to upper-right diagonal.
    fn rising_diagonal(&self, i: usize, j: usize) -> bool {
        let ix = i as i64 - self.layers as i64;
        let jy = j as i64 - self.layers as i64;
        (ix + jy).rem_euclid(2) == 0
    }

    /// Global lattice nodes of an element in local dof order.
    pub fn element_nodes(&self, element: usize) -> Vec<usize> {
        let (i, j) = self.cell_of(element);
        let p = self.element_type.order();
        let n = self.nodes_per_side();
        let node = |a: usize, b: usize| (p * j + b) * n + p * i + a;
        match self.element_type {
            ElementType::TriP1 => {
                let (ll, lr, ur, ul) = (node(0, 0), node(1, 0), node(1, 1), node(0, 1));
                let lower = element % 2 == 0;
                match (self.rising_diagonal(i, j), lower) {
                    (true, true) => vec![ll, lr, ur],
                    (true, false) => vec![ll, ur, ul],
                    (false, true) => vec![ll, lr, ul],
                    (false, false) => vec![lr, ur, ul],
                }
            }
            _ => {
                let mut nodes = Vec::with_capacity((p + 1) * (p + 1));
                for b in 0..=p {
                    for a in 0..=p {
                        nodes.push(node(a, b));
                    }
                }
                nodes
            }
        }
    }

    pub fn element_geometry(&self, element: usize) -> ElementGeometry {
        let nodes = self.element_nodes(element);
        match self.element_type {
            ElementType::TriP1 => ElementGeometry::Triangle([
                self.node_coordinate(nodes[0]),
                self.node_coordinate(nodes[1]),
                self.node_coordinate(nodes[2]),
            ]),
            _ => ElementGeometry::Quad {
                min: self.node_coordinate(nodes[0]),
                max: self.node_coordinate(nodes[nodes.len() - 1]),
            },
        }
    }
}

/// Per-element classification and the active subset.
#[derive(Clone, Debug)]
pub struct ActiveMesh {
    pub classes: Vec<CellClass>,
    pub active: Vec<usize>,
}

impl ActiveMesh {
    pub fn n_active(&self) -> usize {
        self.active.len()
    }

    pub fn n_cut(&self) -> usize {
        self.classes.iter().filter(|c| **c == CellClass::Cut).count()
    }
}

pub fn extract_active(
    mesh: &BackgroundMesh,
    domain: &ImplicitDomain,
    max_depth: usize,
) -> Result<ActiveMesh> {
    let classes = (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| classify_element(domain, &mesh.element_geometry(e), max_depth))
        .collect::<Result<Vec<_>>>()?;
    let active: Vec<usize> = classes
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != CellClass::Outside)
        .map(|(e, _)| e)
        .collect();
    if active.is_empty() {
        return Err(Error::Config("no background element intersects the domain".into()));
    }
    Ok(ActiveMesh { classes, active })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainKind;

    #[test]
    fn grid_counts() {
        let q1 = BackgroundMesh::new(ElementType::QuadQ1, 16).unwrap();
        assert_eq!(q1.cells_per_side(), 34);
        assert_eq!(q1.n_elements(), 34 * 34);
        assert_eq!(q1.n_nodes(), 1225);
        let p1 = BackgroundMesh::new(ElementType::TriP1, 16).unwrap();
        assert_eq!(p1.n_elements(), 2312);
        assert_eq!(p1.n_nodes(), 1225);
        let q2 = BackgroundMesh::new(ElementType::QuadQ2, 16).unwrap();
        assert_eq!(q2.n_nodes(), 4761);
        assert!(BackgroundMesh::new(ElementType::QuadQ1, 1).is_err());
    }

    #[test]
    fn node_lattice_hits_grid_lines() {
        let mesh = BackgroundMesh::new(ElementType::QuadQ1, 16).unwrap();
        let n = mesh.nodes_per_side();
        let xs: Vec<f64> = (0..n).map(|i| mesh.node_coordinate(i).x).collect();
        assert_eq!(xs[0], -1.0 - 1.0 / 16.0);
        assert_eq!(xs[1], -1.0);
        assert_eq!(xs[17], 0.0);
        assert_eq!(xs[33], 1.0);
        assert_eq!(xs[34], 1.0 + 1.0 / 16.0);
    }

    #[test]
    fn triangles_tile_cells_counterclockwise() {
        let mesh = BackgroundMesh::new(ElementType::TriP1, 4).unwrap();
        let h = mesh.h();
        let total: f64 = (0..mesh.n_elements())
            .map(|e| {
                let a = mesh.element_geometry(e).area();
                assert!(a > 0.0);
                a
            })
            .sum();
        let side = 2.0 + 2.0 * h;
        assert!((total - side * side).abs() < 1e-12);
    }

    #[test]
    fn union_jack_around_origin() {
        // The four cells meeting at (0, 0) all have diagonals through it.
        let mesh = BackgroundMesh::new(ElementType::TriP1, 4).unwrap();
        let origin = (0..mesh.n_nodes())
            .find(|&i| mesh.node_coordinate(i).norm() == 0.0)
            .unwrap();
        let touching = (0..mesh.n_elements())
            .filter(|&e| mesh.element_nodes(e).contains(&origin))
            .count();
        assert_eq!(touching, 8);
    }

    #[test]
    fn covering_adds_layers_for_wide_domains() {
        let k = 16;
        let eps = 1.0 / 16.0;
        let kinked = ImplicitDomain::new(DomainKind::KinkedSquare, eps).unwrap();
        let mesh = BackgroundMesh::covering(ElementType::QuadQ1, k, &kinked).unwrap();
        assert_eq!(mesh.layers(), 2);
        let square = ImplicitDomain::new(DomainKind::OverlapSquare, eps).unwrap();
        let mesh = BackgroundMesh::covering(ElementType::QuadQ1, k, &square).unwrap();
        assert_eq!(mesh.layers(), 1);
    }

    #[test]
    fn active_set_matches_per_cell_classification() {
        let k = 16;
        let h = 1.0 / k as f64;
        let domain = ImplicitDomain::new(DomainKind::OverlapSquare, h / 2.0).unwrap();
        let mesh = BackgroundMesh::new(ElementType::QuadQ1, k).unwrap();
        let active = extract_active(&mesh, &domain, 2).unwrap();
        // Every cell of the outer ring is cut; nothing is outside.
        assert_eq!(active.n_active(), 34 * 34);
        assert_eq!(active.n_cut(), 4 * 33);
        for e in 0..mesh.n_elements() {
            let c = classify_element(&domain, &mesh.element_geometry(e), 2).unwrap();
            assert_eq!(c, active.classes[e]);
        }
    }

    #[test]
    fn empty_active_set_is_an_error() {
        use crate::element::Vec2;
        use crate::geometry::BcType;
        let far = ImplicitDomain::from_half_planes(&[
            (Vec2::new(-1.0, 0.0), -10.0, BcType::Dirichlet),
            (Vec2::new(1.0, 0.0), 11.0, BcType::Dirichlet),
        ])
        .unwrap();
        let mesh = BackgroundMesh::new(ElementType::QuadQ1, 4).unwrap();
        assert!(matches!(extract_active(&mesh, &far, 2), Err(Error::Config(_))));
    }
}
