//! Cut-cell quadrature by bisection-based tessellation.
//!
//! A cut element is bisected recursively up to `max_depth` levels. Sub-cells
//! entirely inside the domain are kept whole; sub-cells entirely outside are
//! dropped; the remaining leaves are split into triangles and clipped facet by
//! facet. Edge crossings are located by linear interpolation of the facet
//! level set (exact for straight facets), followed by one Newton step along the
//! edge for curved facets. Every boundary segment remembers the facet that
//! produced it.

pub mod gauss;

use crate::element::{ElementGeometry, Vec2};
use crate::error::{Error, Result};
use crate::geometry::{bounding_box, classify_element, snap, CellClass, ImplicitDomain, LevelSet};

pub use gauss::{box_rule, gauss_legendre, segment_rule, triangle_rule};

/// Relative measure below which sub-features are discarded.
pub const DROP_TOL: f64 = 1e-14;

/// Default bisection depth.
pub const DEFAULT_DEPTH: usize = 2;

#[derive(Clone, Debug, Default)]
pub struct VolumeRule {
    pub points: Vec<Vec2>,
    pub weights: Vec<f64>,
}

impl VolumeRule {
    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, f: impl Fn(Vec2) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(*p)).sum()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Debug, Default)]
pub struct SurfaceRule {
    pub points: Vec<Vec2>,
    pub weights: Vec<f64>,
    /// Outward unit normals.
    pub normals: Vec<Vec2>,
    /// Generating facet of each point.
    pub facets: Vec<usize>,
}

impl SurfaceRule {
    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, f: impl Fn(Vec2, Vec2) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.normals)
            .zip(&self.weights)
            .map(|((p, n), w)| w * f(*p, *n))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Sub-rule of the points whose facet satisfies `keep`.
    pub fn filter(&self, keep: impl Fn(usize) -> bool) -> SurfaceRule {
        let mut out = SurfaceRule::default();
        for i in 0..self.len() {
            if keep(self.facets[i]) {
                out.points.push(self.points[i]);
                out.weights.push(self.weights[i]);
                out.normals.push(self.normals[i]);
                out.facets.push(self.facets[i]);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySegment {
    pub a: Vec2,
    pub b: Vec2,
    pub normal: Vec2,
    pub facet: usize,
}

impl BoundarySegment {
    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }
}

/// Integration geometry of `T ∩ Ω` and `T ∩ ∂Ω`.
#[derive(Clone, Debug, Default)]
pub struct Tessellation {
    /// Axis-aligned sub-cells fully inside the domain.
    pub boxes: Vec<(Vec2, Vec2)>,
    /// Interior simplices, counterclockwise.
    pub triangles: Vec<[Vec2; 3]>,
    pub segments: Vec<BoundarySegment>,
}

impl Tessellation {
    pub fn area(&self) -> f64 {
        let boxes: f64 = self
            .boxes
            .iter()
            .map(|(lo, hi)| (hi.x - lo.x) * (hi.y - lo.y))
            .sum();
        let tris: f64 = self.triangles.iter().map(triangle_area).sum();
        boxes + tris
    }

    pub fn boundary_length(&self) -> f64 {
        self.segments.iter().map(BoundarySegment::length).sum()
    }

    pub fn volume_rule(&self, degree: usize) -> VolumeRule {
        let mut rule = VolumeRule::default();
        for (lo, hi) in &self.boxes {
            for (p, w) in box_rule(*lo, *hi, degree) {
                rule.points.push(p);
                rule.weights.push(w);
            }
        }
        for t in &self.triangles {
            for (p, w) in triangle_rule(t, degree) {
                rule.points.push(p);
                rule.weights.push(w);
            }
        }
        rule
    }

    pub fn surface_rule(&self, degree: usize) -> SurfaceRule {
        let mut rule = SurfaceRule::default();
        for s in &self.segments {
            for (p, w) in segment_rule(s.a, s.b, degree) {
                rule.points.push(p);
                rule.weights.push(w);
                rule.normals.push(s.normal);
                rule.facets.push(s.facet);
            }
        }
        rule
    }
}

fn triangle_area(t: &[Vec2; 3]) -> f64 {
    0.5 * (t[1] - t[0]).perp(&(t[2] - t[0]))
}

/// Tessellate a `Cut` element.
pub fn tessellate(
    element: &ElementGeometry,
    domain: &ImplicitDomain,
    max_depth: usize,
    element_id: usize,
) -> Result<Tessellation> {
    element.validate(element_id)?;
    match classify_element(domain, element, max_depth)? {
        CellClass::Cut => {}
        other => {
            return Err(Error::Tessellation {
                element: element_id,
                reason: format!("expected a cut element, found {other:?}"),
            })
        }
    }
    let tess = tessellate_region(element, domain, max_depth);
    if tess.area() <= DROP_TOL * element.area() {
        return Err(Error::Tessellation {
            element: element_id,
            reason: "cut element produced no interior region".into(),
        });
    }
    Ok(tess)
}

/// Volume rule on `T ∩ Ω`; uncut elements get the plain rule on `T`.
pub fn volume_rule(
    element: &ElementGeometry,
    domain: &ImplicitDomain,
    max_depth: usize,
    degree: usize,
) -> Result<VolumeRule> {
    element.validate(0)?;
    Ok(tessellate_region(element, domain, max_depth).volume_rule(degree))
}

/// Surface rule on `T ∩ ∂Ω` with outward normals.
pub fn surface_rule(
    element: &ElementGeometry,
    domain: &ImplicitDomain,
    max_depth: usize,
    degree: usize,
) -> Result<SurfaceRule> {
    element.validate(0)?;
    Ok(tessellate_region(element, domain, max_depth).surface_rule(degree))
}

#[derive(Clone, Copy)]
enum SubCell {
    Box(Vec2, Vec2),
    Tri([Vec2; 3]),
}

impl SubCell {
    fn vertices(&self) -> Vec<Vec2> {
        match *self {
            SubCell::Box(lo, hi) => vec![lo, Vec2::new(hi.x, lo.y), hi, Vec2::new(lo.x, hi.y)],
            SubCell::Tri(t) => t.to_vec(),
        }
    }

    fn children(&self) -> [SubCell; 4] {
        match *self {
            SubCell::Box(lo, hi) => {
                let m = (lo + hi) * 0.5;
                [
                    SubCell::Box(lo, m),
                    SubCell::Box(Vec2::new(m.x, lo.y), Vec2::new(hi.x, m.y)),
                    SubCell::Box(m, hi),
                    SubCell::Box(Vec2::new(lo.x, m.y), Vec2::new(m.x, hi.y)),
                ]
            }
            SubCell::Tri([a, b, c]) => {
                let (ab, bc, ca) = ((a + b) * 0.5, (b + c) * 0.5, (c + a) * 0.5);
                [
                    SubCell::Tri([a, ab, ca]),
                    SubCell::Tri([ab, b, bc]),
                    SubCell::Tri([ca, bc, c]),
                    SubCell::Tri([ab, bc, ca]),
                ]
            }
        }
    }

    fn triangles(&self) -> Vec<[Vec2; 3]> {
        match *self {
            SubCell::Box(lo, hi) => {
                let (lr, ul) = (Vec2::new(hi.x, lo.y), Vec2::new(lo.x, hi.y));
                vec![[lo, lr, hi], [lo, hi, ul]]
            }
            SubCell::Tri(t) => vec![t],
        }
    }
}

struct Tessellator<'a> {
    domain: &'a ImplicitDomain,
    max_depth: usize,
    area_tol: f64,
    length_tol: f64,
    out: Tessellation,
}

/// Tessellate any element without the `Cut` precondition. Inside elements
/// yield themselves plus any edges lying on a straight boundary facet.
pub(crate) fn tessellate_region(
    element: &ElementGeometry,
    domain: &ImplicitDomain,
    max_depth: usize,
) -> Tessellation {
    let mut t = Tessellator {
        domain,
        max_depth,
        area_tol: DROP_TOL * element.area(),
        length_tol: DROP_TOL * element.diameter(),
        out: Tessellation::default(),
    };
    let root = match element {
        ElementGeometry::Quad { min, max } => SubCell::Box(*min, *max),
        ElementGeometry::Triangle(v) => SubCell::Tri(*v),
    };
    t.visit(root, 0);
    t.out
}

impl Tessellator<'_> {
    fn visit(&mut self, cell: SubCell, depth: usize) {
        let vertices = cell.vertices();
        let facets = self.domain.facets();
        let all_inside = facets
            .iter()
            .all(|f| vertices.iter().all(|v| snap(f.level_set.value(*v)) <= 0.0));
        if all_inside {
            match cell {
                SubCell::Box(lo, hi) => self.out.boxes.push((lo, hi)),
                SubCell::Tri(t) => self.out.triangles.push(t),
            }
            self.emit_coincident_edges(&vertices);
            return;
        }
        let (lo, hi) = bounding_box(&vertices);
        let excluded = facets.iter().any(|f| match f.level_set {
            LevelSet::HalfPlane { .. } => vertices
                .iter()
                .all(|v| snap(f.level_set.value(*v)) >= 0.0),
            LevelSet::PNormBall { .. } => snap(f.level_set.min_over_box(lo, hi)) >= 0.0,
        });
        if excluded {
            return;
        }
        if depth < self.max_depth {
            for child in cell.children() {
                self.visit(child, depth + 1);
            }
            return;
        }
        for tri in cell.triangles() {
            self.clip_triangle(tri);
        }
    }

    /// Edges of a fully inside sub-cell that lie on a straight facet.
    fn emit_coincident_edges(&mut self, vertices: &[Vec2]) {
        let n = vertices.len();
        for k in 0..n {
            let (a, b) = (vertices[k], vertices[(k + 1) % n]);
            if let Some(facet) = self.coincident_facet(a, b) {
                self.push_segment(a, b, facet);
            }
        }
    }

    fn coincident_facet(&self, a: Vec2, b: Vec2) -> Option<usize> {
        self.domain.facets().iter().position(|f| {
            f.level_set.is_affine()
                && snap(f.level_set.value(a)) == 0.0
                && snap(f.level_set.value(b)) == 0.0
        })
    }

    fn push_segment(&mut self, a: Vec2, b: Vec2, facet: usize) {
        let d = b - a;
        let len = d.norm();
        if len <= self.length_tol {
            return;
        }
        let level_set = &self.domain.facets()[facet].level_set;
        let normal = match level_set {
            LevelSet::HalfPlane { normal, .. } => *normal,
            LevelSet::PNormBall { .. } => {
                let chord = Vec2::new(d.y, -d.x) / len;
                if chord.dot(&level_set.gradient((a + b) * 0.5)) < 0.0 {
                    -chord
                } else {
                    chord
                }
            }
        };
        self.out.segments.push(BoundarySegment { a, b, normal, facet });
    }

    fn clip_triangle(&mut self, tri: [Vec2; 3]) {
        // polygon vertex k carries the label of the edge k -> k+1
        let mut poly: Vec<(Vec2, Option<usize>)> = tri.iter().map(|v| (*v, None)).collect();
        for (i, facet) in self.domain.facets().iter().enumerate() {
            let ls = &facet.level_set;
            let values: Vec<f64> = poly.iter().map(|(p, _)| snap(ls.value(*p))).collect();
            let n = poly.len();
            let mut next = Vec::with_capacity(n + 2);
            for k in 0..n {
                let (a, label) = poly[k];
                let b = poly[(k + 1) % n].0;
                let (fa, fb) = (values[k], values[(k + 1) % n]);
                let (a_in, b_in) = (fa <= 0.0, fb <= 0.0);
                if a_in {
                    next.push((a, label));
                    if !b_in {
                        next.push((edge_crossing(ls, a, fa, b, fb), Some(i)));
                    }
                } else if b_in {
                    next.push((edge_crossing(ls, a, fa, b, fb), label));
                }
            }
            poly = dedup_polygon(next, self.length_tol);
            if poly.len() < 3 {
                return;
            }
        }
        let n = poly.len();
        let mut area = 0.0;
        for k in 0..n {
            area += 0.5 * poly[k].0.perp(&poly[(k + 1) % n].0);
        }
        if area <= self.area_tol {
            return;
        }
        for k in 1..n - 1 {
            let t = [poly[0].0, poly[k].0, poly[k + 1].0];
            if triangle_area(&t) > self.area_tol {
                self.out.triangles.push(t);
            }
        }
        for k in 0..n {
            let (a, label) = poly[k];
            let b = poly[(k + 1) % n].0;
            let facet = label.or_else(|| self.coincident_facet(a, b));
            if let Some(facet) = facet {
                self.push_segment(a, b, facet);
            }
        }
    }
}

/// Zero crossing of `ls` on the edge `a`–`b`. The endpoints are put in a
/// canonical order first so that neighbouring cells sharing the edge compute
/// bitwise identical points.
fn edge_crossing(ls: &LevelSet, a: Vec2, fa: f64, b: Vec2, fb: f64) -> Vec2 {
    let ((p, fp), (q, fq)) = if (a.x, a.y) <= (b.x, b.y) {
        ((a, fa), (b, fb))
    } else {
        ((b, fb), (a, fa))
    };
    if fp == 0.0 {
        return p;
    }
    if fq == 0.0 {
        return q;
    }
    let d = q - p;
    let mut t = fp / (fp - fq);
    if !ls.is_affine() {
        let x = p + d * t;
        let slope = ls.gradient(x).dot(&d);
        if slope != 0.0 {
            t = (t - ls.value(x) / slope).clamp(0.0, 1.0);
        }
    }
    p + d * t
}

fn dedup_polygon(poly: Vec<(Vec2, Option<usize>)>, tol: f64) -> Vec<(Vec2, Option<usize>)> {
    let mut out: Vec<(Vec2, Option<usize>)> = Vec::with_capacity(poly.len());
    for (p, label) in poly {
        match out.last_mut() {
            // the surviving point keeps the label of the later outgoing edge
            Some(last) if (last.0 - p).norm() <= tol => last.1 = label,
            _ => out.push((p, label)),
        }
    }
    while out.len() > 1 && (out[0].0 - out[out.len() - 1].0).norm() <= tol {
        out.pop();
    }
    out
}
