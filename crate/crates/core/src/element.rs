//! Element geometry and nodal Lagrange bases.
//!
//! Quadrilaterals are axis-aligned rectangles with reference element `[0,1]²`
//! and tensor-product local numbering `b * (p + 1) + a` for the lattice node
//! `(a, b)`. Triangles use the reference simplex `(0,0), (1,0), (0,1)` and the
//! vertex order they were constructed with.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;

/// Largest local basis in use (Q2).
pub const MAX_LOCAL: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ElementType {
    TriP1,
    QuadQ1,
    QuadQ2,
}

impl ElementType {
    pub fn order(self) -> usize {
        match self {
            ElementType::TriP1 | ElementType::QuadQ1 => 1,
            ElementType::QuadQ2 => 2,
        }
    }

    /// Total polynomial degree of the local space (`Q_k` contains `x^k y^k`).
    pub fn total_degree(self) -> usize {
        match self {
            ElementType::TriP1 => 1,
            ElementType::QuadQ1 => 2,
            ElementType::QuadQ2 => 4,
        }
    }

    pub fn n_local(self) -> usize {
        match self {
            ElementType::TriP1 => 3,
            ElementType::QuadQ1 => 4,
            ElementType::QuadQ2 => 9,
        }
    }

    pub fn is_quad(self) -> bool {
        !matches!(self, ElementType::TriP1)
    }
}

impl fmt::Display for ElementType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ElementType::TriP1 => "tri-p1",
            ElementType::QuadQ1 => "quad-q1",
            ElementType::QuadQ2 => "quad-q2",
        };
        f.write_str(name)
    }
}

impl FromStr for ElementType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tri-p1" | "p1" => Ok(ElementType::TriP1),
            "quad-q1" | "q1" => Ok(ElementType::QuadQ1),
            "quad-q2" | "q2" => Ok(ElementType::QuadQ2),
            other => Err(Error::Config(format!("unknown element type `{other}`"))),
        }
    }
}

/// Values and gradients of all local basis functions at one point.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub n: usize,
    values: [f64; MAX_LOCAL],
    grads: [Vec2; MAX_LOCAL],
}

impl Shape {
    fn zeros(n: usize) -> Self {
        Shape {
            n,
            values: [0.0; MAX_LOCAL],
            grads: [Vec2::zeros(); MAX_LOCAL],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values[..self.n]
    }

    pub fn grads(&self) -> &[Vec2] {
        &self.grads[..self.n]
    }
}

fn lagrange_1d(order: usize, t: f64) -> ([f64; 3], [f64; 3]) {
    match order {
        1 => ([1.0 - t, t, 0.0], [-1.0, 1.0, 0.0]),
        2 => (
            [
                (1.0 - t) * (1.0 - 2.0 * t),
                4.0 * t * (1.0 - t),
                t * (2.0 * t - 1.0),
            ],
            [4.0 * t - 3.0, 4.0 - 8.0 * t, 4.0 * t - 1.0],
        ),
        _ => unreachable!("only orders 1 and 2 are supported"),
    }
}

/// Reference-element basis values and reference gradients.
pub fn shape_eval(element_type: ElementType, reference: Vec2) -> Shape {
    let mut shape = Shape::zeros(element_type.n_local());
    match element_type {
        ElementType::TriP1 => {
            let (xi, eta) = (reference.x, reference.y);
            shape.values[0] = 1.0 - xi - eta;
            shape.values[1] = xi;
            shape.values[2] = eta;
            shape.grads[0] = Vec2::new(-1.0, -1.0);
            shape.grads[1] = Vec2::new(1.0, 0.0);
            shape.grads[2] = Vec2::new(0.0, 1.0);
        }
        ElementType::QuadQ1 | ElementType::QuadQ2 => {
            let p = element_type.order();
            let (lx, dx) = lagrange_1d(p, reference.x);
            let (ly, dy) = lagrange_1d(p, reference.y);
            for b in 0..=p {
                for a in 0..=p {
                    let i = b * (p + 1) + a;
                    shape.values[i] = lx[a] * ly[b];
                    shape.grads[i] = Vec2::new(dx[a] * ly[b], lx[a] * dy[b]);
                }
            }
        }
    }
    shape
}

/// Physical geometry of one background element.
#[derive(Clone, Debug, PartialEq)]
pub enum ElementGeometry {
    /// Axis-aligned rectangle `[min.x, max.x] × [min.y, max.y]`.
    Quad { min: Vec2, max: Vec2 },
    /// Triangle with counterclockwise vertices.
    Triangle([Vec2; 3]),
}

impl ElementGeometry {
    pub fn square(lower_left: Vec2, size: f64) -> Self {
        ElementGeometry::Quad {
            min: lower_left,
            max: lower_left + Vec2::new(size, size),
        }
    }

    /// Counterclockwise corner list.
    pub fn vertices(&self) -> Vec<Vec2> {
        match self {
            ElementGeometry::Quad { min, max } => vec![
                *min,
                Vec2::new(max.x, min.y),
                *max,
                Vec2::new(min.x, max.y),
            ],
            ElementGeometry::Triangle(v) => v.to_vec(),
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            ElementGeometry::Quad { min, max } => (max.x - min.x) * (max.y - min.y),
            ElementGeometry::Triangle([a, b, c]) => 0.5 * (b - a).perp(&(c - a)),
        }
    }

    pub fn diameter(&self) -> f64 {
        let v = self.vertices();
        let mut d: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d = d.max((v[i] - v[j]).norm());
            }
        }
        d
    }

    pub fn validate(&self, element: usize) -> Result<()> {
        let area = self.area();
        if !(area > 0.0) || !area.is_finite() {
            return Err(Error::DegenerateElement { element });
        }
        Ok(())
    }

    pub fn translated(&self, shift: Vec2) -> Self {
        match self {
            ElementGeometry::Quad { min, max } => ElementGeometry::Quad {
                min: min + shift,
                max: max + shift,
            },
            ElementGeometry::Triangle(v) => {
                ElementGeometry::Triangle([v[0] + shift, v[1] + shift, v[2] + shift])
            }
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            ElementGeometry::Quad { min, max } => ElementGeometry::Quad {
                min: min * factor,
                max: max * factor,
            },
            ElementGeometry::Triangle(v) => {
                ElementGeometry::Triangle([v[0] * factor, v[1] * factor, v[2] * factor])
            }
        }
    }

    /// Physical → reference map (affine for both element kinds).
    pub fn to_reference(&self, x: Vec2) -> Vec2 {
        match self {
            ElementGeometry::Quad { min, max } => {
                Vec2::new((x.x - min.x) / (max.x - min.x), (x.y - min.y) / (max.y - min.y))
            }
            ElementGeometry::Triangle([a, b, c]) => {
                let jac = Matrix2::from_columns(&[b - a, c - a]);
                let inv = jac.try_inverse().expect("non-degenerate triangle");
                inv * (x - a)
            }
        }
    }

    pub fn from_reference(&self, r: Vec2) -> Vec2 {
        match self {
            ElementGeometry::Quad { min, max } => {
                Vec2::new(min.x + r.x * (max.x - min.x), min.y + r.y * (max.y - min.y))
            }
            ElementGeometry::Triangle([a, b, c]) => a + (b - a) * r.x + (c - a) * r.y,
        }
    }

    /// Basis values and physical gradients at the physical point `x`.
    pub fn eval(&self, element_type: ElementType, x: Vec2) -> Shape {
        let mut shape = shape_eval(element_type, self.to_reference(x));
        match self {
            ElementGeometry::Quad { min, max } => {
                let (sx, sy) = (1.0 / (max.x - min.x), 1.0 / (max.y - min.y));
                for g in shape.grads[..shape.n].iter_mut() {
                    *g = Vec2::new(g.x * sx, g.y * sy);
                }
            }
            ElementGeometry::Triangle([a, b, c]) => {
                let jac = Matrix2::from_columns(&[b - a, c - a]);
                let inv_t = jac.try_inverse().expect("non-degenerate triangle").transpose();
                for g in shape.grads[..shape.n].iter_mut() {
                    *g = inv_t * *g;
                }
            }
        }
        shape
    }

    /// Physical coordinates of the local nodes, in local dof order.
    pub fn node_coordinates(&self, element_type: ElementType) -> Vec<Vec2> {
        match (self, element_type) {
            (ElementGeometry::Triangle(v), ElementType::TriP1) => v.to_vec(),
            (ElementGeometry::Quad { .. }, ElementType::QuadQ1 | ElementType::QuadQ2) => {
                let p = element_type.order();
                let mut nodes = Vec::with_capacity((p + 1) * (p + 1));
                for b in 0..=p {
                    for a in 0..=p {
                        let r = Vec2::new(a as f64 / p as f64, b as f64 / p as f64);
                        nodes.push(self.from_reference(r));
                    }
                }
                nodes
            }
            _ => panic!("element type {element_type} does not match geometry"),
        }
    }
}
