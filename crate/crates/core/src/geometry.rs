//! Implicitly described problem domains and manufactured solution data.
//!
//! A domain is the intersection of a few sublevel sets `{phi_i < 0}`, one per
//! boundary facet. Every facet level set is convex and measures (roughly) a
//! distance, so `phi = max_i phi_i` is negative inside, positive outside and
//! vanishes on the boundary. Each facet carries its own boundary condition
//! type; boundary quadrature points inherit the tag of the facet that
//! produced them, never a tag inferred from position.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::element::{ElementGeometry, Vec2};
use crate::error::{Error, Result};

/// Absolute tolerance (length units) under which level-set values are
/// treated as exactly zero.
pub const SNAP_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BcType {
    Dirichlet,
    Neumann,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DomainKind {
    /// `(-1-ε, 1+ε)²`, Dirichlet everywhere.
    OverlapSquare,
    /// Same square, Neumann on `|x| = 1+ε`, Dirichlet on `|y| = 1+ε`.
    MixedSquare,
    /// Parallelogram `|x - εy| < 1`, `|y - εx| < 1`; Neumann on the first
    /// pair of sides, Dirichlet on the second.
    KinkedSquare,
    /// `x⁸ + y⁸ < (1+ε)⁸`, Dirichlet everywhere.
    PNormBall8,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            DomainKind::OverlapSquare => "overlap-square",
            DomainKind::MixedSquare => "mixed-square",
            DomainKind::KinkedSquare => "kinked-square",
            DomainKind::PNormBall8 => "pnorm-ball8",
        };
        f.write_str(name)
    }
}

impl FromStr for DomainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "overlap-square" => Ok(DomainKind::OverlapSquare),
            "mixed-square" => Ok(DomainKind::MixedSquare),
            "kinked-square" => Ok(DomainKind::KinkedSquare),
            "pnorm-ball8" => Ok(DomainKind::PNormBall8),
            other => Err(Error::Config(format!("unknown domain kind `{other}`"))),
        }
    }
}

/// One convex boundary piece.
#[derive(Clone, Debug, PartialEq)]
pub enum LevelSet {
    /// `normal · x - offset` with a unit normal; exact signed distance.
    HalfPlane { normal: Vec2, offset: f64 },
    /// `‖x‖_p - radius` for even `p`.
    PNormBall { p: i32, radius: f64 },
}

impl LevelSet {
    pub fn half_plane(normal: Vec2, offset: f64) -> Self {
        let n = normal.norm();
        LevelSet::HalfPlane {
            normal: normal / n,
            offset: offset / n,
        }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, LevelSet::HalfPlane { .. })
    }

    pub fn value(&self, x: Vec2) -> f64 {
        match self {
            LevelSet::HalfPlane { normal, offset } => normal.dot(&x) - offset,
            LevelSet::PNormBall { p, radius } => p_norm(x, *p) - radius,
        }
    }

    pub fn gradient(&self, x: Vec2) -> Vec2 {
        match self {
            LevelSet::HalfPlane { normal, .. } => *normal,
            LevelSet::PNormBall { p, .. } => {
                let r = p_norm(x, *p);
                if r == 0.0 {
                    return Vec2::zeros();
                }
                let q = *p - 1;
                Vec2::new(
                    (x.x / r).powi(q),
                    (x.y / r).powi(q),
                )
            }
        }
    }

    /// Lower bound of the level set over an axis-aligned box; exact for both
    /// variants since they are separable or affine.
    pub fn min_over_box(&self, lo: Vec2, hi: Vec2) -> f64 {
        match self {
            LevelSet::HalfPlane { normal, offset } => {
                let x = if normal.x >= 0.0 { lo.x } else { hi.x };
                let y = if normal.y >= 0.0 { lo.y } else { hi.y };
                normal.x * x + normal.y * y - offset
            }
            LevelSet::PNormBall { p, radius } => {
                let closest = |a: f64, b: f64| {
                    if a <= 0.0 && b >= 0.0 {
                        0.0
                    } else if a.abs() < b.abs() {
                        a
                    } else {
                        b
                    }
                };
                p_norm(Vec2::new(closest(lo.x, hi.x), closest(lo.y, hi.y)), *p) - radius
            }
        }
    }
}

fn p_norm(x: Vec2, p: i32) -> f64 {
    let m = x.x.abs().max(x.y.abs());
    if m == 0.0 {
        return 0.0;
    }
    m * ((x.x / m).powi(p) + (x.y / m).powi(p)).powf(1.0 / p as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    pub level_set: LevelSet,
    pub bc: BcType,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImplicitDomain {
    kind: Option<DomainKind>,
    epsilon: f64,
    facets: Vec<Facet>,
}

impl ImplicitDomain {
    pub fn new(kind: DomainKind, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::Config(format!(
                "geometry offset must be finite and positive, got {epsilon}"
            )));
        }
        let r = 1.0 + epsilon;
        let axis = |nx: f64, ny: f64, bc| Facet {
            level_set: LevelSet::half_plane(Vec2::new(nx, ny), r),
            bc,
        };
        let facets = match kind {
            DomainKind::OverlapSquare => vec![
                axis(1.0, 0.0, BcType::Dirichlet),
                axis(0.0, 1.0, BcType::Dirichlet),
                axis(-1.0, 0.0, BcType::Dirichlet),
                axis(0.0, -1.0, BcType::Dirichlet),
            ],
            DomainKind::MixedSquare => vec![
                axis(1.0, 0.0, BcType::Neumann),
                axis(0.0, 1.0, BcType::Dirichlet),
                axis(-1.0, 0.0, BcType::Neumann),
                axis(0.0, -1.0, BcType::Dirichlet),
            ],
            DomainKind::KinkedSquare => {
                let tilted = |nx: f64, ny: f64, bc| Facet {
                    level_set: LevelSet::half_plane(Vec2::new(nx, ny), 1.0),
                    bc,
                };
                vec![
                    tilted(1.0, -epsilon, BcType::Neumann),
                    tilted(-epsilon, 1.0, BcType::Dirichlet),
                    tilted(-1.0, epsilon, BcType::Neumann),
                    tilted(epsilon, -1.0, BcType::Dirichlet),
                ]
            }
            DomainKind::PNormBall8 => vec![Facet {
                level_set: LevelSet::PNormBall { p: 8, radius: r },
                bc: BcType::Dirichlet,
            }],
        };
        Ok(ImplicitDomain {
            kind: Some(kind),
            epsilon,
            facets,
        })
    }

    /// Convex polygon `{x : n_i · x < c_i for all i}`. Used for element-level
    /// studies and tests; not reachable from the experiment configuration.
    pub fn from_half_planes(planes: &[(Vec2, f64, BcType)]) -> Result<Self> {
        if planes.is_empty() {
            return Err(Error::Config("a domain needs at least one facet".into()));
        }
        let facets = planes
            .iter()
            .map(|&(n, c, bc)| {
                if !(n.norm() > 0.0) {
                    return Err(Error::Config("half-plane normal must be nonzero".into()));
                }
                Ok(Facet {
                    level_set: LevelSet::half_plane(n, c),
                    bc,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ImplicitDomain {
            kind: None,
            epsilon: 0.0,
            facets,
        })
    }

    pub fn kind(&self) -> Option<DomainKind> {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn is_straight_sided(&self) -> bool {
        self.facets.iter().all(|f| f.level_set.is_affine())
    }

    pub fn has_neumann(&self) -> bool {
        self.facets.iter().any(|f| f.bc == BcType::Neumann)
    }

    /// Half-width of the smallest origin-centred square containing the domain.
    pub fn half_extent(&self) -> f64 {
        let e = self.epsilon;
        match self.kind {
            Some(DomainKind::OverlapSquare | DomainKind::MixedSquare | DomainKind::PNormBall8) => {
                1.0 + e
            }
            Some(DomainKind::KinkedSquare) => 1.0 / (1.0 - e).max(f64::MIN_POSITIVE),
            None => f64::INFINITY,
        }
    }

    pub fn phi(&self, x: Vec2) -> f64 {
        self.facets
            .iter()
            .map(|f| f.level_set.value(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// The unique facet whose zero set contains `x` (within `tol`). Corner
    /// points belong to two facets and are rejected.
    pub fn facet_containing(&self, x: Vec2, tol: f64) -> Result<usize> {
        if self.phi(x).abs() > tol {
            return Err(Error::Input(format!("point {x:?} is not on the boundary")));
        }
        let hits: Vec<usize> = self
            .facets
            .iter()
            .enumerate()
            .filter(|(_, f)| f.level_set.value(x).abs() <= tol)
            .map(|(i, _)| i)
            .collect();
        match hits.as_slice() {
            [i] => Ok(*i),
            _ => Err(Error::Input(format!(
                "boundary point {x:?} lies on {} facets; tag it by its generating facet",
                hits.len()
            ))),
        }
    }

    /// Boundary condition type and data value at a boundary quadrature point
    /// generated by `facet`. `normal` is the outward normal of the
    /// (approximated) boundary at that point.
    pub fn boundary_data(
        &self,
        sol: &dyn ManufacturedSolution,
        facet: usize,
        point: Vec2,
        normal: Vec2,
    ) -> (BcType, f64) {
        let bc = self.facets[facet].bc;
        let value = match bc {
            BcType::Dirichlet => sol.value(point),
            BcType::Neumann => sol.gradient(point).dot(&normal),
        };
        (bc, value)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellClass {
    Inside,
    Outside,
    Cut,
}

/// Classify an element against the domain.
///
/// All facet level sets are convex, so an element whose vertices are all
/// inside is contained in the closed domain. An element is outside when a
/// single facet is nonnegative over the whole element. Everything else is
/// resolved by the same tessellation used for quadrature, so a cell is `Cut`
/// exactly when its integration region has positive measure.
pub fn classify_element(
    domain: &ImplicitDomain,
    element: &ElementGeometry,
    max_depth: usize,
) -> Result<CellClass> {
    element.validate(0)?;
    let vertices = element.vertices();
    let all_inside = domain.facets.iter().all(|f| {
        vertices
            .iter()
            .all(|v| snap(f.level_set.value(*v)) <= 0.0)
    });
    if all_inside {
        return Ok(CellClass::Inside);
    }
    let (lo, hi) = bounding_box(&vertices);
    let excluded = domain.facets.iter().any(|f| match f.level_set {
        LevelSet::HalfPlane { .. } => vertices
            .iter()
            .all(|v| snap(f.level_set.value(*v)) >= 0.0),
        LevelSet::PNormBall { .. } => snap(f.level_set.min_over_box(lo, hi)) >= 0.0,
    });
    if excluded {
        return Ok(CellClass::Outside);
    }
    let tess = crate::quadrature::tessellate_region(element, domain, max_depth);
    if tess.area() <= crate::quadrature::DROP_TOL * element.area() {
        Ok(CellClass::Outside)
    } else {
        Ok(CellClass::Cut)
    }
}

pub(crate) fn snap(v: f64) -> f64 {
    if v.abs() <= SNAP_TOL {
        0.0
    } else {
        v
    }
}

pub(crate) fn bounding_box(points: &[Vec2]) -> (Vec2, Vec2) {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (lo, hi)
}

/// Exact solution `u`, its gradient and the source `f = -Δu`.
pub trait ManufacturedSolution: Send + Sync {
    fn value(&self, x: Vec2) -> f64;
    fn gradient(&self, x: Vec2) -> Vec2;
    fn source(&self, x: Vec2) -> f64;
}

/// `u = sin(πx) + sin(πy)`, so that `f = π² u`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SineSolution;

impl ManufacturedSolution for SineSolution {
    fn value(&self, x: Vec2) -> f64 {
        (PI * x.x).sin() + (PI * x.y).sin()
    }

    fn gradient(&self, x: Vec2) -> Vec2 {
        Vec2::new(PI * (PI * x.x).cos(), PI * (PI * x.y).cos())
    }

    fn source(&self, x: Vec2) -> f64 {
        PI * PI * self.value(x)
    }
}

/// Affine solution `c0 + cx·x + cy·y`; harmonic, contained in every space.
#[derive(Clone, Copy, Debug)]
pub struct LinearSolution {
    pub c0: f64,
    pub cx: f64,
    pub cy: f64,
}

impl ManufacturedSolution for LinearSolution {
    fn value(&self, x: Vec2) -> f64 {
        self.c0 + self.cx * x.x + self.cy * x.y
    }

    fn gradient(&self, _x: Vec2) -> Vec2 {
        Vec2::new(self.cx, self.cy)
    }

    fn source(&self, _x: Vec2) -> f64 {
        0.0
    }
}
