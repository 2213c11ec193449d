//! Helpers shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use nitsche_cut::element::{ElementGeometry, ElementType, Vec2};
use nitsche_cut::geometry::{BcType, ImplicitDomain};
use nitsche_cut::quadrature::{tessellate, SurfaceRule, VolumeRule, DEFAULT_DEPTH};

/// A single element cut by one straight Dirichlet line.
#[derive(Clone, Debug)]
pub struct CutConfig {
    pub geometry: ElementGeometry,
    pub element_type: ElementType,
    pub normal: Vec2,
    pub offset: f64,
}

impl CutConfig {
    pub fn domain(&self) -> ImplicitDomain {
        ImplicitDomain::from_half_planes(&[(self.normal, self.offset, BcType::Dirichlet)]).unwrap()
    }

    pub fn rules(&self) -> (VolumeRule, SurfaceRule) {
        let tess = tessellate(&self.geometry, &self.domain(), DEFAULT_DEPTH, 0).unwrap();
        let deg = 2 * self.element_type.total_degree() + 1;
        (tess.volume_rule(deg), tess.surface_rule(deg))
    }

    pub fn translated(&self, shift: Vec2) -> Self {
        CutConfig {
            geometry: self.geometry.translated(shift),
            offset: self.offset + self.normal.dot(&shift),
            ..self.clone()
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        CutConfig {
            geometry: self.geometry.scaled(s),
            offset: self.offset * s,
            ..self.clone()
        }
    }
}

const TYPES: [ElementType; 3] = [
    ElementType::TriP1,
    ElementType::QuadQ1,
    ElementType::QuadQ2,
];

/// Random element, random line through it, keeping between 10% and 90% of
/// the element inside.
pub fn random_cut(rng: &mut ChaCha8Rng) -> CutConfig {
    loop {
        let element_type = TYPES[rng.gen_range(0..TYPES.len())];
        let size = rng.gen_range(0.05..2.0);
        let origin = Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let geometry = if element_type.is_quad() {
            ElementGeometry::square(origin, size)
        } else {
            let a = origin;
            let b = a + Vec2::new(size, rng.gen_range(-0.3..0.3) * size);
            let c = a + Vec2::new(rng.gen_range(-0.3..0.6) * size, size);
            ElementGeometry::Triangle([a, b, c])
        };
        let v = geometry.vertices();
        let centroid = v.iter().fold(Vec2::zeros(), |s, p| s + p) / v.len() as f64;
        let t = rng.gen_range(0.0..std::f64::consts::TAU);
        let normal = Vec2::new(t.cos(), t.sin());
        let through = centroid + (v[rng.gen_range(0..v.len())] - centroid) * rng.gen_range(0.0..0.9);
        let cfg = CutConfig {
            geometry,
            element_type,
            normal,
            offset: normal.dot(&through),
        };
        let Ok(tess) = tessellate(&cfg.geometry, &cfg.domain(), DEFAULT_DEPTH, 0) else {
            continue;
        };
        let frac = tess.area() / cfg.geometry.area();
        if (0.1..0.9).contains(&frac) {
            return cfg;
        }
    }
}

/// Brute-force `2 max v'Av / v'Bv` over the local space modulo constants.
///
/// Both forms vanish on constants, so any complement works; this one fixes
/// the first nodal coefficient to zero and reduces with a Cholesky factor.
pub fn lambda_oracle(
    geometry: &ElementGeometry,
    ty: ElementType,
    volume: &VolumeRule,
    surface: &SurfaceRule,
) -> f64 {
    let (a, b) = nodal_forms(geometry, ty, volume, surface);
    let n = a.nrows();
    let a = a.view((1, 1), (n - 1, n - 1)).into_owned();
    let b = b.view((1, 1), (n - 1, n - 1)).into_owned();
    let l = Cholesky::new(b).expect("gradient Gram is definite off constants").l();
    let linv = l.clone().try_inverse().unwrap();
    let c = &linv * a * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    2.0 * SymmetricEigen::new(c).eigenvalues.max()
}

/// Normal-derivative trace form and gradient form in the nodal basis.
pub fn nodal_forms(
    geometry: &ElementGeometry,
    ty: ElementType,
    volume: &VolumeRule,
    surface: &SurfaceRule,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = ty.n_local();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, n);
    for (p, w) in volume.points.iter().zip(&volume.weights) {
        let s = geometry.eval(ty, *p);
        let g = s.grads();
        for i in 0..n {
            for j in 0..n {
                b[(i, j)] += w * g[i].dot(&g[j]);
            }
        }
    }
    for q in 0..surface.len() {
        let s = geometry.eval(ty, surface.points[q]);
        let g = s.grads();
        let nrm = surface.normals[q];
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] += surface.weights[q] * g[i].dot(&nrm) * g[j].dot(&nrm);
            }
        }
    }
    (a, b)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
