//! Element-local Nitsche stabilization parameters.
//!
//! For an element touching the Dirichlet boundary, `λ_T = 2 μ_max` where
//! `μ_max` is the largest eigenvalue of
//!
//! ```text
//!   ∫_{∂Ω_D ∩ T} ∂_n v ∂_n w ds = μ ∫_{Ω ∩ T} ∇v·∇w dx      v, w ∈ V_h|_T⁰
//! ```
//!
//! and `V_h|_T⁰` is the local space modulo constants (zero mean over all of
//! `T`). The hybrid variant caps the parameter and switches capped elements
//! to a plain penalty.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::element::{ElementGeometry, ElementType};
use crate::error::{Error, Result};
use crate::geometry::BcType;
use crate::linalg::generalized_eigen;
use crate::quadrature::{box_rule, triangle_rule, SurfaceRule, VolumeRule};
use crate::space::Discretization;

/// Default penalty cap of the hybrid method.
pub const DEFAULT_CAP: f64 = 16_000.0;

const DEFLATION: f64 = 1e-12;

/// Mass matrix of the local basis over the full element.
pub fn local_mass(geometry: &ElementGeometry, element_type: ElementType) -> DMatrix<f64> {
    let n = element_type.n_local();
    let degree = 2 * element_type.order();
    let rule = match geometry {
        ElementGeometry::Quad { min, max } => box_rule(*min, *max, degree),
        ElementGeometry::Triangle(v) => triangle_rule(v, degree),
    };
    let mut m = DMatrix::zeros(n, n);
    for (p, w) in rule {
        let s = geometry.eval(element_type, p);
        let v = s.values();
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += w * v[i] * v[j];
            }
        }
    }
    m
}

/// Coefficient vectors (columns) spanning the zero-mean subspace of the local
/// space, orthonormal in the mass inner product over `T`.
pub fn zero_mean_local_basis(geometry: &ElementGeometry, element_type: ElementType) -> DMatrix<f64> {
    let n = element_type.n_local();
    let mass = local_mass(geometry, element_type);
    let inner = |a: &[f64], b: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += a[i] * mass[(i, j)] * b[j];
            }
        }
        s
    };
    // Gram-Schmidt on [1, e_1, ..., e_n]; the constant is discarded at the end.
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut candidates = vec![vec![1.0; n]];
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        candidates.push(e);
    }
    for mut v in candidates {
        if basis.len() == n {
            break;
        }
        let original = inner(&v, &v).sqrt();
        for _ in 0..2 {
            for b in &basis {
                let c = inner(&v, b);
                for k in 0..n {
                    v[k] -= c * b[k];
                }
            }
        }
        let len = inner(&v, &v).sqrt();
        if len > 1e-6 * original {
            basis.push(v.iter().map(|x| x / len).collect());
        }
    }
    DMatrix::from_fn(n, n - 1, |r, c| basis[c + 1][r])
}

/// Raw `λ_T` from the volume rule on `T ∩ Ω` and the Dirichlet surface rule
/// on `T ∩ ∂Ω_D`.
pub fn lambda_t(
    geometry: &ElementGeometry,
    element_type: ElementType,
    volume: &VolumeRule,
    dirichlet: &SurfaceRule,
    element: usize,
) -> Result<f64> {
    let (a, b) = local_eigen_matrices(geometry, element_type, volume, dirichlet);
    let eig = generalized_eigen(&a, &b, DEFLATION);
    if eig.kernel.ncols() > 0 {
        let on_kernel = (eig.kernel.transpose() * &a * &eig.kernel).trace();
        if on_kernel > DEFLATION * a.trace() {
            return Err(Error::SliverDegenerate { element });
        }
    }
    match eig.values.last() {
        Some(&mu) if mu > 0.0 && mu.is_finite() => Ok(2.0 * mu),
        _ => Err(Error::SliverDegenerate { element }),
    }
}

/// The matrices `A` (normal-derivative trace) and `B` (gradient) of the local
/// eigenproblem, expressed in the zero-mean basis.
pub fn local_eigen_matrices(
    geometry: &ElementGeometry,
    element_type: ElementType,
    volume: &VolumeRule,
    dirichlet: &SurfaceRule,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = element_type.n_local();
    let mut a_full = DMatrix::zeros(n, n);
    let mut b_full = DMatrix::zeros(n, n);
    for (p, w) in volume.points.iter().zip(&volume.weights) {
        let s = geometry.eval(element_type, *p);
        let g = s.grads();
        for i in 0..n {
            for j in 0..n {
                b_full[(i, j)] += w * g[i].dot(&g[j]);
            }
        }
    }
    for q in 0..dirichlet.len() {
        let s = geometry.eval(element_type, dirichlet.points[q]);
        let nrm = dirichlet.normals[q];
        let w = dirichlet.weights[q];
        let dn: Vec<f64> = s.grads().iter().map(|g| g.dot(&nrm)).collect();
        for i in 0..n {
            for j in 0..n {
                a_full[(i, j)] += w * dn[i] * dn[j];
            }
        }
    }
    let z = zero_mean_local_basis(geometry, element_type);
    let a = z.transpose() * a_full * &z;
    let b = z.transpose() * b_full * &z;
    ((&a + a.transpose()) * 0.5, (&b + b.transpose()) * 0.5)
}

/// Outcome of the local eigenproblem on one element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RawLambda {
    Value(f64),
    /// The eigenproblem degenerated; the parameter is effectively unbounded.
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabMode {
    Nitsche,
    CappedPenalty,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElementStab {
    pub lambda: f64,
    pub mode: StabMode,
}

/// Weak-form variant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FormVariant {
    SymmetricNitsche,
    HybridNitschePenalty { cap: f64 },
}

impl FormVariant {
    pub fn cap(&self) -> Option<f64> {
        match self {
            FormVariant::SymmetricNitsche => None,
            FormVariant::HybridNitschePenalty { cap } => Some(*cap),
        }
    }
}

/// Stabilization of every active element; `None` where the element has no
/// Dirichlet boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilizationField {
    pub raw: Vec<Option<RawLambda>>,
    pub entries: Vec<Option<ElementStab>>,
    pub cap: Option<f64>,
}

impl StabilizationField {
    /// Largest raw (uncapped) parameter; infinite if any element degenerated.
    pub fn lambda_max(&self) -> f64 {
        self.raw.iter().flatten().fold(0.0, |m, r| match r {
            RawLambda::Value(v) => m.max(*v),
            RawLambda::Degenerate => f64::INFINITY,
        })
    }

    pub fn n_capped(&self) -> usize {
        self.entries
            .iter()
            .flatten()
            .filter(|e| e.mode == StabMode::CappedPenalty)
            .count()
    }

    /// Copy with every stored parameter multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for e in out.entries.iter_mut().flatten() {
            e.lambda *= factor;
        }
        out
    }
}

/// Raw parameters of all active elements with a Dirichlet surface part.
pub fn raw_lambda_field(disc: &Discretization) -> Vec<Option<RawLambda>> {
    let ty = disc.element_type();
    disc.elements
        .par_iter()
        .map(|el| {
            let dirichlet = el
                .surface
                .filter(|f| disc.domain.facets()[f].bc == BcType::Dirichlet);
            if dirichlet.is_empty() {
                return None;
            }
            Some(
                match lambda_t(&el.geometry, ty, &el.volume, &dirichlet, el.id) {
                    Ok(v) => RawLambda::Value(v),
                    Err(_) => RawLambda::Degenerate,
                },
            )
        })
        .collect()
}

/// Apply the optional cap. Without a cap a degenerate element is an error;
/// with one it is treated as exceeding the cap.
pub fn apply_cap(
    raw: &[Option<RawLambda>],
    cap: Option<f64>,
    element_ids: &[usize],
) -> Result<StabilizationField> {
    if let Some(c) = cap {
        if !(c > 0.0) {
            return Err(Error::Config(format!("penalty cap must be positive, got {c}")));
        }
    }
    let entries = raw
        .iter()
        .zip(element_ids)
        .map(|(r, &id)| {
            let Some(r) = r else { return Ok(None) };
            let stab = match (*r, cap) {
                (RawLambda::Value(v), Some(c)) if v > c => ElementStab {
                    lambda: c,
                    mode: StabMode::CappedPenalty,
                },
                (RawLambda::Value(v), _) => ElementStab {
                    lambda: v,
                    mode: StabMode::Nitsche,
                },
                (RawLambda::Degenerate, Some(c)) => ElementStab {
                    lambda: c,
                    mode: StabMode::CappedPenalty,
                },
                (RawLambda::Degenerate, None) => {
                    return Err(Error::SliverDegenerate { element: id })
                }
            };
            Ok(Some(stab))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilizationField {
        raw: raw.to_vec(),
        entries,
        cap,
    })
}

/// Raw parameters followed by the cap implied by `variant`.
pub fn stabilization_field(disc: &Discretization, variant: FormVariant) -> Result<StabilizationField> {
    let raw = raw_lambda_field(disc);
    let ids: Vec<usize> = disc.elements.iter().map(|e| e.id).collect();
    apply_cap(&raw, variant.cap(), &ids)
}
