//! Global Nitsche systems and the Gram matrices of the energy and H¹ norms.

use rayon::prelude::*;

use crate::element::MAX_LOCAL;
use crate::error::{Error, Result};
use crate::geometry::{BcType, ManufacturedSolution};
use crate::linalg::CsrMatrix;
use crate::space::Discretization;
use crate::stabilization::{StabMode, StabilizationField};

/// Dofs whose support meets `Ω` in less than this area are pinned to zero.
pub const PIN_TOL: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub pinned: Vec<usize>,
}

type Local = ([[f64; MAX_LOCAL]; MAX_LOCAL], [f64; MAX_LOCAL]);

fn scatter(disc: &Discretization, locals: Vec<Local>) -> (CsrMatrix, Vec<f64>) {
    let n = disc.space.n_dofs();
    let mut triplets = Vec::new();
    let mut rhs = vec![0.0; n];
    for (i, (ke, fe)) in locals.iter().enumerate() {
        let dofs = disc.space.element_dofs(i);
        for (a, &da) in dofs.iter().enumerate() {
            rhs[da] += fe[a];
            for (b, &db) in dofs.iter().enumerate() {
                triplets.push((da, db, ke[a][b]));
            }
        }
    }
    (CsrMatrix::from_triplets(n, &triplets), rhs)
}

pub fn pinned_dofs(disc: &Discretization) -> Vec<usize> {
    disc.support_measure()
        .iter()
        .enumerate()
        .filter(|(_, m)| **m < PIN_TOL)
        .map(|(d, _)| d)
        .collect()
}

fn stab_for<'a>(
    stab: &'a StabilizationField,
    disc: &Discretization,
    i: usize,
) -> Result<&'a crate::stabilization::ElementStab> {
    stab.entries
        .get(i)
        .and_then(|e| e.as_ref())
        .ok_or(Error::MissingStabilization {
            element: disc.elements[i].id,
        })
}

/// Nitsche system `a_h(u, v) = l_h(v)`; capped elements use a plain penalty.
pub fn assemble(
    disc: &Discretization,
    stab: &StabilizationField,
    sol: &dyn ManufacturedSolution,
) -> Result<LinearSystem> {
    let ty = disc.element_type();
    let locals = (0..disc.elements.len())
        .into_par_iter()
        .map(|i| -> Result<Local> {
            let el = &disc.elements[i];
            let n = ty.n_local();
            let mut ke = [[0.0; MAX_LOCAL]; MAX_LOCAL];
            let mut fe = [0.0; MAX_LOCAL];
            for (p, w) in el.volume.points.iter().zip(&el.volume.weights) {
                let s = el.geometry.eval(ty, *p);
                let (v, g) = (s.values(), s.grads());
                let f = sol.source(*p);
                for a in 0..n {
                    fe[a] += w * f * v[a];
                    for b in 0..n {
                        ke[a][b] += w * g[a].dot(&g[b]);
                    }
                }
            }
            let surf = &el.surface;
            for q in 0..surf.len() {
                let (p, nrm, w) = (surf.points[q], surf.normals[q], surf.weights[q]);
                let s = el.geometry.eval(ty, p);
                let v = s.values();
                let (bc, data) = disc.domain.boundary_data(sol, surf.facets[q], p, nrm);
                match bc {
                    BcType::Neumann => {
                        for a in 0..n {
                            fe[a] += w * data * v[a];
                        }
                    }
                    BcType::Dirichlet => {
                        let st = stab_for(stab, disc, i)?;
                        let lam = st.lambda;
                        match st.mode {
                            StabMode::Nitsche => {
                                let dn: Vec<f64> = s.grads().iter().map(|g| g.dot(&nrm)).collect();
                                for a in 0..n {
                                    fe[a] += w * (lam * v[a] - dn[a]) * data;
                                    for b in 0..n {
                                        ke[a][b] += w
                                            * (lam * v[a] * v[b] - dn[b] * v[a] - dn[a] * v[b]);
                                    }
                                }
                            }
                            StabMode::CappedPenalty => {
                                for a in 0..n {
                                    fe[a] += w * lam * v[a] * data;
                                    for b in 0..n {
                                        ke[a][b] += w * lam * v[a] * v[b];
                                    }
                                }
                            }
                        }
                    }
                }
            }
            Ok((ke, fe))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut matrix, mut rhs) = scatter(disc, locals);
    let pinned = pinned_dofs(disc);
    matrix.pin(&pinned);
    for &d in &pinned {
        rhs[d] = 0.0;
    }
    Ok(LinearSystem {
        matrix,
        rhs,
        pinned,
    })
}

/// Gram matrix of the mesh-dependent energy norm: `vᵀ E v = |||v|||²`.
pub fn assemble_energy_gram(disc: &Discretization, stab: &StabilizationField) -> Result<CsrMatrix> {
    let ty = disc.element_type();
    let locals = (0..disc.elements.len())
        .into_par_iter()
        .map(|i| -> Result<Local> {
            let el = &disc.elements[i];
            let n = ty.n_local();
            let mut ke = [[0.0; MAX_LOCAL]; MAX_LOCAL];
            for (p, w) in el.volume.points.iter().zip(&el.volume.weights) {
                let s = el.geometry.eval(ty, *p);
                let g = s.grads();
                for a in 0..n {
                    for b in 0..n {
                        ke[a][b] += w * g[a].dot(&g[b]);
                    }
                }
            }
            let surf = &el.surface;
            for q in 0..surf.len() {
                if disc.bc(surf.facets[q]) != BcType::Dirichlet {
                    continue;
                }
                let st = stab_for(stab, disc, i)?;
                let (nrm, w) = (surf.normals[q], surf.weights[q]);
                let s = el.geometry.eval(ty, surf.points[q]);
                let v = s.values();
                let dn: Vec<f64> = s.grads().iter().map(|g| g.dot(&nrm)).collect();
                for a in 0..n {
                    for b in 0..n {
                        ke[a][b] += w * match st.mode {
                            StabMode::Nitsche => {
                                dn[a] * dn[b] / st.lambda + st.lambda * v[a] * v[b]
                            }
                            StabMode::CappedPenalty => st.lambda * v[a] * v[b],
                        };
                    }
                }
            }
            Ok((ke, [0.0; MAX_LOCAL]))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut matrix, _) = scatter(disc, locals);
    matrix.pin(&pinned_dofs(disc));
    Ok(matrix)
}

/// Gram matrix of the `H¹(Ω)` norm.
pub fn assemble_h1_gram(disc: &Discretization) -> CsrMatrix {
    let ty = disc.element_type();
    let locals: Vec<Local> = disc
        .elements
        .par_iter()
        .map(|el| {
            let n = ty.n_local();
            let mut ke = [[0.0; MAX_LOCAL]; MAX_LOCAL];
            for (p, w) in el.volume.points.iter().zip(&el.volume.weights) {
                let s = el.geometry.eval(ty, *p);
                let (v, g) = (s.values(), s.grads());
                for a in 0..n {
                    for b in 0..n {
                        ke[a][b] += w * (v[a] * v[b] + g[a].dot(&g[b]));
                    }
                }
            }
            (ke, [0.0; MAX_LOCAL])
        })
        .collect();
    let (mut matrix, _) = scatter(disc, locals);
    matrix.pin(&pinned_dofs(disc));
    matrix
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::ElementType;
    use crate::geometry::{DomainKind, ImplicitDomain, LinearSolution, SineSolution};
    use crate::stabilization::{stabilization_field, FormVariant};

    fn disc(kind: DomainKind, eps: f64, ty: ElementType, k: usize) -> Discretization {
        let domain = ImplicitDomain::new(kind, eps).unwrap();
        Discretization::new(domain, ty, k, 2).unwrap()
    }

    #[test]
    fn matrices_are_symmetric() {
        let d = disc(DomainKind::PNormBall8, 0.013, ElementType::QuadQ1, 8);
        let sol = SineSolution;
        for variant in [
            FormVariant::SymmetricNitsche,
            FormVariant::HybridNitschePenalty { cap: 100.0 },
        ] {
            let stab = stabilization_field(&d, variant).unwrap();
            let sys = assemble(&d, &stab, &sol).unwrap();
            assert!(sys.matrix.asymmetry() <= 1e-12 * sys.matrix.max_abs());
            let e = assemble_energy_gram(&d, &stab).unwrap();
            assert!(e.asymmetry() <= 1e-12 * e.max_abs());
        }
    }

    #[test]
    fn inactive_cap_reproduces_nitsche() {
        let d = disc(DomainKind::OverlapSquare, 0.02, ElementType::TriP1, 8);
        let sol = SineSolution;
        let plain = stabilization_field(&d, FormVariant::SymmetricNitsche).unwrap();
        let capped =
            stabilization_field(&d, FormVariant::HybridNitschePenalty { cap: 1e300 }).unwrap();
        assert_eq!(capped.n_capped(), 0);
        let a = assemble(&d, &plain, &sol).unwrap();
        let b = assemble(&d, &capped, &sol).unwrap();
        assert_eq!(a.matrix, b.matrix);
        assert_eq!(a.rhs, b.rhs);
    }

    #[test]
    fn missing_parameter_is_reported() {
        let d = disc(DomainKind::OverlapSquare, 0.02, ElementType::QuadQ1, 4);
        let mut stab = stabilization_field(&d, FormVariant::SymmetricNitsche).unwrap();
        let i = stab.entries.iter().position(|e| e.is_some()).unwrap();
        stab.entries[i] = None;
        assert!(matches!(
            assemble(&d, &stab, &SineSolution),
            Err(Error::MissingStabilization { .. })
        ));
    }

    #[test]
    fn energy_gram_of_zero_is_zero() {
        let d = disc(DomainKind::OverlapSquare, 0.02, ElementType::QuadQ1, 4);
        let stab = stabilization_field(&d, FormVariant::SymmetricNitsche).unwrap();
        let e = assemble_energy_gram(&d, &stab).unwrap();
        let zero = vec![0.0; d.space.n_dofs()];
        assert_eq!(e.bilinear(&zero, &zero), 0.0);
    }

    #[test]
    fn linear_solution_rhs_is_consistent() {
        // For ū in V_h, A ū = b holds exactly up to rounding.
        let d = disc(DomainKind::OverlapSquare, 1.0 / 24.0, ElementType::QuadQ1, 8);
        let sol = LinearSolution {
            c0: 0.0,
            cx: 1.0,
            cy: 1.0,
        };
        let stab = stabilization_field(&d, FormVariant::SymmetricNitsche).unwrap();
        let sys = assemble(&d, &stab, &sol).unwrap();
        let u = d.space.interpolate(|p| p.x + p.y);
        let r: Vec<f64> = sys
            .matrix
            .mul_vec(&u)
            .iter()
            .zip(&sys.rhs)
            .map(|(a, b)| a - b)
            .collect();
        let scale = sys.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(r.iter().all(|v| v.abs() < 1e-10 * scale));
    }
}
