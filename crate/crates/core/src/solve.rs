//! Direct solution of the assembled system and error norms against the
//! manufactured solution.

use rayon::prelude::*;

use crate::assembly::LinearSystem;
use crate::element::Vec2;
use crate::error::Result;
use crate::geometry::{BcType, ManufacturedSolution};
use crate::linalg::solve_direct;
use crate::space::Discretization;
use crate::stabilization::{StabMode, StabilizationField};

/// Relative residual required from every solve.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteSolution {
    pub coefficients: Vec<f64>,
}

pub fn solve(system: &LinearSystem) -> Result<DiscreteSolution> {
    let coefficients = solve_direct(&system.matrix, &system.rhs, RESIDUAL_TOL)?;
    Ok(DiscreteSolution { coefficients })
}

/// Errors of a discrete function against the exact solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorNorms {
    pub energy: f64,
    pub h1: f64,
    pub l2: f64,
    /// `‖∇(u - u_h)‖_Ω`.
    pub h1_semi: f64,
}

/// Errors of `coeffs` measured with the rules of degree `2p + 3`. The energy
/// norm uses the same parameters and modes as the assembled form.
pub fn error_norms(
    disc: &Discretization,
    stab: &StabilizationField,
    coeffs: &[f64],
    sol: &dyn ManufacturedSolution,
) -> ErrorNorms {
    error_norms_of(disc, stab, sol, |i, x| disc.evaluate(coeffs, i, x))
}

/// Same norms for an arbitrary per-element function `(element, x) ↦ (v, ∇v)`.
pub fn error_norms_of(
    disc: &Discretization,
    stab: &StabilizationField,
    sol: &dyn ManufacturedSolution,
    eval: impl Fn(usize, Vec2) -> (f64, Vec2) + Sync,
) -> ErrorNorms {
    let parts: Vec<[f64; 3]> = (0..disc.elements.len())
        .into_par_iter()
        .map(|i| {
            let el = &disc.elements[i];
            let (mut l2, mut semi, mut boundary) = (0.0, 0.0, 0.0);
            for (p, w) in el.error_volume.points.iter().zip(&el.error_volume.weights) {
                let (v, g) = eval(i, *p);
                let e = sol.value(*p) - v;
                let ge = sol.gradient(*p) - g;
                l2 += w * e * e;
                semi += w * ge.norm_squared();
            }
            let surf = &el.error_surface;
            for q in 0..surf.len() {
                if disc.bc(surf.facets[q]) != BcType::Dirichlet {
                    continue;
                }
                let Some(st) = stab.entries.get(i).and_then(|e| e.as_ref()) else {
                    continue;
                };
                let (p, nrm, w) = (surf.points[q], surf.normals[q], surf.weights[q]);
                let (v, g) = eval(i, p);
                let e = sol.value(p) - v;
                let dn = (sol.gradient(p) - g).dot(&nrm);
                boundary += w * match st.mode {
                    StabMode::Nitsche => dn * dn / st.lambda + st.lambda * e * e,
                    StabMode::CappedPenalty => st.lambda * e * e,
                };
            }
            [l2, semi, boundary]
        })
        .collect();
    let (mut l2, mut semi, mut boundary) = (0.0, 0.0, 0.0);
    for [a, b, c] in parts {
        l2 += a;
        semi += b;
        boundary += c;
    }
    ErrorNorms {
        energy: (semi + boundary).sqrt(),
        h1: (l2 + semi).sqrt(),
        l2: l2.sqrt(),
        h1_semi: semi.sqrt(),
    }
}
