//! Numerical checks of coercivity, continuity, quasi-optimality and norm
//! equivalence on assembled systems.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::assembly::pinned_dofs;
use crate::error::Result;
use crate::geometry::{BcType, ManufacturedSolution};
use crate::linalg::{dot, generalized_eigen, solve_direct, BandedLu, CsrMatrix};
use crate::solve::{DiscreteSolution, RESIDUAL_TOL};
use crate::space::Discretization;
use crate::stabilization::{StabMode, StabilizationField};

/// Largest system solved with dense eigendecompositions.
pub const DENSE_LIMIT: usize = 1500;

/// Relative deflation of the right-hand Gram in dense generalized solves.
const DEFLATION: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoercivityReport {
    /// Smallest generalized eigenvalue of `(A, E)`.
    pub exact_min: f64,
    /// Smallest Rayleigh ratio over the random samples.
    pub sample_min: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquivConstants {
    pub c_est: f64,
    pub big_c_est: f64,
}

/// Indices not pinned by the assembly.
pub fn free_dofs(disc: &Discretization) -> Vec<usize> {
    let pinned = pinned_dofs(disc);
    let mut mask = vec![true; disc.space.n_dofs()];
    for d in pinned {
        mask[d] = false;
    }
    (0..mask.len()).filter(|&d| mask[d]).collect()
}

fn restrict_dense(m: &CsrMatrix, keep: &[usize]) -> DMatrix<f64> {
    let mut pos = vec![usize::MAX; m.n()];
    for (k, &d) in keep.iter().enumerate() {
        pos[d] = k;
    }
    let mut out = DMatrix::zeros(keep.len(), keep.len());
    for (r, &i) in keep.iter().enumerate() {
        for (j, v) in m.row(i) {
            if pos[j] != usize::MAX {
                out[(r, pos[j])] += v;
            }
        }
    }
    out
}

fn restrict_sparse(m: &CsrMatrix, keep: &[usize]) -> CsrMatrix {
    let mut pos = vec![usize::MAX; m.n()];
    for (k, &d) in keep.iter().enumerate() {
        pos[d] = k;
    }
    let mut triplets = Vec::new();
    for (r, &i) in keep.iter().enumerate() {
        for (j, v) in m.row(i) {
            if pos[j] != usize::MAX {
                triplets.push((r, pos[j], v));
            }
        }
    }
    CsrMatrix::from_triplets(keep.len(), &triplets)
}

/// Smallest and largest eigenvalue of `A x = ρ B x` on the free dofs, with
/// `B` symmetric positive (semi)definite.
pub fn generalized_extremes(a: &CsrMatrix, b: &CsrMatrix, free: &[usize]) -> Result<(f64, f64)> {
    if free.len() <= DENSE_LIMIT {
        let eig = generalized_eigen(&restrict_dense(a, free), &restrict_dense(b, free), DEFLATION);
        let min = eig.values.first().copied().unwrap_or(f64::NAN);
        let max = eig.values.last().copied().unwrap_or(f64::NAN);
        return Ok((min, max));
    }
    let a = restrict_sparse(a, free);
    let b = restrict_sparse(b, free);
    let max = power_iteration(&a, &b)?;
    let inv_min = power_iteration(&b, &a)?;
    Ok((1.0 / inv_min, max))
}

/// Dominant eigenvalue of `y ↦ B⁻¹ A y` by power iteration.
fn power_iteration(a: &CsrMatrix, b: &CsrMatrix) -> Result<f64> {
    let n = a.n();
    let lu = BandedLu::factor(b)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    let mut rho = 0.0;
    for _ in 0..5000 {
        let ax = a.mul_vec(&x);
        let bx = b.mul_vec(&x);
        let next_rho = dot(&x, &ax) / dot(&x, &bx);
        let mut y = lu.solve(&ax);
        let scale = dot(&y, &b.mul_vec(&y)).sqrt();
        y.iter_mut().for_each(|v| *v /= scale);
        x = y;
        if (next_rho - rho).abs() <= 1e-10 * next_rho.abs() {
            return Ok(next_rho);
        }
        rho = next_rho;
    }
    Ok(rho)
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize, free: &[usize]) -> Vec<f64> {
    let mut v = vec![0.0; n];
    for &d in free {
        v[d] = rng.gen_range(-1.0..1.0);
    }
    v
}

/// Lower coercivity constant of `a_h` with respect to the energy norm.
pub fn coercivity_scan(
    a: &CsrMatrix,
    e: &CsrMatrix,
    free: &[usize],
    n_samples: usize,
    seed: u64,
) -> Result<CoercivityReport> {
    let (exact_min, _) = generalized_extremes(a, e, free)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample_min = f64::INFINITY;
    let mut drawn = 0;
    while drawn < n_samples {
        let v = random_vector(&mut rng, a.n(), free);
        let energy = e.bilinear(&v, &v);
        if energy <= 0.0 {
            continue;
        }
        sample_min = sample_min.min(a.bilinear(&v, &v) / energy);
        drawn += 1;
    }
    Ok(CoercivityReport {
        exact_min,
        sample_min,
    })
}

/// Largest `|a_h(u, v)| / (|||u||| |||v|||)` over random pairs.
pub fn continuity_scan(
    a: &CsrMatrix,
    e: &CsrMatrix,
    free: &[usize],
    n_pairs: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut drawn = 0;
    while drawn < n_pairs {
        let u = random_vector(&mut rng, a.n(), free);
        let v = random_vector(&mut rng, a.n(), free);
        let (eu, ev) = (e.bilinear(&u, &u), e.bilinear(&v, &v));
        if eu <= 0.0 || ev <= 0.0 {
            continue;
        }
        worst = worst.max(a.bilinear(&u, &v).abs() / (eu * ev).sqrt());
        drawn += 1;
    }
    worst
}

/// Energy inner products `⟨u, φ_i⟩` of the exact solution with every basis
/// function, using the error rules.
pub fn energy_moments(
    disc: &Discretization,
    stab: &StabilizationField,
    sol: &dyn ManufacturedSolution,
) -> Vec<f64> {
    let ty = disc.element_type();
    let locals: Vec<Vec<f64>> = (0..disc.elements.len())
        .into_par_iter()
        .map(|i| {
            let el = &disc.elements[i];
            let n = ty.n_local();
            let mut r = vec![0.0; n];
            for (p, w) in el.error_volume.points.iter().zip(&el.error_volume.weights) {
                let s = el.geometry.eval(ty, *p);
                let gu = sol.gradient(*p);
                for a in 0..n {
                    r[a] += w * gu.dot(&s.grads()[a]);
                }
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
                let s = el.geometry.eval(ty, p);
                let (u, dnu) = (sol.value(p), sol.gradient(p).dot(&nrm));
                for a in 0..n {
                    let v = s.values()[a];
                    r[a] += w * match st.mode {
                        StabMode::Nitsche => {
                            dnu * s.grads()[a].dot(&nrm) / st.lambda + st.lambda * u * v
                        }
                        StabMode::CappedPenalty => st.lambda * u * v,
                    };
                }
            }
            r
        })
        .collect();
    let mut r = vec![0.0; disc.space.n_dofs()];
    for (i, local) in locals.iter().enumerate() {
        for (a, &d) in disc.space.element_dofs(i).iter().enumerate() {
            r[d] += local[a];
        }
    }
    for d in pinned_dofs(disc) {
        r[d] = 0.0;
    }
    r
}

/// Best approximation of `u` in the energy norm.
pub fn energy_projection(
    disc: &Discretization,
    stab: &StabilizationField,
    energy_gram: &CsrMatrix,
    sol: &dyn ManufacturedSolution,
) -> Result<DiscreteSolution> {
    let r = energy_moments(disc, stab, sol);
    let coefficients = solve_direct(energy_gram, &r, RESIDUAL_TOL)?;
    Ok(DiscreteSolution { coefficients })
}

/// Extremal values of `|||v||| / ‖v‖_{H¹(Ω)}` over the discrete space.
pub fn equiv_constants(e: &CsrMatrix, h1: &CsrMatrix, free: &[usize]) -> Result<EquivConstants> {
    let (min, max) = generalized_extremes(e, h1, free)?;
    Ok(EquivConstants {
        c_est: min.max(0.0).sqrt(),
        big_c_est: max.sqrt(),
    })
}
