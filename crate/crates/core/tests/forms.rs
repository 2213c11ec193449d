use nalgebra::SymmetricEigen;
use proptest::prelude::*;

use nitsche_cut::assembly::{assemble, assemble_energy_gram};
use nitsche_cut::element::{ElementGeometry, ElementType, Vec2};
use nitsche_cut::geometry::{BcType, DomainKind, ImplicitDomain, ManufacturedSolution};
use nitsche_cut::mesh::BackgroundMesh;
use nitsche_cut::solve::solve;
use nitsche_cut::space::Discretization;
use nitsche_cut::stabilization::{stabilization_field, FormVariant, StabMode, StabilizationField};

/// `u = x² - y²`: harmonic and integrated exactly by the assembly rules.
struct Saddle;

impl ManufacturedSolution for Saddle {
    fn value(&self, x: Vec2) -> f64 {
        x.x * x.x - x.y * x.y
    }
    fn gradient(&self, x: Vec2) -> Vec2 {
        Vec2::new(2.0 * x.x, -2.0 * x.y)
    }
    fn source(&self, _x: Vec2) -> f64 {
        0.0
    }
}

/// `a_h(u, φ_d)` for every dof, written out from the bilinear form. Capped
/// elements also get `-∫ ∂_n u φ`, the flux the penalty drops, so that the
/// result equals `l_h(φ_d)` for both variants.
fn form_against_exact(disc: &Discretization, stab: &StabilizationField, u: &Saddle) -> Vec<f64> {
    let ty = disc.element_type();
    let mut out = vec![0.0; disc.space.n_dofs()];
    for (i, el) in disc.elements.iter().enumerate() {
        let dofs = disc.space.element_dofs(i);
        for (p, w) in el.volume.points.iter().zip(&el.volume.weights) {
            let s = el.geometry.eval(ty, *p);
            for (a, &d) in dofs.iter().enumerate() {
                out[d] += w * u.gradient(*p).dot(&s.grads()[a]);
            }
        }
        let surf = &el.surface;
        for q in 0..surf.len() {
            if disc.bc(surf.facets[q]) != BcType::Dirichlet {
                continue;
            }
            let st = stab.entries[i].unwrap();
            let (p, n, w) = (surf.points[q], surf.normals[q], surf.weights[q]);
            let s = el.geometry.eval(ty, p);
            for (a, &d) in dofs.iter().enumerate() {
                let (v, dnv) = (s.values()[a], s.grads()[a].dot(&n));
                let dnu = u.gradient(p).dot(&n);
                out[d] += w * match st.mode {
                    StabMode::Nitsche => -dnu * v - dnv * u.value(p) + st.lambda * u.value(p) * v,
                    StabMode::CappedPenalty => st.lambda * u.value(p) * v - dnu * v,
                };
            }
        }
    }
    out
}

fn check_orthogonality(kind: DomainKind, ty: ElementType, eps: f64, variant: FormVariant) {
    let domain = ImplicitDomain::new(kind, eps).unwrap();
    let disc = Discretization::new(domain, ty, 8, 2).unwrap();
    let stab = stabilization_field(&disc, variant).unwrap();
    let sys = assemble(&disc, &stab, &Saddle).unwrap();
    let uh = solve(&sys).unwrap();
    let au = form_against_exact(&disc, &stab, &Saddle);
    let auh = sys.matrix.mul_vec(&uh.coefficients);
    let scale = au.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for d in 0..au.len() {
        if sys.pinned.contains(&d) {
            continue;
        }
        assert!(
            (au[d] - auh[d]).abs() <= 1e-9 * scale,
            "{kind} {ty} ε={eps}: dof {d}: {} vs {}",
            au[d],
            auh[d]
        );
    }
}

#[test]
fn galerkin_orthogonality() {
    for kind in [DomainKind::OverlapSquare, DomainKind::MixedSquare, DomainKind::KinkedSquare] {
        for ty in [ElementType::TriP1, ElementType::QuadQ1, ElementType::QuadQ2] {
            check_orthogonality(kind, ty, 0.01, FormVariant::SymmetricNitsche);
        }
    }
    check_orthogonality(
        DomainKind::OverlapSquare,
        ElementType::QuadQ1,
        1e-4,
        FormVariant::HybridNitschePenalty { cap: 1000.0 },
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn orthogonality_for_random_offsets(log_eps in -14.0f64..-3.0) {
        check_orthogonality(
            DomainKind::KinkedSquare,
            ElementType::QuadQ1,
            log_eps.exp2(),
            FormVariant::SymmetricNitsche,
        );
    }
}

fn fitted_square() -> ImplicitDomain {
    ImplicitDomain::from_half_planes(&[
        (Vec2::new(1.0, 0.0), 1.0, BcType::Dirichlet),
        (Vec2::new(0.0, 1.0), 1.0, BcType::Dirichlet),
        (Vec2::new(-1.0, 0.0), 1.0, BcType::Dirichlet),
        (Vec2::new(0.0, -1.0), 1.0, BcType::Dirichlet),
    ])
    .unwrap()
}

#[test]
fn energy_gram_matches_termwise_integrals() {
    // v = xy on (-1, 1)²: ∫|∇v|² = ∫ x² + y² = 8/3. On every boundary edge
    // |∂_n v| = |v| = |t| with t the tangential coordinate, so an edge piece
    // [a, b] contributes (λ + 1/λ)(b³ - a³)/3.
    let mesh = BackgroundMesh::new(ElementType::QuadQ1, 4).unwrap();
    let disc = Discretization::on_mesh(fitted_square(), mesh, 2).unwrap();
    let stab = stabilization_field(&disc, FormVariant::SymmetricNitsche).unwrap();
    let e = assemble_energy_gram(&disc, &stab).unwrap();
    let v = disc.space.interpolate(|p| p.x * p.y);
    let mut expected = 8.0 / 3.0;
    let on = |a: f64, b: f64| (a - b).abs() < 1e-14;
    for (i, el) in disc.elements.iter().enumerate() {
        let ElementGeometry::Quad { min, max } = el.geometry else { unreachable!() };
        let Some(st) = stab.entries[i] else { continue };
        let cube = |a: f64, b: f64| (b.powi(3) - a.powi(3)) / 3.0;
        let mut t = 0.0;
        for x in [min.x, max.x] {
            if on(x.abs(), 1.0) {
                t += cube(min.y, max.y);
            }
        }
        for y in [min.y, max.y] {
            if on(y.abs(), 1.0) {
                t += cube(min.x, max.x);
            }
        }
        expected += (st.lambda + 1.0 / st.lambda) * t;
    }
    let got = e.bilinear(&v, &v);
    assert!((got - expected).abs() <= 1e-12 * expected, "{got} vs {expected}");
}

#[test]
fn energy_gram_is_positive_semidefinite() {
    for (kind, ty) in [
        (DomainKind::PNormBall8, ElementType::QuadQ1),
        (DomainKind::OverlapSquare, ElementType::TriP1),
        (DomainKind::KinkedSquare, ElementType::QuadQ2),
    ] {
        for eps in [2f64.powi(-5), 2f64.powi(-15)] {
            let domain = ImplicitDomain::new(kind, eps).unwrap();
            let disc = Discretization::new(domain, ty, 4, 2).unwrap();
            let stab = stabilization_field(&disc, FormVariant::HybridNitschePenalty { cap: 1e4 })
                .unwrap();
            let e = assemble_energy_gram(&disc, &stab).unwrap().to_dense();
            let eig = SymmetricEigen::new(e.clone()).eigenvalues;
            let max = eig.max();
            assert!(eig.min() >= -1e-12 * max, "{kind} {ty} ε={eps}: {}", eig.min());
        }
    }
}

#[test]
fn neumann_sides_only_change_their_own_rows() {
    // Mixed boundary conditions drop the Nitsche terms on |x| = 1 + ε; every
    // other row of the system is unchanged.
    let eps = 2f64.powi(-7);
    let build = |kind| {
        let domain = ImplicitDomain::new(kind, eps).unwrap();
        let disc = Discretization::new(domain, ElementType::QuadQ1, 8, 2).unwrap();
        let stab = stabilization_field(&disc, FormVariant::SymmetricNitsche).unwrap();
        let sys = assemble(&disc, &stab, &nitsche_cut::geometry::SineSolution).unwrap();
        (disc, sys)
    };
    let (dirichlet, a) = build(DomainKind::OverlapSquare);
    let (mixed, b) = build(DomainKind::MixedSquare);
    assert_eq!(dirichlet.space.n_dofs(), mixed.space.n_dofs());
    let mut touched = vec![false; mixed.space.n_dofs()];
    for (i, el) in mixed.elements.iter().enumerate() {
        if el.surface.facets.iter().any(|&f| mixed.bc(f) == BcType::Neumann) {
            for &d in mixed.space.element_dofs(i) {
                touched[d] = true;
            }
        }
    }
    let n = touched.len();
    let mut changed_rows = 0;
    for r in 0..n {
        let row_a: Vec<f64> = (0..n).map(|c| a.matrix.get(r, c)).collect();
        let row_b: Vec<f64> = (0..n).map(|c| b.matrix.get(r, c)).collect();
        if touched[r] {
            changed_rows += (row_a != row_b) as usize;
        } else {
            assert_eq!(row_a, row_b, "row {r}");
            assert_eq!(a.rhs[r], b.rhs[r], "rhs {r}");
        }
    }
    assert!(changed_rows > 0);
}
