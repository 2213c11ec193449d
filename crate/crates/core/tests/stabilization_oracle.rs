mod common;

use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{lambda_oracle, nodal_forms, random_cut};
use nitsche_cut::element::Vec2;
use nitsche_cut::stabilization::{lambda_t, zero_mean_local_basis};

fn lambda_of(cfg: &common::CutConfig) -> f64 {
    let (vol, surf) = cfg.rules();
    lambda_t(&cfg.geometry, cfg.element_type, &vol, &surf, 0).unwrap()
}

#[test]
fn matches_brute_force_on_random_cuts() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..50 {
        let cfg = random_cut(&mut rng);
        let (vol, surf) = cfg.rules();
        let got = lambda_t(&cfg.geometry, cfg.element_type, &vol, &surf, 0).unwrap();
        let want = lambda_oracle(&cfg.geometry, cfg.element_type, &vol, &surf);
        let rel = (got - want).abs() / want;
        assert!(rel <= 1e-8, "case {case} {:?}: {got} vs {want}", cfg.element_type);
    }
}

#[test]
fn rayleigh_quotients_stay_below() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..20 {
        let cfg = random_cut(&mut rng);
        let (vol, surf) = cfg.rules();
        let lam = lambda_t(&cfg.geometry, cfg.element_type, &vol, &surf, 0).unwrap();
        let (a, b) = nodal_forms(&cfg.geometry, cfg.element_type, &vol, &surf);
        let z = zero_mean_local_basis(&cfg.geometry, cfg.element_type);
        // Random search with greedy ascent; never exceeds the maximum.
        let mut best = 0.0f64;
        let mut x = DVector::from_fn(z.ncols(), |_, _| rng.gen_range(-1.0..1.0));
        for _ in 0..400 {
            let trial = &x + DVector::from_fn(z.ncols(), |_, _| rng.gen_range(-0.2..0.2));
            let v = &z * &trial;
            let q = 2.0 * (v.transpose() * &a * &v)[0] / (v.transpose() * &b * &v)[0];
            if q > best {
                best = q;
                x = trial;
            }
        }
        assert!(best <= lam * (1.0 + 1e-10), "{best} > {lam}");
        assert!(best > 0.0);
    }
}

#[test]
fn translation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let cfg = random_cut(&mut rng);
        let shift = Vec2::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let (l0, l1) = (lambda_of(&cfg), lambda_of(&cfg.translated(shift)));
        assert!((l0 - l1).abs() <= 1e-10 * l0, "{l0} vs {l1}");
    }
}

#[test]
fn scales_inversely_with_size() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let cfg = random_cut(&mut rng);
        let l0 = lambda_of(&cfg);
        for s in [0.5, 2.0] {
            let ls = lambda_of(&cfg.scaled(s));
            assert!((ls * s - l0).abs() <= 1e-8 * l0, "s={s}: {ls} vs {l0}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn positive_and_finite(seed in any::<u64>()) {
        let cfg = random_cut(&mut ChaCha8Rng::seed_from_u64(seed));
        let lam = lambda_of(&cfg);
        prop_assert!(lam > 0.0 && lam.is_finite());
    }

    #[test]
    fn rotation_by_quarter_turn_is_invariant(seed in any::<u64>()) {
        // A square and its cut rotated about the element centre.
        let cfg = random_cut(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assume!(cfg.element_type.is_quad());
        let v = cfg.geometry.vertices();
        let c = (v[0] + v[2]) * 0.5;
        let rotated = common::CutConfig {
            normal: Vec2::new(-cfg.normal.y, cfg.normal.x),
            offset: cfg.offset - cfg.normal.dot(&c) + Vec2::new(-cfg.normal.y, cfg.normal.x).dot(&c),
            ..cfg.clone()
        };
        let (l0, l1) = (lambda_of(&cfg), lambda_of(&rotated));
        prop_assert!((l0 - l1).abs() <= 1e-9 * l0, "{:?} {} {}", cfg.element_type, l0, l1);
    }
}
