//! Gauss-Legendre rules on `[0,1]` and rules built from them.

use std::f64::consts::PI;

use crate::element::Vec2;

/// `n`-point Gauss-Legendre rule on `[0, 1]`, exact for degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        points[i] = 0.5 * (1.0 - x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (points, weights)
}

/// Points per direction for exactness of degree `degree`.
pub fn points_for_degree(degree: usize) -> usize {
    (degree + 2) / 2
}

/// Rule on the segment from `a` to `b`, exact for polynomials of `degree`.
pub fn segment_rule(a: Vec2, b: Vec2, degree: usize) -> impl Iterator<Item = (Vec2, f64)> {
    let (t, w) = gauss_legendre(points_for_degree(degree));
    let len = (b - a).norm();
    t.into_iter()
        .zip(w)
        .map(move |(t, w)| (a + (b - a) * t, w * len))
}

/// Tensor rule on an axis-aligned box.
pub fn box_rule(lo: Vec2, hi: Vec2, degree: usize) -> Vec<(Vec2, f64)> {
    let (t, w) = gauss_legendre(points_for_degree(degree));
    let area = (hi.x - lo.x) * (hi.y - lo.y);
    let mut out = Vec::with_capacity(t.len() * t.len());
    for (ty, wy) in t.iter().zip(&w) {
        for (tx, wx) in t.iter().zip(&w) {
            out.push((
                Vec2::new(lo.x + tx * (hi.x - lo.x), lo.y + ty * (hi.y - lo.y)),
                wx * wy * area,
            ));
        }
    }
    out
}

/// Collapsed (Duffy) tensor rule on a triangle, exact for total `degree`.
///
/// The collapse adds one power of the second coordinate to the integrand,
/// hence one more point than the plain tensor rule for the same degree.
pub fn triangle_rule(v: &[Vec2; 3], degree: usize) -> Vec<(Vec2, f64)> {
    let n = points_for_degree(degree + 1);
    let (t, w) = gauss_legendre(n);
    let [a, b, c] = *v;
    let twice_area = (b - a).perp(&(c - a)).abs();
    let mut out = Vec::with_capacity(n * n);
    for (s, ws) in t.iter().zip(&w) {
        for (r, wr) in t.iter().zip(&w) {
            let xi = r * (1.0 - s);
            let eta = *s;
            let p = a + (b - a) * xi + (c - a) * eta;
            out.push((p, wr * ws * (1.0 - s) * twice_area));
        }
    }
    out
}
