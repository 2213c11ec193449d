//! Sparse storage, a banded direct solver and dense symmetric eigenproblems.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Square matrix from `(row, col, value)` triplets; duplicates are summed
    /// in input order.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(i, _, _) in triplets {
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut raw = vec![(0usize, 0.0f64); triplets.len()];
        for &(i, j, v) in triplets {
            raw[next[i]] = (j, v);
            next[i] += 1;
        }
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..n {
            let row = &mut raw[counts[i]..counts[i + 1]];
            row.sort_by_key(|(j, _)| *j);
            for &(j, v) in row.iter() {
                if cols.len() > row_ptr[i] && *cols.last().unwrap() == j {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr[i + 1] = cols.len();
        }
        CsrMatrix {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn identity(n: usize) -> Self {
        let triplets: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, &triplets)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|(c, _)| *c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.mul_vec(y))
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Lower and upper bandwidth.
    pub fn bandwidth(&self) -> (usize, usize) {
        let (mut kl, mut ku) = (0, 0);
        for i in 0..self.n {
            for (j, _) in self.row(i) {
                if j < i {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        (kl, ku)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// Replace rows and columns of `dofs` by those of the identity.
    pub fn pin(&mut self, dofs: &[usize]) {
        if dofs.is_empty() {
            return;
        }
        let mut pinned = vec![false; self.n];
        for &d in dofs {
            pinned[d] = true;
        }
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k];
                if pinned[i] || pinned[j] {
                    self.vals[k] = if i == j { 1.0 } else { 0.0 };
                }
            }
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// LU factorization with partial pivoting of a banded matrix.
///
/// Row `i` is stored in a window starting at column `i - kl` of width
/// `2 kl + ku + 1`, wide enough for the fill caused by row interchanges.
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    width: usize,
    rows: Vec<f64>,
    mult: Vec<f64>,
    piv: Vec<usize>,
}

impl BandedLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.n();
        let (kl, ku) = a.bandwidth();
        let width = 2 * kl + ku + 1;
        let mut rows = vec![0.0; n * width];
        // column j of row i lives at i * width + (j + kl - i)
        for i in 0..n {
            for (j, v) in a.row(i) {
                rows[i * width + j + kl - i] += v;
            }
        }
        let at = |i: usize, j: usize| i * width + j + kl - i;
        let mut mult = vec![0.0; n * kl.max(1)];
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = rows[at(k, k)].abs();
            for r in k + 1..=last {
                let v = rows[at(r, k)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > 0.0) || !best.is_finite() {
                return Err(Error::Singular { pivot: k });
            }
            piv[k] = p;
            let hi = (k + ku + kl).min(n - 1);
            if p != k {
                for j in k..=hi {
                    rows.swap(at(k, j), at(p, j));
                }
            }
            let pivot = rows[at(k, k)];
            for r in k + 1..=last {
                let m = rows[at(r, k)] / pivot;
                mult[k * kl.max(1) + (r - k - 1)] = m;
                if m == 0.0 {
                    continue;
                }
                rows[at(r, k)] = 0.0;
                for j in k + 1..=hi {
                    let u = rows[at(k, j)];
                    if u != 0.0 {
                        rows[at(r, j)] -= m * u;
                    }
                }
            }
        }
        Ok(BandedLu {
            n,
            kl,
            width,
            rows,
            mult,
            piv,
        })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, kl, width) = (self.n, self.kl, self.width);
        let stride = kl.max(1);
        let ku_fill = width - kl - 1;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let xk = x[k];
            if xk != 0.0 {
                for r in k + 1..=(k + kl).min(n - 1) {
                    x[r] -= self.mult[k * stride + (r - k - 1)] * xk;
                }
            }
        }
        for k in (0..n).rev() {
            let base = k * width + kl - k;
            let mut s = x[k];
            for j in k + 1..=(k + ku_fill).min(n - 1) {
                s -= self.rows[base + j] * x[j];
            }
            x[k] = s / self.rows[base + k];
        }
        x
    }
}

/// Direct solve with symmetric diagonal equilibration and iterative
/// refinement. Fails unless `‖Ax - b‖ ≤ tol ‖b‖`.
pub fn solve_direct(a: &CsrMatrix, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    let n = a.n();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let d: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&v| if v != 0.0 { 1.0 / v.abs().sqrt() } else { 1.0 })
        .collect();
    let triplets: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|i| a.row(i).map(move |(j, v)| (i, j, v)).collect::<Vec<_>>())
        .map(|(i, j, v)| (i, j, v * d[i] * d[j]))
        .collect();
    let scaled = CsrMatrix::from_triplets(n, &triplets);
    let lu = BandedLu::factor(&scaled)?;
    let solve_scaled = |r: &[f64]| -> Vec<f64> {
        let rs: Vec<f64> = r.iter().zip(&d).map(|(v, s)| v * s).collect();
        lu.solve(&rs).iter().zip(&d).map(|(v, s)| v * s).collect()
    };
    let mut x = solve_scaled(b);
    let mut residual = f64::INFINITY;
    for _ in 0..10 {
        let ax = a.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        residual = norm(&r) / bnorm;
        if residual <= tol {
            return Ok(x);
        }
        let dx = solve_scaled(&r);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
    }
    let ax = a.mul_vec(&x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    residual = residual.min(norm(&r) / bnorm);
    if residual <= tol {
        Ok(x)
    } else {
        Err(Error::Residual {
            residual,
            tolerance: tol,
        })
    }
}

/// Solution of the symmetric-definite pencil `A x = μ B x`.
#[derive(Clone, Debug)]
pub struct GeneralizedEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// `B`-orthonormal eigenvectors as columns, matching `values`.
    pub vectors: DMatrix<f64>,
    /// Orthonormal basis of the deflated (numerically null) part of `B`.
    pub kernel: DMatrix<f64>,
}

/// Generalized symmetric eigenproblem via the spectral square root of `B`.
/// Eigenvalues of `B` below `deflation × trace(B) / n` are dropped and the
/// problem is solved on the complement.
pub fn generalized_eigen(a: &DMatrix<f64>, b: &DMatrix<f64>, deflation: f64) -> GeneralizedEigen {
    let n = b.nrows();
    let eb = b.clone().symmetric_eigen();
    let cutoff = deflation * b.trace().max(0.0) / n.max(1) as f64;
    let keep: Vec<usize> = (0..n).filter(|&i| eb.eigenvalues[i] > cutoff).collect();
    let drop: Vec<usize> = (0..n).filter(|&i| eb.eigenvalues[i] <= cutoff).collect();
    let kernel = DMatrix::from_fn(n, drop.len(), |r, c| eb.eigenvectors[(r, drop[c])]);
    // W = Q_keep Λ^{-1/2}
    let w = DMatrix::from_fn(n, keep.len(), |r, c| {
        eb.eigenvectors[(r, keep[c])] / eb.eigenvalues[keep[c]].sqrt()
    });
    let mut c = w.transpose() * a * &w;
    c = (&c + c.transpose()) * 0.5;
    let ec = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..keep.len()).collect();
    order.sort_by(|&i, &j| ec.eigenvalues[i].total_cmp(&ec.eigenvalues[j]));
    let values = order.iter().map(|&i| ec.eigenvalues[i]).collect();
    let sorted = DMatrix::from_fn(keep.len(), keep.len(), |r, c| ec.eigenvectors[(r, order[c])]);
    GeneralizedEigen {
        values,
        vectors: w * sorted,
        kernel,
    }
}

pub fn to_dvector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}
