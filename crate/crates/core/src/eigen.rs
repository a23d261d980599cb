//! Dense real symmetric eigensolver.
//!
//! Householder reduction to tridiagonal form followed by the implicit QL
//! iteration with Wilkinson-style shifts. The eigenvalue-only path skips
//! accumulation of the orthogonal transformation and is several times
//! cheaper, which matters for parameter sweeps and fitting.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

const MAX_QL_SWEEPS: usize = 60;

/// Square real matrix stored row-major, meant to hold symmetric operators.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Wraps row-major data without checking symmetry; [`diagonalize`] does.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "row-major data must have n*n entries");
        SymMatrix { n, data }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = SymMatrix::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.n + col] = value;
    }

    /// Sets both `(row, col)` and `(col, row)`.
    #[inline]
    pub fn set_sym(&mut self, row: usize, col: usize, value: f64) {
        self.set(row, col, value);
        self.set(col, row, value);
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.data
            .chunks_exact(self.n.max(1))
            .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.data
            .chunks_exact(self.n.max(1))
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn check(&self) -> Result<()> {
        if self.data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let scale = self.norm_inf().max(f64::MIN_POSITIVE);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let asym = (self.get(i, j) - self.get(j, i)).abs();
                if asym > 1e-12 * scale {
                    return Err(Error::NotSymmetric {
                        row: i,
                        col: j,
                        asymmetry: asym,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigendecomposition {
    pub values: Vec<f64>,
    /// Eigenvector `k` occupies `vectors[k * dim .. (k + 1) * dim]`.
    pub vectors: Vec<f64>,
}

impl Eigendecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        let n = self.dim();
        &self.vectors[k * n..(k + 1) * n]
    }
}

/// Full eigendecomposition of a symmetric matrix.
pub fn diagonalize(h: &SymMatrix) -> Result<Eigendecomposition> {
    h.check()?;
    let n = h.dim();
    if n == 0 {
        return Ok(Eigendecomposition {
            values: Vec::new(),
            vectors: Vec::new(),
        });
    }
    let mut v = h.as_slice().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    householder(n, &mut v, &mut d, &mut e, true);
    // QL rotations act on columns of v; work on the transpose so each
    // eigenvector is a contiguous row.
    let mut w = transpose(n, &v);
    implicit_ql(&mut d, &mut e, Some(&mut w))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&k| d[k]).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for &k in &order {
        vectors.extend_from_slice(&w[k * n..(k + 1) * n]);
    }
    Ok(Eigendecomposition { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn eigenvalues(h: &SymMatrix) -> Result<Vec<f64>> {
    h.check()?;
    let n = h.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut v = h.as_slice().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    householder(n, &mut v, &mut d, &mut e, false);
    implicit_ql(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Eigenvalues of the symmetric tridiagonal matrix with the given diagonal
/// and off-diagonal (`off[i]` couples `i` and `i + 1`), ascending.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if off.len() + 1 != n {
        return Err(Error::InvalidConfig(
            "tridiagonal off-diagonal must have n - 1 entries",
        ));
    }
    if diag.iter().chain(off).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut d = diag.to_vec();
    // implicit_ql expects e[i] to couple i and i + 1 with e[n - 1] = 0.
    let mut e = off.to_vec();
    e.push(0.0);
    implicit_ql(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

fn transpose(n: usize, a: &[f64]) -> Vec<f64> {
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = a[i * n + j];
        }
    }
    t
}

/// Householder tridiagonalization (lower triangle of `v` is read).
///
/// On return `d` holds the diagonal and `e[i]` (for `i < n - 1`) the
/// coupling between `i` and `i + 1`, with `e[n - 1] = 0`. When `accumulate`
/// is set `v` holds the orthogonal transformation, row-major.
fn householder(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64], accumulate: bool) {
    let idx = |r: usize, c: usize| r * n + c;
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
                v[idx(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[idx(j, i)] = f;
                g = e[j] + v[idx(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[idx(k, j)] * d[k];
                    e[k] += v[idx(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[idx(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    if accumulate {
        for i in 0..n - 1 {
            v[idx(n - 1, i)] = v[idx(i, i)];
            v[idx(i, i)] = 1.0;
            let h = d[i + 1];
            if h != 0.0 {
                for k in 0..=i {
                    d[k] = v[idx(k, i + 1)] / h;
                }
                for j in 0..=i {
                    let mut g = 0.0;
                    for k in 0..=i {
                        g += v[idx(k, i + 1)] * v[idx(k, j)];
                    }
                    for k in 0..=i {
                        v[idx(k, j)] -= g * d[k];
                    }
                }
            }
            for k in 0..=i {
                v[idx(k, i + 1)] = 0.0;
            }
        }
        for j in 0..n {
            d[j] = v[idx(n - 1, j)];
            v[idx(n - 1, j)] = 0.0;
        }
        v[idx(n - 1, n - 1)] = 1.0;
    } else {
        for j in 0..n {
            d[j] = v[idx(j, j)];
        }
    }

    // Shift the sub-diagonal so e[i] couples i and i + 1.
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
}

/// Implicit QL on a symmetric tridiagonal matrix. When `rows` is given, the
/// plane rotations are applied to its rows (eigenvectors stored as rows).
fn implicit_ql(d: &mut [f64], e: &mut [f64], mut rows: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0_f64;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(Error::EigenIteration);
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    if let Some(w) = rows.as_deref_mut() {
                        let (head, tail) = w.split_at_mut((i + 1) * n);
                        let row_i = &mut head[i * n..];
                        let row_i1 = &mut tail[..n];
                        for (a, b) in row_i.iter_mut().zip(row_i1.iter_mut()) {
                            let hk = *b;
                            *b = s * *a + c * hk;
                            *a = c * *a - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(h: &SymMatrix, value: f64, v: &[f64]) -> f64 {
        h.mul_vec(v)
            .iter()
            .zip(v)
            .map(|(hv, x)| (hv - value * x).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn diagonal_input_is_sorted_with_permuted_unit_vectors() {
        let h = SymMatrix::from_diagonal(&[2.0, 0.0, 1.0]);
        let eig = diagonalize(&h).unwrap();
        assert_eq!(eig.values, vec![0.0, 1.0, 2.0]);
        assert_eq!(eig.vector(0).iter().map(|x| x.abs()).collect::<Vec<_>>(), [0.0, 1.0, 0.0]);
        assert_eq!(eig.vector(1).iter().map(|x| x.abs()).collect::<Vec<_>>(), [0.0, 0.0, 1.0]);
        assert_eq!(eig.vector(2).iter().map(|x| x.abs()).collect::<Vec<_>>(), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn sigma_x_spectrum() {
        let h = SymMatrix::from_row_major(2, vec![0.0, 1.0, 1.0, 0.0]);
        let eig = diagonalize(&h).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-15);
        assert!((eig.values[1] - 1.0).abs() < 1e-15);
        for k in 0..2 {
            assert!(residual(&h, eig.values[k], eig.vector(k)) < 1e-14);
        }
    }

    #[test]
    fn rejects_asymmetric_input() {
        let h = SymMatrix::from_row_major(2, vec![0.0, 1.0, 1.0 + 1e-6, 0.0]);
        assert!(matches!(diagonalize(&h), Err(Error::NotSymmetric { .. })));
        assert!(matches!(eigenvalues(&h), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn rejects_non_finite_input() {
        let h = SymMatrix::from_row_major(2, vec![f64::NAN, 0.0, 0.0, 1.0]);
        assert_eq!(diagonalize(&h), Err(Error::NonFinite));
    }

    #[test]
    fn one_by_one_and_empty() {
        let eig = diagonalize(&SymMatrix::from_diagonal(&[3.5])).unwrap();
        assert_eq!(eig.values, vec![3.5]);
        assert_eq!(eig.vectors, vec![1.0]);
        assert!(eigenvalues(&SymMatrix::zeros(0)).unwrap().is_empty());
    }

    #[test]
    fn tridiagonal_matches_closed_form() {
        // Path graph Laplacian-like chain: eigenvalues 2 - 2 cos(k pi / (n + 1)).
        let n = 12;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        let vals = tridiagonal_eigenvalues(&diag, &off).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * (((k + 1) as f64) * core::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((v - exact).abs() < 1e-13, "{k}: {v} vs {exact}");
        }
    }
}
