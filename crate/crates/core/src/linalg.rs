//! Small dense linear algebra: real least squares, complex LU, complex
//! Householder null spaces and a shifted Hessenberg-QR eigenvalue solver.
//!
//! Every matrix here is at most a few dozen rows, so plain row-major `Vec`
//! storage is used throughout.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[Complex64]) {
        for (i, x) in v.iter().enumerate() {
            self[(i, j)] = *x;
        }
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn scaled(&self, s: Complex64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨a, b⟩ = Σ conj(a_i) b_i`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Least-squares solution operator `(TᵀT)⁻¹Tᵀ` of a full-column-rank real
/// matrix (row-major `rows × cols`), returned row-major `cols × rows`.
pub fn real_pseudo_inverse(t: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    assert!(rows >= cols);
    // Householder QR of a copy, applied to each unit right-hand side.
    let mut r = t.to_vec();
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(cols);
    for k in 0..cols {
        let norm: f64 = (k..rows).map(|i| r[i * cols + k].powi(2)).sum::<f64>().sqrt();
        let mut v: Vec<f64> = (k..rows).map(|i| r[i * cols + k]).collect();
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vn: f64 = v.iter().map(|x| x * x).sum::<f64>();
        if vn > 0.0 {
            for j in k..cols {
                let dot: f64 = (k..rows).map(|i| v[i - k] * r[i * cols + j]).sum();
                let f = 2.0 * dot / vn;
                for i in k..rows {
                    r[i * cols + j] -= f * v[i - k];
                }
            }
        }
        vs.push(v);
    }
    let mut pinv = vec![0.0; cols * rows];
    for e in 0..rows {
        let mut b = vec![0.0; rows];
        b[e] = 1.0;
        for (k, v) in vs.iter().enumerate() {
            let vn: f64 = v.iter().map(|x| x * x).sum();
            if vn == 0.0 {
                continue;
            }
            let dot: f64 = (k..rows).map(|i| v[i - k] * b[i]).sum();
            let f = 2.0 * dot / vn;
            for i in k..rows {
                b[i] -= f * v[i - k];
            }
        }
        // back substitution with the upper triangle
        let mut x = vec![0.0; cols];
        for i in (0..cols).rev() {
            let s: f64 = ((i + 1)..cols).map(|j| r[i * cols + j] * x[j]).sum();
            x[i] = (b[i] - s) / r[i * cols + i];
        }
        for i in 0..cols {
            pinv[i * rows + e] = x[i];
        }
    }
    pinv
}

/// Inverse of a small square real matrix by Gauss–Jordan with partial pivoting.
pub fn real_inverse(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| m[x * n + c].abs().total_cmp(&m[y * n + c].abs()))
            .unwrap();
        if p != c {
            for j in 0..n {
                m.swap(p * n + j, c * n + j);
                inv.swap(p * n + j, c * n + j);
            }
        }
        let d = m[c * n + c];
        assert!(d != 0.0, "singular matrix");
        for j in 0..n {
            m[c * n + j] /= d;
            inv[c * n + j] /= d;
        }
        for r in 0..n {
            if r != c {
                let f = m[r * n + c];
                if f != 0.0 {
                    for j in 0..n {
                        m[r * n + j] -= f * m[c * n + j];
                        inv[r * n + j] -= f * inv[c * n + j];
                    }
                }
            }
        }
    }
    inv
}

/// Solve `A x = b` for square complex `A` (LU, partial pivoting). Exactly
/// zero pivots are replaced by `tiny`, which is what inverse iteration wants.
fn complex_solve(a: &CMatrix, b: &[Complex64], tiny: f64) -> Vec<Complex64> {
    let n = a.rows();
    let mut m = a.clone();
    let mut x = b.to_vec();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[(i, c)].norm().total_cmp(&m[(j, c)].norm()))
            .unwrap();
        if p != c {
            for j in 0..n {
                let t = m[(p, j)];
                m[(p, j)] = m[(c, j)];
                m[(c, j)] = t;
            }
            x.swap(p, c);
        }
        if m[(c, c)].norm() < tiny {
            m[(c, c)] = Complex64::new(tiny, 0.0);
        }
        let d = m[(c, c)];
        for r in (c + 1)..n {
            let f = m[(r, c)] / d;
            if f != Complex64::new(0.0, 0.0) {
                for j in c..n {
                    let v = m[(c, j)];
                    m[(r, j)] -= f * v;
                }
                let v = x[c];
                x[r] -= f * v;
            }
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in (i + 1)..n {
            s -= m[(i, j)] * x[j];
        }
        x[i] = s / m[(i, i)];
    }
    x
}

/// Orthonormal basis (as columns) of `{x : F x = 0}` for an `r × n` functional
/// matrix `F`, via Householder QR of `Fᴴ`. Functionals whose pivot falls below
/// `tol` are treated as dependent (or vanishing).
pub fn null_space(f: &CMatrix, tol: f64) -> CMatrix {
    let n = f.cols();
    let r = f.rows();
    let mut a = f.adjoint(); // n × r
    let mut q = CMatrix::identity(n);
    let mut rank = 0;
    for k in 0..r {
        if rank >= n {
            break;
        }
        // pivot column k at row `rank`
        let norm: f64 = (rank..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm <= tol {
            continue;
        }
        let x0 = a[(rank, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (rank..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vn > 0.0 {
            // A <- H A, Q <- Q H with H = I - 2 v vᴴ / (vᴴv)
            for j in 0..r {
                let dot: Complex64 = (rank..n).map(|i| v[i - rank].conj() * a[(i, j)]).sum();
                let fct = dot * (2.0 / vn);
                for i in rank..n {
                    a[(i, j)] -= fct * v[i - rank];
                }
            }
            for i in 0..n {
                let dot: Complex64 = (rank..n).map(|l| q[(i, l)] * v[l - rank]).sum();
                let fct = dot * (2.0 / vn);
                for l in rank..n {
                    q[(i, l)] -= fct * v[l - rank].conj();
                }
            }
        }
        rank += 1;
    }
    CMatrix::from_fn(n, n - rank, |i, j| q[(i, j + rank)])
}

/// Eigenvalues of a square complex matrix: Householder reduction to
/// Hessenberg form followed by single-shift QR with deflation.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    let n = a.rows();
    assert_eq!(n, a.cols());
    if !a.is_finite() {
        return Err(Error::EigenNoConvergence { sweeps: 0 });
    }
    let mut h = hessenberg(a);
    let mut out = Vec::with_capacity(n);
    let max_sweeps = 100 * n * n.max(1);
    let mut sweeps = 0;
    let mut hi = n; // active block is [lo, hi)
    let mut since_deflation = 0;
    let eps = f64::EPSILON;
    while hi > 0 {
        if hi == 1 {
            out.push(h[(0, 0)]);
            break;
        }
        // locate the start of the trailing unreduced block
        let mut lo = 0;
        for k in (1..hi).rev() {
            let s = h[(k, k)].norm() + h[(k - 1, k - 1)].norm();
            let s = if s == 0.0 { 1.0 } else { s };
            if h[(k, k - 1)].norm() <= eps * s {
                h[(k, k - 1)] = Complex64::new(0.0, 0.0);
                lo = k;
                break;
            }
        }
        if lo == hi - 1 {
            out.push(h[(hi - 1, hi - 1)]);
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        sweeps += 1;
        since_deflation += 1;
        if sweeps > max_sweeps {
            return Err(Error::EigenNoConvergence { sweeps });
        }
        let mu = if since_deflation % 11 == 10 {
            // exceptional shift
            h[(hi - 1, hi - 1)] + Complex64::new(h[(hi - 1, hi - 2)].norm(), 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 2, hi - 2)],
                h[(hi - 2, hi - 1)],
                h[(hi - 1, hi - 2)],
                h[(hi - 1, hi - 1)],
            )
        };
        qr_sweep(&mut h, lo, hi, mu);
    }
    Ok(out)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr * 0.25 - det).sqrt();
    let l1 = tr * 0.5 + disc;
    let l2 = tr * 0.5 - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One shifted QR step on the Hessenberg block `[lo, hi)`, using Givens rotations.
fn qr_sweep(h: &mut CMatrix, lo: usize, hi: usize, mu: Complex64) {
    let n = h.rows();
    for k in lo..hi {
        h[(k, k)] -= mu;
    }
    let mut rots: Vec<(Complex64, Complex64)> = Vec::with_capacity(hi - lo);
    for k in lo..hi - 1 {
        let x = h[(k, k)];
        let y = h[(k + 1, k)];
        let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
        } else {
            (x / r, y / r)
        };
        // rows k, k+1 <- G [row k; row k+1], G = [[c*, s*], [-s, c]]
        for j in k..n {
            let a = h[(k, j)];
            let b = h[(k + 1, j)];
            h[(k, j)] = c.conj() * a + s.conj() * b;
            h[(k + 1, j)] = -s * a + c * b;
        }
        rots.push((c, s));
    }
    for (idx, (c, s)) in rots.into_iter().enumerate() {
        let k = lo + idx;
        // columns k, k+1 <- [col k, col k+1] Gᴴ
        let top = (k + 2).min(hi);
        for i in 0..top {
            let a = h[(i, k)];
            let b = h[(i, k + 1)];
            h[(i, k)] = a * c + b * s;
            h[(i, k + 1)] = -a * s.conj() + b * c.conj();
        }
    }
    for k in lo..hi {
        h[(k, k)] += mu;
    }
}

fn hessenberg(a: &CMatrix) -> CMatrix {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = ((k + 1)..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let mut v: Vec<Complex64> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        v[0] += phase * norm;
        let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vn == 0.0 {
            continue;
        }
        // H <- P H P, P = I - 2 v vᴴ / vn acting on rows/cols k+1..n
        for j in 0..n {
            let dot: Complex64 = ((k + 1)..n).map(|i| v[i - k - 1].conj() * h[(i, j)]).sum();
            let f = dot * (2.0 / vn);
            for i in (k + 1)..n {
                h[(i, j)] -= f * v[i - k - 1];
            }
        }
        for i in 0..n {
            let dot: Complex64 = ((k + 1)..n).map(|j| h[(i, j)] * v[j - k - 1]).sum();
            let f = dot * (2.0 / vn);
            for j in (k + 1)..n {
                h[(i, j)] -= f * v[j - k - 1].conj();
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    h
}

/// Unit eigenvector for an (approximate) eigenvalue by inverse iteration.
pub fn eigenvector(a: &CMatrix, lambda: Complex64) -> Vec<Complex64> {
    let n = a.rows();
    let scale = a.max_abs().max(1e-300);
    // a slight offset keeps the shifted matrix numerically invertible
    let shift = lambda + Complex64::new(scale * 1e-10, scale * 1e-10);
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] -= shift;
    }
    let mut x: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + 0.1 * i as f64, 0.05 * i as f64))
        .collect();
    for _ in 0..4 {
        let y = complex_solve(&m, &x, scale * 1e-300_f64.max(1e-16));
        let nrm = vec_norm(&y);
        if !(nrm.is_finite() && nrm > 0.0) {
            break;
        }
        x = y.into_iter().map(|v| v / nrm).collect();
    }
    x
}
