//! Small dense linear algebra: symmetric tridiagonal QL, Householder
//! tridiagonalization, Hermitian eigenvalues, semidefinite Cholesky and
//! Gram–Schmidt QR. Sizes in this crate stay below a few hundred, so
//! everything is plain `O(n³)` row-major code.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::HERMITIAN;

const MAX_QL_ITERATIONS: usize = 60;

/// Eigenvalues (and optionally the first component of each normalized
/// eigenvector) of a symmetric tridiagonal matrix by the implicit QL method.
///
/// `diag` has length `n`, `off` has length `n - 1` (`off[i]` couples rows `i`
/// and `i + 1`). Results are in the order the iteration leaves them, not
/// sorted.
pub fn tridiagonal_eigen(
    diag: &[f64],
    off: &[f64],
    first_components: bool,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let n = diag.len();
    if n == 0 {
        return Ok((Vec::new(), first_components.then(Vec::new)));
    }
    if off.len() + 1 != n {
        return Err(Error::Usage(format!(
            "tridiagonal matrix of size {n} needs {} off-diagonal entries, got {}",
            n - 1,
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut z = first_components.then(|| {
        let mut z = vec![0.0; n];
        z[0] = 1.0;
        z
    });

    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let scale = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * scale {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(Error::Numeric(format!(
                    "implicit QL did not converge for eigenvalue {l} of a {n}x{n} tridiagonal matrix"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_mut() {
                    let f = z[i + 1];
                    z[i + 1] = s * z[i] + c * f;
                    z[i] = c * z[i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok((d, z))
}

/// Reduces a real symmetric matrix (row-major, `n x n`) to tridiagonal form
/// by Householder reflections and returns `(diagonal, off_diagonal)`.
pub fn householder_tridiagonalize(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = a.to_vec();
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let norm = (k + 1..n).map(|i| a[i * n + k].powi(2)).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = -norm.copysign(a[(k + 1) * n + k]);
        v.iter_mut().for_each(|x| *x = 0.0);
        for i in k + 1..n {
            v[i] = a[i * n + k];
        }
        v[k + 1] -= alpha;
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= vnorm);
        // A <- H A H with H = I - 2 v vᵀ:
        // A - 2 v wᵀ - 2 w vᵀ + 4 (vᵀ w) v vᵀ, where w = A v.
        for i in 0..n {
            w[i] = (k + 1..n).map(|j| a[i * n + j] * v[j]).sum();
        }
        let vw: f64 = (k + 1..n).map(|i| v[i] * w[i]).sum();
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] += -2.0 * v[i] * w[j] - 2.0 * w[i] * v[j] + 4.0 * vw * v[i] * v[j];
            }
        }
    }
    let diag = (0..n).map(|i| a[i * n + i]).collect();
    let off = (0..n.saturating_sub(1)).map(|i| a[(i + 1) * n + i]).collect();
    (diag, off)
}

/// All eigenvalues of a real symmetric matrix, ascending.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let (d, e) = householder_tridiagonalize(a, n);
    let (mut values, _) = tridiagonal_eigen(&d, &e, false)?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// A square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), rows * cols);
        Self { rows, cols, data: values.iter().map(|&x| Complex64::new(x, 0.0)).collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self[(i, k)] * other[(k, j)]).sum()
        })
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|k| self[(i, k)] * v[k]).sum())
            .collect()
    }

    /// Largest entrywise deviation from hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// True when every entry has imaginary part below `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.data.iter().all(|z| z.im.abs() <= tol)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// A complex `n x n` Hermitian matrix `A + iB` is embedded as the real
/// symmetric `2n x 2n` matrix `[[A, -B], [B, A]]`, whose spectrum is that of
/// the original with every eigenvalue doubled; every second value is kept.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if m.rows() != m.cols() {
        return Err(Error::Usage(format!("matrix is {}x{}, not square", m.rows(), m.cols())));
    }
    let n = m.rows();
    let defect = m.hermitian_defect();
    if defect > HERMITIAN * m.max_abs().max(1.0) {
        return Err(Error::Usage(format!("matrix is not hermitian (defect {defect:e})")));
    }
    if m.is_real(0.0) {
        let a: Vec<f64> = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                0.5 * (m[(i, j)].re + m[(j, i)].re)
            })
            .collect();
        return symmetric_eigenvalues(&a, n);
    }
    let big = 2 * n;
    let mut a = vec![0.0; big * big];
    for i in 0..n {
        for j in 0..n {
            let z = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            a[i * big + j] = z.re;
            a[(i + n) * big + j + n] = z.re;
            a[i * big + j + n] = -z.im;
            a[(i + n) * big + j] = z.im;
        }
    }
    let values = symmetric_eigenvalues(&a, big)?;
    Ok(values.into_iter().step_by(2).collect())
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigen_hermitian(m: &ComplexMatrix) -> Result<f64> {
    hermitian_eigenvalues(m)?
        .first()
        .copied()
        .ok_or_else(|| Error::Usage("empty matrix has no eigenvalues".into()))
}

/// Outcome of a semidefinite Cholesky factorization.
#[derive(Debug, Clone)]
pub enum Cholesky {
    /// Lower-triangular factor `L` with `L Lᴴ` equal to the input; columns
    /// whose pivot fell inside the tolerance band are zero.
    Factor(ComplexMatrix),
    /// A pivot fell below `-tol`.
    NegativePivot { index: usize, pivot: f64 },
}

/// Cholesky factorization of a Hermitian positive semidefinite matrix.
/// Pivots in `[-tol, tol]` are treated as exact zeros, so singular PSD
/// matrices (e.g. a constant covariance) factor cleanly.
pub fn cholesky_semidefinite(a: &ComplexMatrix, tol: f64) -> Cholesky {
    let n = a.rows();
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let pivot = a[(j, j)].re - (0..j).map(|k| l[(j, k)].norm_sqr()).sum::<f64>();
        if pivot > tol {
            let root = pivot.sqrt();
            l[(j, j)] = Complex64::new(root, 0.0);
            for i in j + 1..n {
                let s: Complex64 = (0..j).map(|k| l[(i, k)] * l[(j, k)].conj()).sum();
                l[(i, j)] = (a[(i, j)] - s) / root;
            }
        } else if pivot < -tol {
            return Cholesky::NegativePivot { index: j, pivot };
        }
    }
    Cholesky::Factor(l)
}

/// Thin QR factorization by modified Gram–Schmidt. The returned `Q` has
/// orthonormal columns and the implied `R` has a positive real diagonal,
/// which is the phase convention that makes `Q` Haar distributed when the
/// input has i.i.d. Gaussian entries.
pub fn qr_positive(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (rows, cols) = (a.rows(), a.cols());
    let mut q = a.clone();
    for j in 0..cols {
        for k in 0..j {
            let proj: Complex64 = (0..rows).map(|i| q[(i, k)].conj() * q[(i, j)]).sum();
            for i in 0..rows {
                let qk = q[(i, k)];
                q[(i, j)] -= proj * qk;
            }
        }
        let norm = (0..rows).map(|i| q[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Numeric(format!("column {j} is linearly dependent")));
        }
        for i in 0..rows {
            q[(i, j)] /= norm;
        }
    }
    Ok(q)
}
