//! Small dense linear algebra: row-major matrices, Householder QR with
//! dependent-column detection, cyclic Jacobi for symmetric eigenproblems and
//! Cholesky factorisation.
//!
//! Everything here is sized for tens of rows and a handful of columns.

use std::fmt;

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row vectors. All rows must share one length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    /// Builds a matrix whose columns are the given slices.
    pub fn from_columns(columns: &[&[f64]]) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.len());
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::Shape("columns differ in length".into()));
        }
        let mut m = Matrix::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Largest absolute difference between `self` and its transpose.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

/// Relative column-norm threshold below which a column counts as dependent.
pub const DEPENDENCE_TOLERANCE: f64 = 1e-9;

/// Householder QR factorisation `A = QR` of a tall matrix.
///
/// Columns are processed left to right. A column whose remaining norm after
/// the previous reflections falls below `DEPENDENCE_TOLERANCE` times its
/// original norm is recorded as dependent and left out of `R`.
#[derive(Debug, Clone)]
pub struct HouseholderQr {
    rows: usize,
    // (v, tau) acting on rows k.. for the k-th reflector
    reflectors: Vec<(Vec<f64>, f64)>,
    r: Matrix,
    independent: Vec<usize>,
    dependent: Vec<usize>,
}

impl HouseholderQr {
    pub fn new(a: &Matrix) -> Self {
        let (m, n) = (a.rows(), a.cols());
        let mut work = a.clone();
        let original_norms: Vec<f64> = (0..n)
            .map(|j| (0..m).map(|i| a[(i, j)].powi(2)).sum::<f64>().sqrt())
            .collect();

        let mut reflectors = Vec::new();
        let mut independent = Vec::new();
        let mut dependent = Vec::new();
        let mut k = 0;

        for j in 0..n {
            if k == m {
                dependent.push(j);
                continue;
            }
            let norm = (k..m).map(|i| work[(i, j)].powi(2)).sum::<f64>().sqrt();
            if original_norms[j] == 0.0 || norm <= DEPENDENCE_TOLERANCE * original_norms[j] {
                dependent.push(j);
                continue;
            }
            let x0 = work[(k, j)];
            let alpha = if x0 >= 0.0 { -norm } else { norm };
            let mut v: Vec<f64> = (k..m).map(|i| work[(i, j)]).collect();
            v[0] -= alpha;
            let vtv: f64 = v.iter().map(|x| x * x).sum();
            let tau = 2.0 / vtv;
            for c in j..n {
                let dot: f64 = (k..m).map(|i| v[i - k] * work[(i, c)]).sum();
                let s = tau * dot;
                for i in k..m {
                    work[(i, c)] -= s * v[i - k];
                }
            }
            reflectors.push((v, tau));
            independent.push(j);
            k += 1;
        }

        let rank = independent.len();
        let mut r = Matrix::zeros(rank, rank);
        for (c, &col) in independent.iter().enumerate() {
            for i in 0..=c {
                r[(i, c)] = work[(i, col)];
            }
        }

        HouseholderQr {
            rows: m,
            reflectors,
            r,
            independent,
            dependent,
        }
    }

    pub fn rank(&self) -> usize {
        self.independent.len()
    }

    /// Original column indices kept in `R`, in order.
    pub fn independent_columns(&self) -> &[usize] {
        &self.independent
    }

    /// Original column indices rejected as linearly dependent.
    pub fn dependent_columns(&self) -> &[usize] {
        &self.dependent
    }

    pub fn r(&self) -> &Matrix {
        &self.r
    }

    /// Computes `Qᵀ y`.
    pub fn apply_qt(&self, y: &[f64]) -> Vec<f64> {
        let mut out = y.to_vec();
        for (k, (v, tau)) in self.reflectors.iter().enumerate() {
            let dot: f64 = v.iter().zip(&out[k..]).map(|(a, b)| a * b).sum();
            let s = tau * dot;
            for (o, vi) in out[k..].iter_mut().zip(v) {
                *o -= s * vi;
            }
        }
        out
    }

    /// Least-squares coefficients for the independent columns, in the order of
    /// `independent_columns`.
    pub fn solve(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows {
            return Err(Error::Shape(format!(
                "right-hand side has {} rows, expected {}",
                y.len(),
                self.rows
            )));
        }
        let qty = self.apply_qt(y);
        Ok(back_substitute(&self.r, &qty[..self.rank()]))
    }

    /// `R⁻¹` for the independent block.
    pub fn r_inverse(&self) -> Matrix {
        let n = self.rank();
        let mut inv = Matrix::zeros(n, n);
        for c in 0..n {
            let mut e = vec![0.0; n];
            e[c] = 1.0;
            let col = back_substitute(&self.r, &e);
            for i in 0..n {
                inv[(i, c)] = col[i];
            }
        }
        inv
    }

    /// `(AᵀA)⁻¹` restricted to the independent columns.
    pub fn gram_inverse(&self) -> Matrix {
        let rinv = self.r_inverse();
        rinv.matmul(&rinv.transpose())
            .expect("square factors always conform")
    }
}

/// Solves `R x = b` for upper-triangular `R`.
pub fn back_substitute(r: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = r.rows();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|j| r[(i, j)] * x[j]).sum();
        x[i] = (b[i] - s) / r[(i, i)];
    }
    x
}

/// Solves `Rᵀ x = b` for upper-triangular `R`.
pub fn forward_substitute_transposed(r: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = r.rows();
    let mut x = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|j| r[(j, i)] * x[j]).sum();
        x[i] = (b[i] - s) / r[(i, i)];
    }
    x
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors; column `j` pairs with `values[j]`.
    pub vectors: Matrix,
    pub sweeps: usize,
}

/// Symmetry tolerance accepted by [`eigen_symmetric`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;
const JACOBI_OFF_DIAGONAL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigenvalue algorithm.
///
/// Sweeps over every (p, q) pair applying a rotation that zeroes `a[p][q]`,
/// until the largest off-diagonal entry drops below 1e-12 (relative to the
/// matrix scale when that exceeds one).
pub fn eigen_symmetric(matrix: &Matrix) -> Result<SymmetricEigen> {
    if !matrix.is_square() {
        return Err(Error::Shape(format!(
            "expected a square matrix, got {}x{}",
            matrix.rows(),
            matrix.cols()
        )));
    }
    if matrix.asymmetry() > SYMMETRY_TOLERANCE {
        return Err(Error::Shape(format!(
            "matrix is not symmetric (max |a_ij - a_ji| = {:e})",
            matrix.asymmetry()
        )));
    }
    let n = matrix.rows();
    let mut a = matrix.clone();
    // symmetrise exactly so rotations see one value per pair
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = m;
            a[(j, i)] = m;
        }
    }
    let mut v = Matrix::identity(n);
    let scale = a.data.iter().map(|x| x.abs()).fold(1.0, f64::max);
    let threshold = JACOBI_OFF_DIAGONAL * scale;

    let mut sweeps = 0;
    loop {
        let off = max_off_diagonal(&a);
        if off < threshold {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::Numerical(format!(
                "Jacobi did not converge after {JACOBI_MAX_SWEEPS} sweeps (off-diagonal {off:e})"
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, dst)] = v[(i, src)];
        }
    }
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

fn max_off_diagonal(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max(a[(i, j)].abs());
        }
    }
    worst
}

// A' = Jᵀ A J with J the (p, q) Givens rotation; V' = V J.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Fails with a domain error when `a` is not positive definite.
    pub fn new(a: &Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Shape("Cholesky needs a square matrix".into()));
        }
        let n = a.rows();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let s: f64 = (0..j).map(|k| l[(j, k)].powi(2)).sum();
            let d = a[(j, j)] - s;
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::Domain(format!(
                    "matrix is not positive definite (pivot {j} = {d:e})"
                )));
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let s: f64 = (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum();
                l[(i, j)] = (a[(i, j)] - s) / djj;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn l(&self) -> &Matrix {
        &self.l
    }

    pub fn ln_determinant(&self) -> f64 {
        let n = self.l.rows();
        2.0 * (0..n).map(|i| self.l[(i, i)].ln()).sum::<f64>()
    }

    pub fn inverse(&self) -> Matrix {
        // L⁻¹ by forward substitution, then A⁻¹ = L⁻ᵀ L⁻¹
        let n = self.l.rows();
        let mut linv = Matrix::zeros(n, n);
        for c in 0..n {
            for i in c..n {
                let s: f64 = (c..i).map(|k| self.l[(i, k)] * linv[(k, c)]).sum();
                let rhs = if i == c { 1.0 } else { 0.0 };
                linv[(i, c)] = (rhs - s) / self.l[(i, i)];
            }
        }
        linv.transpose()
            .matmul(&linv)
            .expect("square factors always conform")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qr_solves_exact_system() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let qr = HouseholderQr::new(&a);
        let b = qr.solve(&[1.0, 3.0, 5.0]).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-12);
        assert!((b[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn qr_flags_dependent_column() {
        let a = Matrix::from_rows(&[
            vec![1.0, 2.0, 1.0],
            vec![2.0, 4.0, 0.0],
            vec![3.0, 6.0, 5.0],
            vec![4.0, 8.0, 2.0],
        ])
        .unwrap();
        let qr = HouseholderQr::new(&a);
        assert_eq!(qr.independent_columns(), &[0, 2]);
        assert_eq!(qr.dependent_columns(), &[1]);
    }

    #[test]
    fn gram_inverse_matches_direct_inverse() {
        let a = Matrix::from_rows(&[
            vec![1.0, 0.5],
            vec![2.0, -1.0],
            vec![0.0, 3.0],
            vec![1.5, 1.0],
        ])
        .unwrap();
        let qr = HouseholderQr::new(&a);
        let g = a.transpose().matmul(&a).unwrap();
        let inv = Cholesky::new(&g).unwrap().inverse();
        assert!(qr.gram_inverse().max_abs_diff(&inv) < 1e-12);
    }

    #[test]
    fn jacobi_identity() {
        let e = eigen_symmetric(&Matrix::identity(3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn jacobi_two_by_two_correlation() {
        let m = Matrix::from_rows(&[vec![1.0, 0.8], vec![0.8, 1.0]]).unwrap();
        let e = eigen_symmetric(&m).unwrap();
        assert!((e.values[0] - 1.8).abs() < 1e-12);
        assert!((e.values[1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn jacobi_rejects_asymmetric() {
        let m = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.4, 1.0]]).unwrap();
        assert!(matches!(eigen_symmetric(&m), Err(Error::Shape(_))));
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(Cholesky::new(&m).is_err());
    }

    #[test]
    fn cholesky_log_det() {
        let m = Matrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 3.0]]).unwrap();
        let c = Cholesky::new(&m).unwrap();
        assert!((c.ln_determinant() - 8.0_f64.ln()).abs() < 1e-14);
    }
}
