//! Dense complex linear algebra for small operators.
//!
//! Two conventions hold across the crate:
//!
//! * [`ComplexMatrix`] stores its entries row-major.
//! * Vectorization stacks columns, so that `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)` and
//!   the entry `ρ[i, j]` lives at index `i + j * D` of the vector.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use num_complex::Complex64 as C64;

/// Hermiticity tolerance carried by every [`DensityMatrix`].
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Unit-trace tolerance carried by every [`DensityMatrix`].
pub const TRACE_TOL: f64 = 1e-9;
/// Default positivity tolerance: smallest admissible eigenvalue is `-POSITIVITY_TOL`.
pub const POSITIVITY_TOL: f64 = 1e-9;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("{op}: dimension mismatch ({left:?} vs {right:?})")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("expected {expected} entries for a {rows}x{cols} matrix, got {got}")]
    EntryCount {
        rows: usize,
        cols: usize,
        expected: usize,
        got: usize,
    },
    #[error("matrices must have at least one row and one column")]
    Empty,
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("{op}: matrix is not square ({rows}x{cols})")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },
    #[error("vector length {0} is not a perfect square")]
    NotPerfectSquare(usize),
    #[error("singular matrix in linear solve")]
    Singular,
    #[error("subsystem dimensions {dims:?} do not multiply to {dim}")]
    BadDims { dims: Vec<usize>, dim: usize },
    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystems(String),
    #[error("trace {trace} differs from 1 by more than {tol:e}")]
    NotNormalized { trace: f64, tol: f64 },
    #[error("minimum eigenvalue {min_eigenvalue:e} is below -{tol:e}")]
    NotPositive { min_eigenvalue: f64, tol: f64 },
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
}

pub type Result<T, E = LinalgError> = std::result::Result<T, E>;

/// Dense complex matrix with explicit dimensions and row-major storage.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// # Panics
    /// If either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries, checking the length and that
    /// every entry is finite.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::Empty);
        }
        if data.len() != rows * cols {
            return Err(LinalgError::EntryCount {
                rows,
                cols,
                expected: rows * cols,
                got: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(LinalgError::NonFinite {
                row: k / cols,
                col: k % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Real-valued convenience constructor, row-major.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    /// `|a⟩⟨b|` for two column vectors.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm: largest absolute column sum.
    pub fn one_norm(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max |a_ij - conj(a_ji)|`; infinite for non-square input.
    pub fn hermitian_asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(A + A†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// Largest entrywise distance to another matrix of the same shape.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff: shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "matmul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        let n = rhs.cols;
        for i in 0..self.rows {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Matrix–vector product.
    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "matvec: length mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (br, bc) = other.shape();
        Self::from_fn(self.rows * br, self.cols * bc, |r, c| {
            self[(r / br, c / bc)] * other[(r % br, c % bc)]
        })
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        Ok(&self.checked_mul(other)? - &other.checked_mul(self)?)
    }

    /// Solves `self · X = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                op: "solve",
                rows: self.rows,
                cols: self.cols,
            });
        }
        if rhs.rows != self.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "solve",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let n = self.rows;
        let m = rhs.cols;
        let mut a = self.data.clone();
        let mut x = rhs.data.clone();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&p, &q| a[p * n + col].norm().total_cmp(&a[q * n + col].norm()))
                .expect("non-empty pivot range");
            if a[pivot * n + col].norm() <= scale * f64::EPSILON * n as f64 * 1e-3 {
                return Err(LinalgError::Singular);
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                }
                for j in 0..m {
                    x.swap(col * m + j, pivot * m + j);
                }
            }
            let inv = ONE / a[col * n + col];
            for r in col + 1..n {
                let factor = a[r * n + col] * inv;
                if factor == ZERO {
                    continue;
                }
                a[r * n + col] = ZERO;
                for j in col + 1..n {
                    let v = a[col * n + j];
                    a[r * n + j] -= factor * v;
                }
                for j in 0..m {
                    let v = x[col * m + j];
                    x[r * m + j] -= factor * v;
                }
            }
        }
        for col in (0..n).rev() {
            let inv = ONE / a[col * n + col];
            for j in 0..m {
                let mut acc = x[col * m + j];
                for k in col + 1..n {
                    acc -= a[col * n + k] * x[k * m + j];
                }
                x[col * m + j] = acc * inv;
            }
        }
        Ok(Self { rows: n, cols: m, data: x })
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of range");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of range");
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "add: shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.shape(), rhs.shape(), "add: shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "sub: shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.map(|z| -z)
    }
}

/// Panics on inner-dimension mismatch; use [`ComplexMatrix::checked_mul`] otherwise.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_mul(rhs).expect("matmul: inner dimension mismatch")
    }
}

impl Mul<C64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, s: C64) -> ComplexMatrix {
        self.scale(s)
    }
}

impl Mul<f64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, s: f64) -> ComplexMatrix {
        self.scale(C64::new(s, 0.0))
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    a.dagger()
}

/// Spectrum of a Hermitian matrix: ascending eigenvalues and the matching
/// orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// Eigendecomposition of a Hermitian matrix (asymmetry at most [`HERMITIAN_TOL`]).
pub fn herm_eig(a: &ComplexMatrix) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            op: "herm_eig",
            rows: a.rows,
            cols: a.cols,
        });
    }
    let asymmetry = a.hermitian_asymmetry();
    if asymmetry > HERMITIAN_TOL {
        return Err(LinalgError::NotHermitian { asymmetry });
    }
    herm_eig_unchecked(&a.hermitian_part())
}

fn herm_eig_unchecked(a: &ComplexMatrix) -> Result<HermitianEigen> {
    let n = a.rows;
    let eig = nalgebra::SymmetricEigen::try_new(a.to_nalgebra(), f64::EPSILON, 0)
        .ok_or(LinalgError::NoConvergence("hermitian eigensolver"))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn herm_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(herm_eig(a)?.values)
}

/// Singular values in ascending order with the matching right singular vectors
/// (columns of `V` in `A = U Σ V†`), when requested.
#[derive(Clone, Debug)]
pub struct AscendingSvd {
    pub values: Vec<f64>,
    pub right_vectors: Option<ComplexMatrix>,
}

pub fn svd_ascending(a: &ComplexMatrix, want_vectors: bool) -> Result<AscendingSvd> {
    let svd = nalgebra::SVD::try_new(a.to_nalgebra(), false, want_vectors, f64::EPSILON, 0)
        .ok_or(LinalgError::NoConvergence("singular value decomposition"))?;
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&p, &q| svd.singular_values[p].total_cmp(&svd.singular_values[q]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let right_vectors = svd.v_t.as_ref().map(|v_t| {
        ComplexMatrix::from_fn(v_t.ncols(), k, |i, j| v_t[(order[j], i)].conj())
    });
    Ok(AscendingSvd {
        values,
        right_vectors,
    })
}

// Padé approximant degrees and the 1-norm bounds up to which each one meets
// double-precision backward error (Higham 2005).
#[allow(clippy::excessive_precision)]
const PADE_THETA: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
    (13, 5.371920351148152e0),
];

fn pade_coefficients(degree: usize) -> &'static [f64] {
    match degree {
        3 => &[120.0, 60.0, 12.0, 1.0],
        5 => &[30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0],
        7 => &[17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0],
        9 => &[
            17643225600.0,
            8821612800.0,
            2075673600.0,
            302702400.0,
            30270240.0,
            2162160.0,
            110880.0,
            3960.0,
            90.0,
            1.0,
        ],
        13 => &[
            64764752532480000.0,
            32382376266240000.0,
            7771770303897600.0,
            1187353796428800.0,
            129060195264000.0,
            10559470521600.0,
            670442572800.0,
            33522128640.0,
            1323241920.0,
            40840800.0,
            960960.0,
            16380.0,
            182.0,
            1.0,
        ],
        _ => unreachable!("unsupported Padé degree {degree}"),
    }
}

fn lin_comb(terms: &[(f64, &ComplexMatrix)]) -> ComplexMatrix {
    let (rows, cols) = terms[0].1.shape();
    let mut out = ComplexMatrix::zeros(rows, cols);
    for &(c, m) in terms {
        for (o, &z) in out.data.iter_mut().zip(&m.data) {
            *o += z * c;
        }
    }
    out
}

/// Matrix exponential by scaling and squaring around a diagonal Padé core.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            op: "expm",
            rows: a.rows,
            cols: a.cols,
        });
    }
    let n = a.rows;
    let ident = ComplexMatrix::identity(n);
    let norm = a.one_norm();
    if !norm.is_finite() {
        return Err(LinalgError::NonFinite { row: 0, col: 0 });
    }

    for &(degree, theta) in &PADE_THETA[..4] {
        if norm <= theta {
            let b = pade_coefficients(degree);
            let a2 = a * a;
            // Even powers A^0, A^2, A^4, ... up to A^(degree-1).
            let mut powers = vec![ident.clone(), a2.clone()];
            while powers.len() < degree.div_ceil(2) {
                let next = powers.last().unwrap() * &a2;
                powers.push(next);
            }
            let odd: Vec<(f64, &ComplexMatrix)> =
                powers.iter().enumerate().map(|(k, p)| (b[2 * k + 1], p)).collect();
            let even: Vec<(f64, &ComplexMatrix)> =
                powers.iter().enumerate().map(|(k, p)| (b[2 * k], p)).collect();
            let u = a * &lin_comb(&odd);
            let v = lin_comb(&even);
            return (&v - &u).solve(&(&v + &u));
        }
    }

    let theta13 = PADE_THETA[4].1;
    let squarings = ((norm / theta13).log2().ceil()).max(0.0) as i32;
    let scaled = a * 2f64.powi(-squarings);
    let b = pade_coefficients(13);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * &lin_comb(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)]);
    let u_tail = lin_comb(&[(b[7], &a6), (b[5], &a4), (b[3], &a2), (b[1], &ident)]);
    let u = &scaled * &(&u_inner + &u_tail);
    let v_inner = &a6 * &lin_comb(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)]);
    let v_tail = lin_comb(&[(b[6], &a6), (b[4], &a4), (b[2], &a2), (b[0], &ident)]);
    let v = &v_inner + &v_tail;
    let mut r = (&v - &u).solve(&(&v + &u))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if let Some(k) = r.data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(LinalgError::NonFinite {
            row: k / n,
            col: k % n,
        });
    }
    Ok(r)
}

/// Column-stacking vectorization: entry `(i, j)` goes to index `i + j * rows`.
pub fn vectorize(m: &ComplexMatrix) -> Vec<C64> {
    let mut v = Vec::with_capacity(m.rows * m.cols);
    for j in 0..m.cols {
        for i in 0..m.rows {
            v.push(m[(i, j)]);
        }
    }
    v
}

/// Inverse of [`vectorize`] for square matrices.
pub fn devectorize(v: &[C64]) -> Result<ComplexMatrix> {
    let dim = (v.len() as f64).sqrt().round() as usize;
    if dim == 0 || dim * dim != v.len() {
        return Err(LinalgError::NotPerfectSquare(v.len()));
    }
    ComplexMatrix::from_vec(dim, dim, (0..dim * dim).map(|k| v[(k % dim) * dim + k / dim]).collect())
}

/// A quantum state on a tensor product of subsystems.
///
/// Construction checks Hermiticity ([`HERMITIAN_TOL`]), unit trace
/// ([`TRACE_TOL`]) and positivity (smallest eigenvalue at least
/// `-POSITIVITY_TOL`, or a caller-supplied tolerance).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateDump", into = "StateDump")]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        Self::with_positivity_tolerance(matrix, dims, POSITIVITY_TOL)
    }

    pub fn with_positivity_tolerance(
        matrix: ComplexMatrix,
        dims: Vec<usize>,
        positivity_tol: f64,
    ) -> Result<Self> {
        let state = Self::structural(matrix, dims)?;
        let min_eigenvalue = state.min_eigenvalue();
        if min_eigenvalue < -positivity_tol {
            return Err(LinalgError::NotPositive {
                min_eigenvalue,
                tol: positivity_tol,
            });
        }
        Ok(state)
    }

    /// Shape, Hermiticity and trace checks only.
    pub(crate) fn structural(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(LinalgError::NotSquare {
                op: "density matrix",
                rows: matrix.rows,
                cols: matrix.cols,
            });
        }
        if dims.is_empty() || dims.contains(&0) || dims.iter().product::<usize>() != matrix.rows {
            return Err(LinalgError::BadDims {
                dim: matrix.rows,
                dims,
            });
        }
        let asymmetry = matrix.hermitian_asymmetry();
        if asymmetry > HERMITIAN_TOL {
            return Err(LinalgError::NotHermitian { asymmetry });
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(LinalgError::NotNormalized {
                trace,
                tol: TRACE_TOL,
            });
        }
        Ok(Self { matrix, dims })
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) state vector.
    pub fn pure(state: &[C64], dims: Vec<usize>) -> Result<Self> {
        let norm = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(LinalgError::NotNormalized {
                trace: norm * norm,
                tol: TRACE_TOL,
            });
        }
        let psi: Vec<C64> = state.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&psi, &psi), dims)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        let m = ComplexMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0));
        Self { matrix: m, dims }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        // Tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ.
        self.matrix.frobenius_norm().powi(2)
    }

    /// `Tr(ρ · op)`.
    pub fn expectation(&self, op: &ComplexMatrix) -> C64 {
        (&self.matrix * op).trace()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        herm_eig_unchecked(&self.matrix.hermitian_part())
            .map(|e| e.values)
            .unwrap_or_else(|_| vec![f64::NAN; self.dim()])
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self {
            matrix: self.matrix.kron(&other.matrix),
            dims,
        }
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        partial_trace(self, keep)
    }
}

/// Reduced state on the subsystems in `keep`, listed in their original order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.dims.len();
    if keep.is_empty() {
        return Err(LinalgError::InvalidSubsystems("keep set is empty".into()));
    }
    if let Some(&bad) = keep.iter().find(|&&k| k >= n) {
        return Err(LinalgError::InvalidSubsystems(format!(
            "index {bad} out of range for {n} subsystems"
        )));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() {
        return Err(LinalgError::InvalidSubsystems("duplicate index in keep set".into()));
    }
    let traced: Vec<usize> = (0..n).filter(|k| !kept.contains(k)).collect();

    let dims = &rho.dims;
    // Row-major strides of the full index.
    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let kept_dims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let d_kept: usize = kept_dims.iter().product();
    let d_traced: usize = traced_dims.iter().product();

    // Offsets into the full index contributed by each kept / traced multi-index.
    let offsets = |subset: &[usize], sub_dims: &[usize], total: usize| -> Vec<usize> {
        (0..total)
            .map(|mut flat| {
                let mut off = 0;
                for (pos, &k) in subset.iter().enumerate().rev() {
                    let d = sub_dims[pos];
                    off += (flat % d) * strides[k];
                    flat /= d;
                }
                off
            })
            .collect()
    };
    let kept_off = offsets(&kept, &kept_dims, d_kept);
    let traced_off = offsets(&traced, &traced_dims, d_traced);

    let mut out = ComplexMatrix::zeros(d_kept, d_kept);
    for (r, &ro) in kept_off.iter().enumerate() {
        for (c, &co) in kept_off.iter().enumerate() {
            out[(r, c)] = traced_off
                .iter()
                .map(|&t| rho.matrix[(ro + t, co + t)])
                .sum();
        }
    }
    Ok(DensityMatrix {
        matrix: out,
        dims: kept_dims,
    })
}

/// `½ Σ |λ_k(ρ − σ)|`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(LinalgError::DimensionMismatch {
            op: "trace_distance",
            left: rho.matrix.shape(),
            right: sigma.matrix.shape(),
        });
    }
    let diff = &rho.matrix - &sigma.matrix;
    let values = herm_eig(&diff)?.values;
    Ok(0.5 * values.iter().map(|x| x.abs()).sum::<f64>())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct StateDump {
    dims: Vec<usize>,
    entries: Vec<[f64; 2]>,
}

impl From<DensityMatrix> for StateDump {
    fn from(rho: DensityMatrix) -> Self {
        Self {
            entries: rho.matrix.data.iter().map(|z| [z.re, z.im]).collect(),
            dims: rho.dims,
        }
    }
}

impl TryFrom<StateDump> for DensityMatrix {
    type Error = LinalgError;

    fn try_from(dump: StateDump) -> Result<Self> {
        let d: usize = dump.dims.iter().product();
        let data = dump.entries.iter().map(|&[re, im]| C64::new(re, im)).collect();
        DensityMatrix::new(ComplexMatrix::from_vec(d.max(1), d.max(1), data)?, dump.dims)
    }
}
