//! Compressed sparse row storage for complex matrices and direct solvers.
//!
//! Sparse factorisation is delegated to `faer`'s supernodal/simplicial LU
//! with a COLAMD fill-reducing ordering and row partial pivoting, run
//! single-threaded so repeated solves are bit-identical. A small generic dense
//! LU with partial pivoting covers tiny systems and serves as a test oracle.

use std::ops::{Add, Div, Mul, Neg, Sub};

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::lu::partial_pivoting::factor::PartialPivLuParams;
use faer::sparse::linalg::lu::{factorize_symbolic_lu, LuRef, NumericLu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, MatMut, Par, Spec};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("matrix is numerically singular")]
    SingularMatrix,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("sparse factorisation failed: {0}")]
    Backend(String),
}

pub type Result<T> = std::result::Result<T, SolveError>;

/// Square complex matrix in CSR form.
///
/// Column indices are strictly increasing within each row and no stored
/// value is exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

/// Coordinate-format accumulator; duplicates are summed in insertion order.
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    n: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl TripletBuilder {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        Self { n, entries: Vec::with_capacity(cap) }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Panics if `(i, j)` is out of range.
    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(i < self.n && j < self.n, "entry ({i}, {j}) outside {}x{}", self.n, self.n);
        self.entries.push((i, j, v));
    }

    pub fn build(mut self) -> ComplexSparseMatrix {
        // stable sort keeps per-entry summation order fixed
        self.entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(self.entries.len());
        let mut k = 0;
        while k < self.entries.len() {
            let (i, j, mut v) = self.entries[k];
            k += 1;
            while k < self.entries.len() && self.entries[k].0 == i && self.entries[k].1 == j {
                v += self.entries[k].2;
                k += 1;
            }
            if v != Complex64::new(0.0, 0.0) {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        ComplexSparseMatrix { n: self.n, row_ptr, col_idx, values }
    }
}

impl ComplexSparseMatrix {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![Complex64::new(1.0, 0.0); n],
        }
    }

    /// Panics unless `rows` is square.
    pub fn from_dense(rows: &[Vec<Complex64>]) -> Self {
        let n = rows.len();
        let mut b = TripletBuilder::new(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "dense input must be square");
            for (j, &v) in row.iter().enumerate() {
                b.add(i, j, v);
            }
        }
        b.build()
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let mut out = vec![vec![Complex64::new(0.0, 0.0); self.n]; self.n];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out[i][self.col_idx[k]] = self.values[k];
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(pos) => self.values[r.start + pos],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.n {
            return Err(SolveError::DimensionMismatch { expected: self.n, found: x.len() });
        }
        Ok((0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect())
    }

    /// `x^H A y`.
    pub fn form(&self, x: &[Complex64], y: &[Complex64]) -> Result<Complex64> {
        let ay = self.matvec(y)?;
        if x.len() != self.n {
            return Err(SolveError::DimensionMismatch { expected: self.n, found: x.len() });
        }
        Ok(x.iter().zip(&ay).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn transpose(&self) -> Self {
        let mut b = TripletBuilder::with_capacity(self.n, self.nnz());
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                b.add(j, i, v);
            }
        }
        b.build()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: Complex64, other: &Self) -> Result<Self> {
        if other.n != self.n {
            return Err(SolveError::DimensionMismatch { expected: self.n, found: other.n });
        }
        let mut b = TripletBuilder::with_capacity(self.n, self.nnz() + other.nnz());
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                b.add(i, j, v);
            }
            for (j, v) in other.row(i) {
                b.add(i, j, s * v);
            }
        }
        Ok(b.build())
    }

    /// Adds `block[a][b]` at `(idx[a], idx[b])`.
    pub fn add_dense_block(&self, idx: &[usize], block: &[Vec<Complex64>]) -> Self {
        let m = idx.len();
        let mut b = TripletBuilder::with_capacity(self.n, self.nnz() + m * m);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                b.add(i, j, v);
            }
        }
        for (a, row) in block.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                b.add(idx[a], idx[c], v);
            }
        }
        b.build()
    }

    fn to_csc(&self) -> (Vec<usize>, Vec<usize>, Vec<Complex64>) {
        let t = self.transpose();
        (t.row_ptr, t.col_idx, t.values)
    }
}

/// LU factors of a sparse matrix; reusable for many right-hand sides.
pub struct SparseLu {
    n: usize,
    symbolic: SymbolicLu<usize>,
    numeric: NumericLu<usize, Complex64>,
}

impl std::fmt::Debug for SparseLu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseLu").field("n", &self.n).finish_non_exhaustive()
    }
}

impl SparseLu {
    pub fn factorize(a: &ComplexSparseMatrix) -> Result<Self> {
        let n = a.n;
        let (col_ptr, row_idx, vals) = a.to_csc();
        let sym = SymbolicSparseColMatRef::new_checked(n, n, &col_ptr, None, &row_idx);
        let mat = SparseColMatRef::new(sym, &vals);
        let symbolic = factorize_symbolic_lu(sym, Default::default())
            .map_err(|e| SolveError::Backend(format!("{e:?}")))?;
        let mut numeric = NumericLu::<usize, Complex64>::new();
        let params: Spec<PartialPivLuParams, Complex64> = Default::default();
        let mut mem = MemBuffer::new(symbolic.factorize_numeric_lu_scratch::<Complex64>(Par::Seq, params));
        symbolic
            .factorize_numeric_lu(&mut numeric, mat, Par::Seq, MemStack::new(&mut mem), params)
            .map_err(|e| match e {
                faer::sparse::linalg::LuError::SymbolicSingular { .. } => SolveError::SingularMatrix,
                other => SolveError::Backend(format!("{other:?}")),
            })?;
        Ok(Self { n, symbolic, numeric })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        if b.len() != self.n {
            return Err(SolveError::DimensionMismatch { expected: self.n, found: b.len() });
        }
        let mut x = b.to_vec();
        let lu = LuRef::new_unchecked(&self.symbolic, &self.numeric);
        let mut mem = MemBuffer::new(self.symbolic.solve_in_place_scratch::<Complex64>(1, Par::Seq));
        let rhs = MatMut::from_column_major_slice_mut(&mut x, self.n, 1);
        lu.solve_in_place_with_conj(Conj::No, rhs, Par::Seq, MemStack::new(&mut mem));
        if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(SolveError::SingularMatrix);
        }
        Ok(x)
    }
}

/// Relative residual `|Ax - b| / (|A|_F |x| + |b|)`.
pub fn relative_residual(a: &ComplexSparseMatrix, x: &[Complex64], b: &[Complex64]) -> Result<f64> {
    let ax = a.matvec(x)?;
    if b.len() != a.n {
        return Err(SolveError::DimensionMismatch { expected: a.n, found: b.len() });
    }
    let r = norm2(&ax.iter().zip(b).map(|(p, q)| p - q).collect::<Vec<_>>());
    let denom = a.frobenius_norm() * norm2(x) + norm2(b);
    Ok(if denom == 0.0 { 0.0 } else { r / denom })
}

/// Solves `A x = b`.
///
/// A solution whose relative residual exceeds `1e-6` is rejected as
/// singular; the factorisation itself never drops pivots.
pub fn solve_sparse(a: &ComplexSparseMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    if b.len() != a.n {
        return Err(SolveError::DimensionMismatch { expected: a.n, found: b.len() });
    }
    if a.n == 0 {
        return Ok(Vec::new());
    }
    let lu = SparseLu::factorize(a)?;
    let x = lu.solve(b)?;
    if relative_residual(a, &x, b)? > 1e-6 {
        return Err(SolveError::SingularMatrix);
    }
    Ok(x)
}

pub fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Scalar field for the dense LU.
pub trait Field:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn modulus(self) -> f64;
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Field for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Dense LU with row partial pivoting, row-major storage.
#[derive(Debug, Clone)]
pub struct DenseLu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
    det_sign_odd: bool,
}

impl<T: Field> DenseLu<T> {
    /// Fails when a pivot falls below `1e-14 * max|a_ij|`.
    pub fn factorize(a: &[Vec<T>]) -> Result<Self> {
        let n = a.len();
        let mut lu = Vec::with_capacity(n * n);
        for row in a {
            if row.len() != n {
                return Err(SolveError::DimensionMismatch { expected: n, found: row.len() });
            }
            lu.extend_from_slice(row);
        }
        let amax = lu.iter().map(|v| v.modulus()).fold(0.0, f64::max);
        let tol = 1e-14 * amax;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd = false;
        for c in 0..n {
            let (p, pmax) = (c..n)
                .map(|r| (r, lu[r * n + c].modulus()))
                .fold((c, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if !(pmax > tol) {
                return Err(SolveError::SingularMatrix);
            }
            if p != c {
                for j in 0..n {
                    lu.swap(p * n + j, c * n + j);
                }
                perm.swap(p, c);
                odd = !odd;
            }
            let piv = lu[c * n + c];
            for r in c + 1..n {
                let f = lu[r * n + c] / piv;
                lu[r * n + c] = f;
                for j in c + 1..n {
                    let u = lu[c * n + j];
                    lu[r * n + j] = lu[r * n + j] - f * u;
                }
            }
        }
        Ok(Self { n, lu, perm, det_sign_odd: odd })
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.n;
        if b.len() != n {
            return Err(SolveError::DimensionMismatch { expected: n, found: b.len() });
        }
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s = s - self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s = s - self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        Ok(x)
    }

    pub fn determinant(&self) -> T {
        let mut d = T::one();
        for i in 0..self.n {
            d = d * self.lu[i * self.n + i];
        }
        if self.det_sign_odd {
            -d
        } else {
            d
        }
    }
}

pub fn solve_dense<T: Field>(a: &[Vec<T>], b: &[T]) -> Result<Vec<T>> {
    DenseLu::factorize(a)?.solve(b)
}
