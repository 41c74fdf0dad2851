//! Dense matrices over the shipped scalar backends, and the star-rings
//! they form.

mod factor;
mod scalar;

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use factor::{inverse, mp_inverse, rank_factorization, rref, RankFactorization};
pub use scalar::{ComplexFloat, GaussianRational, Scalar};

use crate::ring::{Comparison, RandomElement, StarOps, StarRing};

/// Default float tolerance for element equality.
pub const DEFAULT_RING_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Involution {
    ConjugateTranspose,
    /// Plain transpose; only allowed on real matrices.
    Transpose,
}

impl Involution {
    pub fn is_transpose(self) -> bool {
        self == Involution::Transpose
    }

    pub fn name(self) -> &'static str {
        match self {
            Involution::ConjugateTranspose => "conjugate_transpose",
            Involution::Transpose => "transpose",
        }
    }
}

impl std::str::FromStr for Involution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [Involution::ConjugateTranspose, Involution::Transpose]
            .into_iter()
            .find(|i| i.name() == s)
            .ok_or_else(|| format!("unknown involution {s:?} (expected conjugate_transpose or transpose)"))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("involution mismatch: {0:?} vs {1:?}")]
    InvolutionMismatch(Involution, Involution),
    #[error("row {row} has {found} entries, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("entry count {found} does not match {rows}x{cols}")]
    EntryCount { rows: usize, cols: usize, found: usize },
    #[error("entry ({0}, {1}) is not finite")]
    NonFinite(usize, usize),
    #[error("transpose involution requires real entries; entry ({0}, {1}) is complex")]
    NonRealTranspose(usize, usize),
    #[error("matrix is not MP-invertible")]
    NotMpInvertible,
}

/// Row-major dense matrix tagged with its involution.
#[derive(Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
    involution: Involution,
}

impl<S: Scalar> Matrix<S> {
    pub fn new(rows: usize, cols: usize, data: Vec<S>, involution: Involution) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::EntryCount { rows, cols, found: data.len() });
        }
        for (k, x) in data.iter().enumerate() {
            let (i, j) = (k / cols.max(1), k % cols.max(1));
            if !x.is_finite() {
                return Err(MatrixError::NonFinite(i, j));
            }
            if involution.is_transpose() && !x.is_real() {
                return Err(MatrixError::NonRealTranspose(i, j));
            }
        }
        Ok(Self { rows, cols, data, involution })
    }

    pub fn from_rows(rows: Vec<Vec<S>>, involution: Involution) -> Result<Self, MatrixError> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n_cols {
                return Err(MatrixError::Ragged { row: i, expected: n_cols, found: row.len() });
            }
            data.extend(row);
        }
        Self::new(n_rows, n_cols, data, involution)
    }

    pub fn zeros(rows: usize, cols: usize, involution: Involution) -> Self {
        Self { rows, cols, data: vec![S::zero(); rows * cols], involution }
    }

    pub fn identity(n: usize, involution: Involution) -> Self {
        let mut m = Self::zeros(n, n, involution);
        for i in 0..n {
            m.data[i * n + i] = S::one();
        }
        m
    }

    /// Square diagonal matrix. Panics on complex entries under transpose.
    pub fn diag(entries: &[S], involution: Involution) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n, involution);
        for (i, x) in entries.iter().enumerate() {
            assert!(!involution.is_transpose() || x.is_real(), "complex entry under transpose");
            m.data[i * n + i] = x.clone();
        }
        m
    }

    /// 1×1 matrix.
    pub fn scalar(x: S, involution: Involution) -> Result<Self, MatrixError> {
        Self::new(1, 1, vec![x], involution)
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

    pub fn involution(&self) -> Involution {
        self.involution
    }

    pub fn entries(&self) -> &[S] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    fn same_involution(&self, other: &Self) -> Result<(), MatrixError> {
        if self.involution != other.involution {
            return Err(MatrixError::InvolutionMismatch(self.involution, other.involution));
        }
        Ok(())
    }

    fn same_shape(&self, other: &Self, op: &'static str) -> Result<(), MatrixError> {
        self.same_involution(other)?;
        if self.shape() != other.shape() {
            return Err(MatrixError::DimensionMismatch { op, left: self.shape(), right: other.shape() });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Self {
        let data = self.data.iter().zip(&other.data).map(|(x, y)| f(x, y)).collect();
        Self { rows: self.rows, cols: self.cols, data, involution: self.involution }
    }

    fn map_entries(&self, f: impl Fn(&S) -> S) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect(), involution: self.involution }
    }

    pub fn add(&self, other: &Self) -> Result<Self, MatrixError> {
        self.same_shape(other, "add")?;
        Ok(self.zip_with(other, S::plus))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, MatrixError> {
        self.same_shape(other, "sub")?;
        Ok(self.zip_with(other, S::minus))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MatrixError> {
        self.same_involution(other)?;
        if self.cols != other.rows {
            return Err(MatrixError::DimensionMismatch { op: "mul", left: self.shape(), right: other.shape() });
        }
        let (n, m, p) = (self.rows, self.cols, other.cols);
        let mut data = Vec::with_capacity(n * p);
        for i in 0..n {
            for j in 0..p {
                let mut acc = S::zero();
                for k in 0..m {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.plus(&a.times(b));
                    }
                }
                data.push(acc);
            }
        }
        Ok(Self { rows: n, cols: p, data, involution: self.involution })
    }

    pub fn neg(&self) -> Self {
        self.map_entries(S::negated)
    }

    /// Conjugate transpose or plain transpose, per the involution tag.
    pub fn star(&self) -> Self {
        let conj = !self.involution.is_transpose();
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                let x = self.get(i, j);
                data.push(if conj { x.conj() } else { x.clone() });
            }
        }
        Self { rows: self.cols, cols: self.rows, data, involution: self.involution }
    }

    pub fn half(&self) -> Self {
        self.map_entries(S::halved)
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map_entries(|x| x.times(s))
    }

    /// Sub-matrix of `rows × cols` starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Result<Self, MatrixError> {
        if r0 + rows > self.rows || c0 + cols > self.cols {
            return Err(MatrixError::DimensionMismatch {
                op: "block",
                left: self.shape(),
                right: (r0 + rows, c0 + cols),
            });
        }
        let mut data = Vec::with_capacity(rows * cols);
        for i in r0..r0 + rows {
            data.extend_from_slice(&self.data[i * self.cols + c0..i * self.cols + c0 + cols]);
        }
        Ok(Self { rows, cols, data, involution: self.involution })
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) -> Result<(), MatrixError> {
        self.same_involution(block)?;
        if r0 + block.rows > self.rows || c0 + block.cols > self.cols {
            return Err(MatrixError::DimensionMismatch {
                op: "set_block",
                left: self.shape(),
                right: (r0 + block.rows, c0 + block.cols),
            });
        }
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.data[(r0 + i) * self.cols + c0 + j] = block.get(i, j).clone();
            }
        }
        Ok(())
    }

    /// Columns at the given indices, in order.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for i in 0..self.rows {
            for &j in idx {
                data.push(self.get(i, j).clone());
            }
        }
        Self { rows: self.rows, cols: idx.len(), data, involution: self.involution }
    }

    /// First `k` rows.
    pub fn top_rows(&self, k: usize) -> Self {
        Self { rows: k, cols: self.cols, data: self.data[..k * self.cols].to_vec(), involution: self.involution }
    }

    /// Relative max-abs difference `max|a−b| / (1 + max(|a|, |b|))`.
    pub fn relative_residual(&self, other: &Self) -> Result<f64, MatrixError> {
        self.same_shape(other, "compare")?;
        let diff = self.data.iter().zip(&other.data).map(|(x, y)| x.minus(y).magnitude()).fold(0.0, f64::max);
        Ok(diff / (1.0 + self.max_abs().max(other.max_abs())))
    }

    /// Exact equality on the exact backend; relative residual against
    /// `tol` on floats.
    pub fn compare(&self, other: &Self, tol: f64) -> Result<Comparison, MatrixError> {
        let residual = self.relative_residual(other)?;
        if S::EXACT {
            Ok(Comparison::exact(self.data == other.data, residual))
        } else {
            Ok(Comparison::from_residual(residual, tol))
        }
    }
}

impl Matrix<GaussianRational> {
    pub fn to_float(&self) -> Matrix<ComplexFloat> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(GaussianRational::to_complex64).collect(),
            involution: self.involution,
        }
    }

    /// Real integer matrix; panics on ragged rows.
    pub fn from_ints(rows: &[&[i64]], involution: Involution) -> Self {
        let rows = rows.iter().map(|r| r.iter().map(|&x| GaussianRational::from_i64(x)).collect()).collect();
        Self::from_rows(rows, involution).expect("rectangular integer rows")
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;

    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S: fmt::Debug> fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{}x{}{{", self.rows, self.cols)?;
        for (k, x) in self.data.iter().enumerate() {
            match k {
                0 => {}
                _ if k % self.cols == 0 => write!(f, "; ")?,
                _ => write!(f, ", ")?,
            }
            write!(f, "{x:?}")?;
        }
        write!(f, "}}")
    }
}

impl<S: Scalar> fmt::Display for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<Vec<String>> =
            (0..self.rows).map(|i| self.row(i).iter().map(ToString::to_string).collect()).collect();
        let width = cells.iter().flatten().map(String::len).max().unwrap_or(0);
        for row in &cells {
            write!(f, "[")?;
            for (j, c) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{c:>width$}")?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// `mat_equals`: shape-checked comparison with a float tolerance.
pub fn mat_equals<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>, tol: f64) -> Result<bool, MatrixError> {
    Ok(a.compare(b, tol)?.holds())
}

/// Penrose check on matrices; errors on incompatible shapes.
pub fn is_mp_inverse_matrix<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>, tol: f64) -> Result<bool, MatrixError> {
    if a.rows != b.cols || a.cols != b.rows {
        return Err(MatrixError::DimensionMismatch { op: "is_mp_inverse", left: a.shape(), right: b.shape() });
    }
    a.same_involution(b)?;
    Ok(crate::ring::is_mp_inverse(&RectOps::<S>::new(a.involution, tol), a, b))
}

/// The ring of `order × order` matrices.
#[derive(Clone, Debug)]
pub struct MatrixRing<S> {
    order: usize,
    involution: Involution,
    tol: f64,
    _scalar: std::marker::PhantomData<S>,
}

impl<S: Scalar> MatrixRing<S> {
    pub fn new(order: usize, involution: Involution) -> Self {
        Self::with_tol(order, involution, DEFAULT_RING_TOL)
    }

    pub fn with_tol(order: usize, involution: Involution, tol: f64) -> Self {
        Self { order, involution, tol, _scalar: std::marker::PhantomData }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn involution(&self) -> Involution {
        self.involution
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Checks that `m` is an element of this ring.
    pub fn check_member(&self, m: &Matrix<S>) -> Result<(), MatrixError> {
        if m.involution != self.involution {
            return Err(MatrixError::InvolutionMismatch(self.involution, m.involution));
        }
        if m.shape() != (self.order, self.order) {
            return Err(MatrixError::DimensionMismatch {
                op: "ring membership",
                left: (self.order, self.order),
                right: m.shape(),
            });
        }
        Ok(())
    }
}

const MEMBER: &str = "operands must be elements of the ring";

impl<S: Scalar> StarOps for MatrixRing<S> {
    type Elem = Matrix<S>;

    fn add(&self, a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
        a.add(b).expect(MEMBER)
    }

    fn sub(&self, a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
        a.sub(b).expect(MEMBER)
    }

    fn neg(&self, a: &Matrix<S>) -> Matrix<S> {
        a.neg()
    }

    fn mul(&self, a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
        a.mul(b).expect(MEMBER)
    }

    fn star(&self, a: &Matrix<S>) -> Matrix<S> {
        a.star()
    }

    fn half_of(&self, a: &Matrix<S>) -> Matrix<S> {
        a.half()
    }

    fn compare(&self, a: &Matrix<S>, b: &Matrix<S>) -> Comparison {
        a.compare(b, self.tol).expect(MEMBER)
    }
}

impl<S: Scalar> StarRing for MatrixRing<S> {
    fn zero(&self) -> Matrix<S> {
        Matrix::zeros(self.order, self.order, self.involution)
    }

    fn one(&self) -> Matrix<S> {
        Matrix::identity(self.order, self.involution)
    }

    fn mp_inverse(&self, a: &Matrix<S>) -> Option<Matrix<S>> {
        mp_inverse(a).ok()
    }

    fn check_member(&self, a: &Matrix<S>) -> Result<(), String> {
        MatrixRing::check_member(self, a).map_err(|e| e.to_string())
    }
}

/// Matrix with entries from [`Scalar::sample`]; real entries under the transpose
/// involution.
pub fn random_matrix<S: Scalar>(rows: usize, cols: usize, involution: Involution, rng: &mut dyn rand::RngCore) -> Matrix<S> {
    let data = (0..rows * cols).map(|_| S::sample(rng, involution.is_transpose())).collect();
    Matrix { rows, cols, data, involution }
}

impl<S: Scalar> RandomElement for MatrixRing<S> {
    fn random_like(&self, _template: &Matrix<S>, rng: &mut dyn rand::RngCore) -> Matrix<S> {
        random_matrix(self.order, self.order, self.involution, rng)
    }
}

impl<S: Scalar> RandomElement for RectOps<S> {
    fn random_like(&self, template: &Matrix<S>, rng: &mut dyn rand::RngCore) -> Matrix<S> {
        random_matrix(template.rows, template.cols, self.involution, rng)
    }
}

/// Rectangular matrices with shape-checked products. Not a ring: there is
/// no single unit. Operations panic on incompatible shapes, so callers
/// audit shapes before evaluating formulas.
#[derive(Clone, Debug)]
pub struct RectOps<S> {
    involution: Involution,
    tol: f64,
    _scalar: std::marker::PhantomData<S>,
}

impl<S: Scalar> RectOps<S> {
    pub fn new(involution: Involution, tol: f64) -> Self {
        Self { involution, tol, _scalar: std::marker::PhantomData }
    }

    pub fn involution(&self) -> Involution {
        self.involution
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }
}

const SHAPES: &str = "shapes audited before evaluation";

impl<S: Scalar> StarOps for RectOps<S> {
    type Elem = Matrix<S>;

    fn add(&self, a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
        a.add(b).expect(SHAPES)
    }

    fn sub(&self, a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
        a.sub(b).expect(SHAPES)
    }

    fn neg(&self, a: &Matrix<S>) -> Matrix<S> {
        a.neg()
    }

    fn mul(&self, a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
        a.mul(b).expect(SHAPES)
    }

    fn star(&self, a: &Matrix<S>) -> Matrix<S> {
        a.star()
    }

    fn half_of(&self, a: &Matrix<S>) -> Matrix<S> {
        a.half()
    }

    fn compare(&self, a: &Matrix<S>, b: &Matrix<S>) -> Comparison {
        a.compare(b, self.tol).expect(SHAPES)
    }
}
