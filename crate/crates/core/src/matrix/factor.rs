//! Rank factorization by Gaussian elimination, and the MP-inverse built
//! on top of it.
//!
//! Both backends run the same elimination. The exact backend pivots on the
//! first nonzero entry of a column; the float backend pivots on the
//! largest one and treats anything at or below `1e-12 · max|m|` as zero.

use super::{Matrix, MatrixError, Scalar};

const FLOAT_PIVOT_REL: f64 = 1e-12;

fn pivot_threshold<S: Scalar>(m: &Matrix<S>) -> f64 {
    if S::EXACT {
        0.0
    } else {
        FLOAT_PIVOT_REL * m.max_abs()
    }
}

fn find_pivot<S: Scalar>(rows: &[Vec<S>], col: usize, from: usize, threshold: f64) -> Option<usize> {
    if S::EXACT {
        (from..rows.len()).find(|&i| !rows[i][col].is_zero())
    } else {
        let (best, mag) = (from..rows.len())
            .map(|i| (i, rows[i][col].magnitude()))
            .fold((None, 0.0), |(bi, bm), (i, m)| if m > bm { (Some(i), m) } else { (bi, bm) });
        best.filter(|_| mag > threshold)
    }
}

/// Reduced row echelon form and the pivot columns.
pub fn rref<S: Scalar>(m: &Matrix<S>) -> (Matrix<S>, Vec<usize>) {
    let threshold = pivot_threshold(m);
    let mut rows = m.to_rows();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..m.cols() {
        if r == rows.len() {
            break;
        }
        let Some(p) = find_pivot(&rows, col, r, threshold) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][col].recip().expect("pivot is nonzero");
        for x in rows[r].iter_mut() {
            *x = x.times(&inv);
        }
        rows[r][col] = S::one();
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x = x.minus(&f.times(y));
            }
            row[col] = S::zero();
        }
        pivots.push(col);
        r += 1;
    }
    let reduced = Matrix::from_rows(rows, m.involution()).expect("same shape as input");
    let reduced = if m.rows() == 0 { Matrix::zeros(0, m.cols(), m.involution()) } else { reduced };
    (reduced, pivots)
}

/// `m = left · right` with `left` of full column rank and `right` of full
/// row rank.
#[derive(Clone, PartialEq)]
pub struct RankFactorization<S> {
    pub left: Matrix<S>,
    pub right: Matrix<S>,
    pub rank: usize,
}

impl<S: std::fmt::Debug> std::fmt::Debug for RankFactorization<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RankFactorization")
            .field("left", &self.left)
            .field("right", &self.right)
            .field("rank", &self.rank)
            .finish()
    }
}

/// Pivot columns of `m` times the nonzero rows of its RREF. For rank 0
/// both factors are empty (`rows × 0` and `0 × cols`).
pub fn rank_factorization<S: Scalar>(m: &Matrix<S>) -> RankFactorization<S> {
    let (reduced, pivots) = rref(m);
    let rank = pivots.len();
    RankFactorization { left: m.select_columns(&pivots), right: reduced.top_rows(rank), rank }
}

/// Inverse of a square matrix by Gauss–Jordan elimination; `None` if
/// singular (to pivot tolerance on floats).
pub fn inverse<S: Scalar>(m: &Matrix<S>) -> Option<Matrix<S>> {
    if !m.is_square() {
        return None;
    }
    let n = m.rows();
    if n == 0 {
        return Some(m.clone());
    }
    let threshold = pivot_threshold(m);
    let mut aug: Vec<Vec<S>> = (0..n)
        .map(|i| {
            let mut row = m.row(i).to_vec();
            row.extend((0..n).map(|j| if i == j { S::one() } else { S::zero() }));
            row
        })
        .collect();
    for col in 0..n {
        let p = find_pivot(&aug, col, col, threshold)?;
        aug.swap(col, p);
        let inv = aug[col][col].recip()?;
        for x in aug[col].iter_mut() {
            *x = x.times(&inv);
        }
        let pivot_row = aug[col].clone();
        for (i, row) in aug.iter_mut().enumerate() {
            if i == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x = x.minus(&f.times(y));
            }
        }
    }
    let rows = aug.into_iter().map(|row| row[n..].to_vec()).collect();
    Some(Matrix::from_rows(rows, m.involution()).expect("square inverse"))
}

/// MP-inverse via `m = FG`: `m† = G*(GG*)⁻¹(F*F)⁻¹F*`.
pub fn mp_inverse<S: Scalar>(m: &Matrix<S>) -> Result<Matrix<S>, MatrixError> {
    let RankFactorization { left, right, rank } = rank_factorization(m);
    if rank == 0 {
        return Ok(Matrix::zeros(m.cols(), m.rows(), m.involution()));
    }
    let left_star = left.star();
    let right_star = right.star();
    let left_gram = inverse(&left_star.mul(&left)?).ok_or(MatrixError::NotMpInvertible)?;
    let right_gram = inverse(&right.mul(&right_star)?).ok_or(MatrixError::NotMpInvertible)?;
    right_star.mul(&right_gram)?.mul(&left_gram)?.mul(&left_star)
}
