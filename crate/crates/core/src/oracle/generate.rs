//! Random instances that satisfy the standing hypotheses.
//!
//! Uniformly random pairs almost never satisfy `aa†b = b` together with
//! `(a†bb†a)* = a†bb†a`, so pairs are built from structures that do:
//!
//! * [`Family::Unitary`]: `a` unitary (orthogonal under transpose) with
//!   rational entries, `b` arbitrary. Then `a† = a*` and `a†bb†a` is
//!   hermitian for any `b`.
//! * [`Family::Identical`]: `b = a` of random rank.
//! * [`Family::Diagonal`]: real diagonal `a`, `b` with `supp(b) ⊆ supp(a)`.
//! * [`Family::Rejection`]: sparse random pairs kept only if they pass the
//!   hypothesis check.
//!
//! Rectangular pairs use `A = U·D_A·W`, `B = U·D_B·Z` with unitary `U`,
//! `W`, `Z` and rectangular diagonals whose supports nest.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{random_matrix, GaussianRational as Q, Involution, Matrix, MatrixRing, RectOps, Scalar};
use crate::rect::{rect_hypotheses, Dims};
use crate::solvers::{apply_equation, check_hypotheses, EquationKind, Sign};

/// Attempts made by the rejection family before giving up.
pub const REJECTION_ATTEMPTS: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Unitary,
    Identical,
    Diagonal,
    Rejection,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Unitary, Family::Identical, Family::Diagonal, Family::Rejection];

    pub fn name(self) -> &'static str {
        match self {
            Family::Unitary => "unitary",
            Family::Identical => "identical",
            Family::Diagonal => "diagonal",
            Family::Rejection => "rejection",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, GenError> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| GenError::UnknownFamily(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error("family {family} is not available for rectangular instances")]
    UnsupportedRect { family: Family },
    #[error("no pair passed the hypothesis check after {0} attempts")]
    Exhausted(usize),
}

fn q(n: i64) -> Q {
    Q::from_i64(n)
}

fn frac(num: i64, den: i64) -> Q {
    Q::from_ratios(num, den, 0, 1)
}

/// Signed permutation matrix, with phases in `{±1, ±i}` unless the
/// involution is the transpose.
fn signed_permutation<G: Rng>(n: usize, inv: Involution, rng: &mut G) -> Matrix<Q> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let phases: Vec<Q> = if inv.is_transpose() {
        vec![q(1), q(-1)]
    } else {
        vec![q(1), q(-1), Q::i(), Q::i().negated()]
    };
    let mut m = Matrix::zeros(n, n, inv);
    for (i, &j) in perm.iter().enumerate() {
        let phase = phases.choose(rng).expect("non-empty").clone();
        m.set_block(i, j, &Matrix::scalar(phase, inv).expect("finite")).expect("in range");
    }
    m
}

/// A 2×2 unitary block built on the 3-4-5 triple.
fn rotation_block<G: Rng>(inv: Involution, rng: &mut G) -> [[Q; 2]; 2] {
    let choices = if inv.is_transpose() { 2 } else { 3 };
    match rng.gen_range(0..choices) {
        0 => [[frac(3, 5), frac(4, 5)], [frac(-4, 5), frac(3, 5)]],
        1 => [[frac(3, 5), frac(-4, 5)], [frac(4, 5), frac(3, 5)]],
        _ => {
            let fi = Q::from_ratios(0, 1, 4, 5);
            [[frac(3, 5), fi.clone()], [fi, frac(3, 5)]]
        }
    }
}

/// Random unitary (orthogonal under transpose) `n×n` matrix with rational
/// entries.
pub fn random_unitary<G: Rng>(n: usize, inv: Involution, rng: &mut G) -> Matrix<Q> {
    let mut u = signed_permutation(n, inv, rng);
    if n < 2 {
        return u;
    }
    for _ in 0..rng.gen_range(1..=2) {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(rng);
        let (i, j) = (idx[0], idx[1]);
        let blk = rotation_block(inv, rng);
        let mut r = Matrix::identity(n, inv);
        for (a, &ra) in [i, j].iter().enumerate() {
            for (b, &cb) in [i, j].iter().enumerate() {
                r.set_block(ra, cb, &Matrix::scalar(blk[a][b].clone(), inv).expect("finite")).expect("in range");
            }
        }
        u = u.mul(&r).expect("square");
    }
    u
}

/// Random matrix of rank at most `rank`, as a product of random factors.
pub fn random_low_rank<G: Rng>(rows: usize, cols: usize, rank: usize, inv: Involution, rng: &mut G) -> Matrix<Q> {
    if rank == 0 {
        return Matrix::zeros(rows, cols, inv);
    }
    let left: Matrix<Q> = random_matrix(rows, rank, inv, rng);
    let right: Matrix<Q> = random_matrix(rank, cols, inv, rng);
    left.mul(&right).expect("inner dimension")
}

/// Sparse matrix over `{0, ±1}` (and `±i` unless transposing).
fn sparse_matrix<G: Rng>(rows: usize, cols: usize, inv: Involution, rng: &mut G) -> Matrix<Q> {
    let data = (0..rows * cols)
        .map(|_| match rng.gen_range(0..8) {
            0 | 1 => q(1),
            2 => q(-1),
            3 if !inv.is_transpose() => Q::i(),
            _ => q(0),
        })
        .collect();
    Matrix::new(rows, cols, data, inv).expect("finite")
}

fn nonzero_small<G: Rng>(rng: &mut G) -> Q {
    loop {
        let x = Q::sample(rng, true);
        if !x.is_zero() {
            return x;
        }
    }
}

/// Rectangular diagonal `rows×cols` with the given nonzero positions on
/// the main diagonal.
fn rect_diag<G: Rng>(rows: usize, cols: usize, support: &[usize], inv: Involution, rng: &mut G) -> Matrix<Q> {
    let mut m = Matrix::zeros(rows, cols, inv);
    for &i in support {
        m.set_block(i, i, &Matrix::scalar(nonzero_small(rng), inv).expect("finite")).expect("in range");
    }
    m
}

fn random_support<G: Rng>(from: &[usize], rng: &mut G) -> Vec<usize> {
    from.iter().copied().filter(|_| rng.gen_bool(0.6)).collect()
}

/// A square pair `(a, b)` of order `n` from `family`.
pub fn square_pair<G: Rng>(
    family: Family,
    n: usize,
    inv: Involution,
    rng: &mut G,
) -> Result<(Matrix<Q>, Matrix<Q>), GenError> {
    match family {
        Family::Unitary => Ok((random_unitary(n, inv, rng), random_matrix(n, n, inv, rng))),
        Family::Identical => {
            let a = random_low_rank(n, n, rng.gen_range(0..=n), inv, rng);
            Ok((a.clone(), a))
        }
        Family::Diagonal => {
            let all: Vec<usize> = (0..n).collect();
            let supp_a = random_support(&all, rng);
            let supp_b = random_support(&supp_a, rng);
            Ok((rect_diag(n, n, &supp_a, inv, rng), rect_diag(n, n, &supp_b, inv, rng)))
        }
        Family::Rejection => {
            let ring = MatrixRing::<Q>::new(n, inv);
            for _ in 0..REJECTION_ATTEMPTS {
                let a = sparse_matrix(n, n, inv, rng);
                let b = sparse_matrix(n, n, inv, rng);
                if check_hypotheses(&ring, &a, &b).map(|r| r.holds()).unwrap_or(false) {
                    return Ok((a, b));
                }
            }
            Err(GenError::Exhausted(REJECTION_ATTEMPTS))
        }
    }
}

/// A rectangular pair `A: m×n`, `B: m×p`. Only the diagonal and rejection
/// families apply.
pub fn rect_pair<G: Rng>(
    family: Family,
    dims: Dims,
    inv: Involution,
    rng: &mut G,
) -> Result<(Matrix<Q>, Matrix<Q>), GenError> {
    let Dims { m, n, p } = dims;
    match family {
        Family::Diagonal => {
            let rows_a: Vec<usize> = (0..m.min(n)).collect();
            let supp_a = random_support(&rows_a, rng);
            let rows_b: Vec<usize> = supp_a.iter().copied().filter(|&i| i < p).collect();
            let supp_b = random_support(&rows_b, rng);
            let u = random_unitary(m, inv, rng);
            let w = random_unitary(n, inv, rng);
            let z = random_unitary(p, inv, rng);
            let a = u.mul(&rect_diag(m, n, &supp_a, inv, rng)).and_then(|x| x.mul(&w)).expect("shapes");
            let b = u.mul(&rect_diag(m, p, &supp_b, inv, rng)).and_then(|x| x.mul(&z)).expect("shapes");
            Ok((a, b))
        }
        Family::Rejection => {
            let ops = RectOps::<Q>::new(inv, 0.0);
            for _ in 0..REJECTION_ATTEMPTS {
                let a = sparse_matrix(m, n, inv, rng);
                let b = sparse_matrix(m, p, inv, rng);
                if rect_hypotheses(&ops, &a, &b).map(|r| r.holds()).unwrap_or(false) {
                    return Ok((a, b));
                }
            }
            Err(GenError::Exhausted(REJECTION_ATTEMPTS))
        }
        family => Err(GenError::UnsupportedRect { family }),
    }
}

/// `r ∓ r*` for a random `r`: satisfies the symmetry half of the
/// solvability conditions but generally not the rest.
pub fn random_symmetric_rhs<G: Rng>(sign: Sign, order: usize, inv: Involution, rng: &mut G) -> Matrix<Q> {
    let r: Matrix<Q> = random_matrix(order, order, inv, rng);
    match sign {
        Sign::Minus => r.sub(&r.star()),
        Sign::Plus => r.add(&r.star()),
    }
    .expect("square")
}

/// Right-hand side for `axb* ∓ bx*a* = c`: the image of a random `x̂`
/// when `force_solvable`, otherwise [`random_symmetric_rhs`]. `x̂` has
/// shape `a.cols() × b.cols()`.
pub fn two_sided_rhs<G: Rng>(
    sign: Sign,
    a: &Matrix<Q>,
    b: &Matrix<Q>,
    force_solvable: bool,
    rng: &mut G,
) -> Matrix<Q> {
    let inv = a.involution();
    if force_solvable {
        let x: Matrix<Q> = random_matrix(a.cols(), b.cols(), inv, rng);
        apply_equation(&RectOps::<Q>::new(inv, 0.0), sign, a, b, &x)
    } else {
        random_symmetric_rhs(sign, a.rows(), inv, rng)
    }
}

/// Right-hand side `b` for `xa* + ax* = b` or `a*x + x*a = b`.
///
/// Panics if `kind` is not one of the symmetric kinds.
pub fn symmetric_rhs<G: Rng>(kind: EquationKind, a: &Matrix<Q>, force_solvable: bool, rng: &mut G) -> Matrix<Q> {
    let inv = a.involution();
    let n = a.rows();
    if !force_solvable {
        return random_symmetric_rhs(Sign::Plus, n, inv, rng);
    }
    let one = Matrix::identity(n, inv);
    let (lhs_a, lhs_b) = match kind {
        EquationKind::SymRight => (one, a.clone()),
        EquationKind::SymLeft => (a.star(), one),
        other => panic!("{other:?} is not a symmetric kind"),
    };
    two_sided_rhs(Sign::Plus, &lhs_a, &lhs_b, true, rng)
}
