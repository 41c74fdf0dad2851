#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use star_solve::matrix::{random_matrix, GaussianRational as Q, Involution, Matrix, Scalar};
use star_solve::oracle::generate::{random_low_rank, Family};

pub const CT: Involution = Involution::ConjugateTranspose;
pub const TR: Involution = Involution::Transpose;
pub const INVOLUTIONS: [Involution; 2] = [CT, TR];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn family_for(i: usize) -> Family {
    Family::ALL[i % Family::ALL.len()]
}

/// Scalar `[[x]]` under conjugate transpose.
pub fn s(x: Q) -> Matrix<Q> {
    Matrix::scalar(x, CT).unwrap()
}

/// Random exact matrix whose rank is drawn uniformly from `0..=min(r, c)`.
pub fn random_any_rank(rows: usize, cols: usize, inv: Involution, rng: &mut ChaCha8Rng) -> Matrix<Q> {
    let rank = rng.gen_range(0..=rows.min(cols));
    if rank == rows.min(cols) && rng.gen_bool(0.5) {
        random_matrix(rows, cols, inv, rng)
    } else {
        random_low_rank(rows, cols, rank, inv, rng)
    }
}

fn inner_scalar(m: &Matrix<Q>) -> Q {
    assert_eq!(m.shape(), (1, 1));
    m.get(0, 0).clone()
}

/// MP-inverse by Greville's column recursion; shares no code with the
/// rank-factorization route.
pub fn greville(a: &Matrix<Q>) -> Matrix<Q> {
    let (rows, cols) = a.shape();
    let inv = a.involution();
    if cols == 0 || rows == 0 {
        return Matrix::zeros(cols, rows, inv);
    }
    let col = |k: usize| a.select_columns(&[k]);
    let first = col(0);
    let mut pinv = if first.is_zero() {
        Matrix::zeros(1, rows, inv)
    } else {
        let norm = inner_scalar(&first.star().mul(&first).unwrap());
        first.star().scale(&norm.recip().unwrap())
    };
    for k in 1..cols {
        let prefix = a.select_columns(&(0..k).collect::<Vec<_>>());
        let ak = col(k);
        let d = pinv.mul(&ak).unwrap();
        let c = ak.sub(&prefix.mul(&d).unwrap()).unwrap();
        let b = if c.is_zero() {
            let denom = Q::one().plus(&inner_scalar(&d.star().mul(&d).unwrap()));
            d.star().mul(&pinv).unwrap().scale(&denom.recip().unwrap())
        } else {
            let norm = inner_scalar(&c.star().mul(&c).unwrap());
            c.star().scale(&norm.recip().unwrap())
        };
        let top = pinv.sub(&d.mul(&b).unwrap()).unwrap();
        let mut next = Matrix::zeros(k + 1, rows, inv);
        next.set_block(0, 0, &top).unwrap();
        next.set_block(k, 0, &b).unwrap();
        pinv = next;
    }
    pinv
}
