//! Ground truth by real-linearization.
//!
//! `X ↦ AXB* ∓ BX*A*` is additive but not linear over the complex numbers
//! (it conjugates `X`), so it is rewritten as a rational linear map on the
//! real and imaginary parts of the entries of `X` and solved by exact
//! Gaussian elimination. The coefficients are read off entrywise and the
//! elimination below is separate from the one behind the MP-inverse, so the
//! oracle shares no arithmetic path with the solvers it checks.

pub mod generate;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::matrix::{GaussianRational as Q, Involution, Matrix};
use crate::ring::RandomElement;
use crate::solvers::{Equation, Sign, SolutionFamily};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("the oracle is exact-only; float instances are checked by residuals")]
    FloatBackend,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Re,
    Im,
}

/// One real coordinate of a matrix: the real or imaginary part of entry
/// `(row, col)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Coord {
    pub row: usize,
    pub col: usize,
    pub part: Part,
}

fn coords_of(rows: usize, cols: usize, involution: Involution) -> Vec<Coord> {
    let parts: &[Part] = if involution.is_transpose() { &[Part::Re] } else { &[Part::Re, Part::Im] };
    let mut out = Vec::with_capacity(rows * cols * parts.len());
    for row in 0..rows {
        for col in 0..cols {
            for &part in parts {
                out.push(Coord { row, col, part });
            }
        }
    }
    out
}

/// Real coordinates of `m` in the order of `coords_of`.
pub fn coordinates(m: &Matrix<Q>) -> Vec<BigRational> {
    coords_of(m.rows(), m.cols(), m.involution())
        .into_iter()
        .map(|c| {
            let x = m.get(c.row, c.col);
            match c.part {
                Part::Re => x.re.clone(),
                Part::Im => x.im.clone(),
            }
        })
        .collect()
}

fn from_coordinates(values: &[BigRational], rows: usize, cols: usize, involution: Involution) -> Matrix<Q> {
    let mut data = vec![Q::real(BigRational::zero()); rows * cols];
    for (c, v) in coords_of(rows, cols, involution).into_iter().zip(values) {
        let e = &mut data[c.row * cols + c.col];
        match c.part {
            Part::Re => e.re = v.clone(),
            Part::Im => e.im = v.clone(),
        }
    }
    Matrix::new(rows, cols, data, involution).expect("coordinate layout matches shape")
}

/// Dense rational system `matrix · coords(X) = coords(AXB* ∓ BX*A*)`.
#[derive(Clone, Debug)]
pub struct RealLinearSystem {
    pub sign: Sign,
    pub involution: Involution,
    /// `(rows, cols)` of the unknown `X`.
    pub unknown_shape: (usize, usize),
    /// `(rows, cols)` of the right-hand side.
    pub output_shape: (usize, usize),
    /// `equations.len() × unknowns.len()`.
    pub matrix: Vec<Vec<BigRational>>,
    pub rhs: Option<Vec<BigRational>>,
    pub unknowns: Vec<Coord>,
    pub equations: Vec<Coord>,
}

impl RealLinearSystem {
    pub fn apply(&self, x: &Matrix<Q>) -> Vec<BigRational> {
        let xs = coordinates(x);
        self.matrix
            .iter()
            .map(|row| row.iter().zip(&xs).fold(BigRational::zero(), |acc, (a, b)| acc + a * b))
            .collect()
    }

    /// True iff `x` solves the homogeneous equation.
    pub fn in_kernel(&self, x: &Matrix<Q>) -> bool {
        self.apply(x).iter().all(Zero::is_zero)
    }

    /// True iff `x` solves the equation with this system's right-hand side.
    pub fn is_solution(&self, x: &Matrix<Q>) -> bool {
        let rhs = self.rhs.as_ref().expect("system has a right-hand side");
        self.apply(x) == *rhs
    }
}

/// Accumulates `coef · X_{kl}` (or `coef · conj(X_{kl})`) into the real and
/// imaginary output rows for one output entry.
fn accumulate(
    re_row: &mut [BigRational],
    im_row: Option<&mut [BigRational]>,
    coef: &Q,
    k: usize,
    conjugated: bool,
    with_im: bool,
) {
    // unknown layout: Re at k*w, Im at k*w + 1
    let w = if with_im { 2 } else { 1 };
    let u = k * w;
    re_row[u] += &coef.re;
    if with_im {
        let v = u + 1;
        // coef·(u + iv) = (Re·u − Im·v) + i(Im·u + Re·v); conjugated: v → −v
        let s = if conjugated { -BigRational::one() } else { BigRational::one() };
        re_row[v] -= &coef.im * &s;
        let im_row = im_row.expect("imaginary output row");
        im_row[u] += &coef.im;
        im_row[v] += &coef.re * &s;
    }
}

/// Real-linear representation of `X ↦ AXB* ∓ BX*A*` for `A: m×n`,
/// `B: m×p`, `X: n×p`. Under the transpose involution only real parts are
/// coordinates.
pub fn linearize(sign: Sign, a: &Matrix<Q>, b: &Matrix<Q>) -> Result<RealLinearSystem, OracleError> {
    let (m, n) = a.shape();
    let p = b.cols();
    if b.rows() != m {
        return Err(OracleError::Shape(format!("A is {m}x{n} but B has {} rows", b.rows())));
    }
    if a.involution() != b.involution() {
        return Err(OracleError::Shape("A and B use different involutions".into()));
    }
    let involution = a.involution();
    let with_im = !involution.is_transpose();
    let conj = |z: &Q| if with_im { crate::matrix::Scalar::conj(z) } else { z.clone() };
    let unknowns = coords_of(n, p, involution);
    let equations = coords_of(m, m, involution);
    let width = unknowns.len();
    let mut matrix = vec![vec![BigRational::zero(); width]; equations.len()];
    let w = if with_im { 2 } else { 1 };
    use crate::matrix::Scalar;

    for i in 0..m {
        for j in 0..m {
            let base = (i * m + j) * w;
            let (re_rows, rest) = matrix[base..].split_at_mut(1);
            let re_row = &mut re_rows[0];
            let mut im_row = if with_im { Some(&mut rest[0]) } else { None };
            for k in 0..n {
                for l in 0..p {
                    // (AXB*)_ij ∋ A_ik X_kl conj(B_jl)
                    let alpha = a.get(i, k).times(&conj(b.get(j, l)));
                    if !alpha.is_zero() {
                        accumulate(re_row, im_row.as_deref_mut().map(|r| r.as_mut_slice()), &alpha, k * p + l, false, with_im);
                    }
                }
            }
            for l in 0..p {
                for k in 0..n {
                    // (BX*A*)_ij ∋ B_il conj(X_kl) conj(A_jk)
                    let beta = b.get(i, l).times(&conj(a.get(j, k)));
                    if beta.is_zero() {
                        continue;
                    }
                    let beta = match sign {
                        Sign::Minus => beta.negated(),
                        Sign::Plus => beta,
                    };
                    accumulate(re_row, im_row.as_deref_mut().map(|r| r.as_mut_slice()), &beta, k * p + l, true, with_im);
                }
            }
        }
    }
    Ok(RealLinearSystem {
        sign,
        involution,
        unknown_shape: (n, p),
        output_shape: (m, m),
        matrix,
        rhs: None,
        unknowns,
        equations,
    })
}

/// Reduced row echelon form of `[matrix | rhs]` over the rationals.
/// Returns the reduced rows and the pivot column of each nonzero row.
fn rational_rref(mut rows: Vec<Vec<BigRational>>, width: usize) -> (Vec<Vec<BigRational>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..width {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][col].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    (rows, pivots)
}

/// Exact verdict, one solution and a kernel basis.
#[derive(Clone, Debug)]
pub struct OracleResult {
    pub solvable: bool,
    /// Free variables set to zero.
    pub particular: Option<Matrix<Q>>,
    pub kernel_basis: Vec<Matrix<Q>>,
    /// Real dimension of the homogeneous solution space.
    pub real_dimension: usize,
    pub rank: usize,
    pub system: RealLinearSystem,
}

/// Solves `AXB* ∓ BX*A* = C` exactly. `C` must be `m×m`.
pub fn oracle_solve(sign: Sign, a: &Matrix<Q>, b: &Matrix<Q>, c: &Matrix<Q>) -> Result<OracleResult, OracleError> {
    let mut system = linearize(sign, a, b)?;
    if c.shape() != system.output_shape || c.involution() != system.involution {
        return Err(OracleError::Shape(format!("C must be {:?}, found {:?}", system.output_shape, c.shape())));
    }
    let rhs = coordinates(c);
    let width = system.unknowns.len();
    let augmented = system
        .matrix
        .iter()
        .zip(&rhs)
        .map(|(row, r)| {
            let mut row = row.clone();
            row.push(r.clone());
            row
        })
        .collect();
    let (reduced, pivots) = rational_rref(augmented, width + 1);
    let solvable = pivots.last() != Some(&width);
    let rank = pivots.iter().filter(|&&p| p < width).count();
    let (n, p) = system.unknown_shape;
    let inv = system.involution;

    let particular = solvable.then(|| {
        let mut x = vec![BigRational::zero(); width];
        for (row, &col) in reduced.iter().zip(&pivots) {
            x[col] = row[width].clone();
        }
        from_coordinates(&x, n, p, inv)
    });

    let pivot_cols = &pivots[..rank];
    let kernel_basis = (0..width)
        .filter(|c| !pivot_cols.contains(c))
        .map(|free| {
            let mut x = vec![BigRational::zero(); width];
            x[free] = BigRational::one();
            for (row, &col) in reduced.iter().zip(pivot_cols) {
                x[col] = -row[free].clone();
            }
            from_coordinates(&x, n, p, inv)
        })
        .collect::<Vec<_>>();

    system.rhs = Some(rhs);
    Ok(OracleResult { solvable, particular, real_dimension: kernel_basis.len(), kernel_basis, rank, system })
}

/// Oracle for an equation already in two-sided form.
pub fn oracle_for_equation(eq: &Equation<Matrix<Q>>) -> Result<OracleResult, OracleError> {
    oracle_solve(eq.sign, &eq.a, &eq.b, &eq.c)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// Description of the first counterexample, when failed.
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Checks a solution family against the oracle for the same instance:
/// the oracle agrees it is solvable, `x₀` solves it, `Φ(v)` lies in the
/// oracle kernel for `trials` seeded `v`, and `Φ(h) = h` for every kernel
/// basis element `h`.
pub fn verify_family_against_oracle<R>(fam: &SolutionFamily<R>, oracle: &OracleResult, trials: u64) -> VerificationReport
where
    R: RandomElement<Elem = Matrix<Q>>,
{
    let sys = &oracle.system;
    let mut checks = Vec::new();
    let mut push = |name: &str, witness: Option<String>| {
        checks.push(CheckOutcome { name: name.to_string(), passed: witness.is_none(), witness });
    };

    push("oracle_solvable", (!oracle.solvable).then(|| "oracle finds the instance unsolvable".to_string()));
    push("x0_solves", (!sys.is_solution(fam.x0())).then(|| format!("x0 = {:?}", fam.x0())));

    let kernel_witness = (0..trials).find_map(|seed| {
        let v = fam.sample_parameter(seed);
        let image = fam.phi(&v);
        (!sys.in_kernel(&image)).then(|| format!("seed {seed}: v = {v:?}, phi(v) = {image:?}"))
    });
    push("phi_in_kernel", kernel_witness);

    let fixed_witness = oracle.kernel_basis.iter().find_map(|h| {
        let image = fam.phi(h);
        (image != *h).then(|| format!("h = {h:?}, phi(h) = {image:?}"))
    });
    push("phi_fixes_kernel", fixed_witness);

    VerificationReport { checks }
}
