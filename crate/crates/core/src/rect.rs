//! Rectangular equations `AXB* ∓ BX*A* = C`.
//!
//! `A` is `m×n`, `B` is `m×p`, `C` is `m×m` and the unknown `X` is `n×p`.
//! With `k = m + n + p` the problem embeds into `k×k` matrices as
//!
//! ```text
//!     | 0 A 0 |        | 0 0 B |        | C 0 0 |
//! a = | 0 0 0 |    b = | 0 0 0 |    c = | 0 0 0 |
//!     | 0 0 0 |        | 0 0 0 |        | 0 0 0 |
//! ```
//!
//! and solutions correspond to `k×k` solutions whose only nonzero block is
//! `X` in block position (2, 3). [`solve_rect`] evaluates the formulas
//! directly on the rectangular operands; the embedding is kept as a second
//! route for cross-checking.

use serde::{Deserialize, Serialize};

use crate::matrix::{mp_inverse, Involution, Matrix, RectOps, Scalar};
use crate::ring::{Comparison, StarOps};
use crate::solvers::{
    apply_equation, particular, phi, report_from_parts, solvability, solve_with_report, HypothesisReport, Outcome,
    Sign, SolveError,
};

/// Block sizes `(m, n, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub m: usize,
    pub n: usize,
    pub p: usize,
}

impl Dims {
    pub fn new(m: usize, n: usize, p: usize) -> Self {
        Self { m, n, p }
    }

    /// Order of the embedding ring.
    pub fn k(&self) -> usize {
        self.m + self.n + self.p
    }

    /// Offsets of block rows/columns 1, 2, 3.
    fn offsets(&self) -> [usize; 3] {
        [0, self.m, self.m + self.n]
    }

    fn block_at<S: Scalar>(&self, inner: &Matrix<S>, row: usize, col: usize) -> Result<Matrix<S>, SolveError> {
        let off = self.offsets();
        let mut out = Matrix::zeros(self.k(), self.k(), inner.involution());
        out.set_block(off[row], off[col], inner)?;
        Ok(out)
    }
}

/// A validated rectangular instance.
#[derive(Clone, Debug)]
pub struct RectProblem<S> {
    a: Matrix<S>,
    b: Matrix<S>,
    c: Matrix<S>,
    dims: Dims,
}

impl<S: Scalar> RectProblem<S> {
    /// Checks shapes and involutions, and audits every formula term for
    /// these block sizes.
    pub fn new(a: Matrix<S>, b: Matrix<S>, c: Matrix<S>) -> Result<Self, SolveError> {
        let dims = Dims::new(a.rows(), a.cols(), b.cols());
        if b.rows() != dims.m {
            return Err(SolveError::Shape(format!("B must have {} rows (m), found {}", dims.m, b.rows())));
        }
        if c.shape() != (dims.m, dims.m) {
            return Err(SolveError::Shape(format!("C must be {0}x{0}, found {1:?}", dims.m, c.shape())));
        }
        if b.involution() != a.involution() || c.involution() != a.involution() {
            return Err(SolveError::Shape("A, B and C must share one involution".into()));
        }
        audit_shapes(dims)?;
        Ok(Self { a, b, c, dims })
    }

    pub fn a(&self) -> &Matrix<S> {
        &self.a
    }

    pub fn b(&self) -> &Matrix<S> {
        &self.b
    }

    pub fn c(&self) -> &Matrix<S> {
        &self.c
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn involution(&self) -> Involution {
        self.a.involution()
    }
}

/// The embedded `k×k` triple.
#[derive(Clone, Debug)]
pub struct EmbeddedTriple<S> {
    pub a: Matrix<S>,
    pub b: Matrix<S>,
    pub c: Matrix<S>,
    pub dims: Dims,
}

pub fn embed<S: Scalar>(p: &RectProblem<S>) -> EmbeddedTriple<S> {
    let d = p.dims;
    EmbeddedTriple {
        a: d.block_at(&p.a, 0, 1).expect("validated shape"),
        b: d.block_at(&p.b, 0, 2).expect("validated shape"),
        c: d.block_at(&p.c, 0, 0).expect("validated shape"),
        dims: d,
    }
}

/// `a†` with `A†` in block (2, 1) and `b†` with `B†` in block (3, 1).
pub fn embed_mp<S: Scalar>(
    a_dagger: &Matrix<S>,
    b_dagger: &Matrix<S>,
    dims: Dims,
) -> Result<(Matrix<S>, Matrix<S>), SolveError> {
    if a_dagger.shape() != (dims.n, dims.m) || b_dagger.shape() != (dims.p, dims.m) {
        return Err(SolveError::Shape(format!(
            "expected A† {}x{} and B† {}x{}, found {:?} and {:?}",
            dims.n,
            dims.m,
            dims.p,
            dims.m,
            a_dagger.shape(),
            b_dagger.shape()
        )));
    }
    Ok((dims.block_at(a_dagger, 1, 0)?, dims.block_at(b_dagger, 2, 0)?))
}

/// The canonical `k×k` solution carrying `X` in block (2, 3).
pub fn embed_solution<S: Scalar>(x: &Matrix<S>, dims: Dims) -> Result<Matrix<S>, SolveError> {
    if x.shape() != (dims.n, dims.p) {
        return Err(SolveError::Shape(format!("X must be {}x{}, found {:?}", dims.n, dims.p, x.shape())));
    }
    dims.block_at(x, 1, 2)
}

/// Block (2, 3) of a `k×k` solution.
pub fn extract_solution<S: Scalar>(x: &Matrix<S>, dims: Dims) -> Result<Matrix<S>, SolveError> {
    if x.shape() != (dims.k(), dims.k()) {
        return Err(SolveError::Shape(format!("x must be {0}x{0}, found {1:?}", dims.k(), x.shape())));
    }
    let off = dims.offsets();
    Ok(x.block(off[1], off[2], dims.n, dims.p)?)
}

/// Hypothesis data for `A`, `B`, with `E_B = I_m − BB†` and
/// `D = E_B A`, `D† = A† E_B`.
pub fn rect_hypotheses<S: Scalar>(
    ops: &RectOps<S>,
    a: &Matrix<S>,
    b: &Matrix<S>,
) -> Result<HypothesisReport<Matrix<S>>, SolveError> {
    let a_dagger = mp_inverse(a).map_err(|_| SolveError::NotMpInvertible("A"))?;
    let b_dagger = mp_inverse(b).map_err(|_| SolveError::NotMpInvertible("B"))?;
    let e_b = Matrix::identity(b.rows(), b.involution()).sub(&b.mul(&b_dagger)?)?;
    Ok(report_from_parts(ops, a, b, a_dagger, b_dagger, &e_b))
}

/// Solves the rectangular equation directly. The family's parameter `V`
/// is `n×p`.
pub fn solve_rect<S: Scalar>(sign: Sign, p: &RectProblem<S>, tol: f64) -> Result<Outcome<RectOps<S>>, SolveError> {
    let ops = RectOps::new(p.involution(), tol);
    let report = rect_hypotheses(&ops, &p.a, &p.b)?;
    Ok(solve_with_report(ops, sign, report, &p.c))
}

/// A matrix shape, or the first incompatibility met while computing it.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Ok(usize, usize),
    Bad(String),
}

/// [`StarOps`] over shapes: evaluating a formula yields the shape of the
/// result, or the first mismatched product.
#[derive(Clone, Copy, Debug)]
pub struct ShapeOps;

impl ShapeOps {
    fn combine(a: &Shape, b: &Shape, op: &str, f: impl Fn((usize, usize), (usize, usize)) -> Option<Shape>) -> Shape {
        match (a, b) {
            (Shape::Bad(e), _) | (_, Shape::Bad(e)) => Shape::Bad(e.clone()),
            (Shape::Ok(r1, c1), Shape::Ok(r2, c2)) => f((*r1, *c1), (*r2, *c2))
                .unwrap_or_else(|| Shape::Bad(format!("{op}: {r1}x{c1} with {r2}x{c2}"))),
        }
    }
}

impl StarOps for ShapeOps {
    type Elem = Shape;

    fn add(&self, a: &Shape, b: &Shape) -> Shape {
        Self::combine(a, b, "add", |x, y| (x == y).then_some(Shape::Ok(x.0, x.1)))
    }

    fn neg(&self, a: &Shape) -> Shape {
        a.clone()
    }

    fn mul(&self, a: &Shape, b: &Shape) -> Shape {
        Self::combine(a, b, "mul", |x, y| (x.1 == y.0).then_some(Shape::Ok(x.0, y.1)))
    }

    fn star(&self, a: &Shape) -> Shape {
        match a {
            Shape::Ok(r, c) => Shape::Ok(*c, *r),
            bad => bad.clone(),
        }
    }

    fn half_of(&self, a: &Shape) -> Shape {
        a.clone()
    }

    fn compare(&self, a: &Shape, b: &Shape) -> Comparison {
        Comparison::exact(matches!(self.add(a, b), Shape::Ok(..)), 1.0)
    }
}

/// Runs every rectangular formula symbolically on shapes and checks the
/// result shapes.
pub fn audit_shapes(dims: Dims) -> Result<(), SolveError> {
    let Dims { m, n, p } = dims;
    let ops = ShapeOps;
    let a = Shape::Ok(m, n);
    let b = Shape::Ok(m, p);
    let c = Shape::Ok(m, m);
    let v = Shape::Ok(n, p);
    let report = report_from_parts(&ops, &a, &b, Shape::Ok(n, m), Shape::Ok(p, m), &Shape::Ok(m, m));
    let checks = [
        ("D", report.d.clone(), Shape::Ok(m, n)),
        ("D†", report.d_dagger.clone(), Shape::Ok(n, m)),
        ("X0", particular(&ops, &report, &c), v.clone()),
        ("Phi(V)", phi(&ops, Sign::Minus, &report, &v), v.clone()),
        ("Phi'(V)", phi(&ops, Sign::Plus, &report, &v), v.clone()),
        ("AXB*", apply_equation(&ops, Sign::Minus, &a, &b, &v), c.clone()),
    ];
    for (name, got, want) in checks {
        if got != want {
            return Err(SolveError::Shape(format!("{name}: expected {want:?}, got {got:?}")));
        }
    }
    for sign in [Sign::Minus, Sign::Plus] {
        if let Some(cond) = solvability(&ops, sign, &report, &c).conditions.iter().find(|c| !c.comparison.holds()) {
            return Err(SolveError::Shape(format!("condition {} is not shape-consistent", cond.name)));
        }
    }
    for (name, cmp) in [("range", report.range), ("hermitian", report.hermitian)] {
        if !cmp.holds() {
            return Err(SolveError::Shape(format!("{name} condition is not shape-consistent")));
        }
    }
    Ok(())
}
