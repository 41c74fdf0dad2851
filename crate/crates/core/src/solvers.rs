//! General solutions of `axb* ∓ bx*a* = c`, and of the symmetric cases
//! `xa* + ax* = b` and `a*x + x*a = b`.
//!
//! Every formula here is written against [`StarOps`], so the same code runs
//! in an abstract ring, in square matrix rings and on rectangular matrices.
//! The two-sided equation needs the standing hypotheses
//!
//! * `aa†b = b` (range condition)
//! * `(a†bb†a)* = a†bb†a` (hermitian condition)
//!
//! under which `d = E_b a` has MP-inverse `d† = a† E_b`. All solution
//! formulas are expressed in `a†`, `b†`, `d` and `d†`, carried by
//! [`HypothesisReport`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::MatrixError;
use crate::ring::{
    herm_part, proj_complement_left, proj_complement_right, skew_part, Comparison, RandomElement, StarOps,
    StarRing,
};

/// Which of `axb* − bx*a* = c` and `axb* + bx*a* = c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Minus,
    Plus,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("operand `{0}` is not MP-invertible")]
    NotMpInvertible(&'static str),
    #[error("operand `{operand}` is not a ring element: {reason}")]
    NotAMember { operand: &'static str, reason: String },
    #[error("shape error: {0}")]
    Shape(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("sampled element fails the equation (residual {residual:e})")]
    VerificationFailed { residual: f64 },
}

/// `a x b* ∓ b x* a*`.
pub fn apply_equation<R: StarOps>(ops: &R, sign: Sign, a: &R::Elem, b: &R::Elem, x: &R::Elem) -> R::Elem {
    let left = ops.mul_all(&[a, x, &ops.star(b)]);
    let right = ops.mul_all(&[b, &ops.star(x), &ops.star(a)]);
    match sign {
        Sign::Minus => ops.sub(&left, &right),
        Sign::Plus => ops.add(&left, &right),
    }
}

/// The data every two-sided formula depends on.
#[derive(Clone, Debug)]
pub struct HypothesisReport<E> {
    pub a: E,
    pub b: E,
    pub a_dagger: E,
    pub b_dagger: E,
    /// `aa†b = b`
    pub range: Comparison,
    /// `(a†bb†a)* = a†bb†a`
    pub hermitian: Comparison,
    /// `E_b a`
    pub d: E,
    /// `a† E_b`
    pub d_dagger: E,
}

impl<E> HypothesisReport<E> {
    pub fn range_ok(&self) -> bool {
        self.range.holds()
    }

    pub fn hermitian_ok(&self) -> bool {
        self.hermitian.holds()
    }

    pub fn holds(&self) -> bool {
        self.range_ok() && self.hermitian_ok()
    }

    pub fn is_indeterminate(&self) -> bool {
        self.range.and(self.hermitian).is_indeterminate()
    }

    /// Names of the failed (or indeterminate) hypotheses.
    pub fn failed(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.range_ok() {
            out.push("range_condition");
        }
        if !self.hermitian_ok() {
            out.push("hermitian_condition");
        }
        out
    }
}

/// Builds the report from precomputed MP-inverses and `E_b = 1 − bb†`.
///
/// Works for any [`StarOps`]; the rectangular solver supplies its own
/// `E_b = I_m − BB†`.
pub fn report_from_parts<R: StarOps>(
    ops: &R,
    a: &R::Elem,
    b: &R::Elem,
    a_dagger: R::Elem,
    b_dagger: R::Elem,
    e_b: &R::Elem,
) -> HypothesisReport<R::Elem> {
    let range = ops.compare(&ops.mul_all(&[a, &a_dagger, b]), b);
    let g = ops.mul_all(&[&a_dagger, b, &b_dagger, a]);
    let hermitian = ops.compare(&ops.star(&g), &g);
    let d = ops.mul(e_b, a);
    let d_dagger = ops.mul(&a_dagger, e_b);
    HypothesisReport { a: a.clone(), b: b.clone(), a_dagger, b_dagger, range, hermitian, d, d_dagger }
}

fn member<R: StarRing>(ring: &R, operand: &'static str, x: &R::Elem) -> Result<(), SolveError> {
    ring.check_member(x).map_err(|reason| SolveError::NotAMember { operand, reason })
}

/// Computes `a†`, `b†`, both hypotheses, `d` and `d†`.
pub fn check_hypotheses<R: StarRing>(ring: &R, a: &R::Elem, b: &R::Elem) -> Result<HypothesisReport<R::Elem>, SolveError> {
    member(ring, "a", a)?;
    member(ring, "b", b)?;
    let a_dagger = ring.mp_inverse(a).ok_or(SolveError::NotMpInvertible("a"))?;
    let b_dagger = ring.mp_inverse(b).ok_or(SolveError::NotMpInvertible("b"))?;
    let e_b = proj_complement_left(ring, b, &b_dagger);
    Ok(report_from_parts(ring, a, b, a_dagger, b_dagger, &e_b))
}

/// Homogeneous solution map.
///
/// Minus: `Φ(v) = v − ½a†avb†b + ½a†bv*a*(b†)* − ½a†bv*(b†ad†a)* − ½d†avb†b`.
/// Plus flips the signs of the two middle terms.
pub fn phi<R: StarOps>(ops: &R, sign: Sign, report: &HypothesisReport<R::Elem>, v: &R::Elem) -> R::Elem {
    let HypothesisReport { a, b, a_dagger, b_dagger, d_dagger, .. } = report;
    let v_star = ops.star(v);
    let b_dagger_star = ops.star(b_dagger);

    let t1 = ops.mul_all(&[a_dagger, a, v, b_dagger, b]);
    let t2 = ops.mul_all(&[a_dagger, b, &v_star, &ops.star(a), &b_dagger_star]);
    let t3 = ops.mul_all(&[a_dagger, b, &v_star, &ops.star(&ops.mul_all(&[b_dagger, a, d_dagger, a]))]);
    let t4 = ops.mul_all(&[d_dagger, a, v, b_dagger, b]);

    let middle = match sign {
        Sign::Minus => ops.sub(&t2, &t3),
        Sign::Plus => ops.sub(&t3, &t2),
    };
    let correction = ops.sub(&middle, &ops.add(&t1, &t4));
    ops.add(v, &ops.half_of(&correction))
}

/// Particular solution
/// `x₀ = ½a†c(b†)* − ½a†bb†c(b†ad†)* + ½d†c(b†)*`, used for both signs.
pub fn particular<R: StarOps>(ops: &R, report: &HypothesisReport<R::Elem>, c: &R::Elem) -> R::Elem {
    let HypothesisReport { a, b, a_dagger, b_dagger, d_dagger, .. } = report;
    let b_dagger_star = ops.star(b_dagger);
    let t1 = ops.mul_all(&[a_dagger, c, &b_dagger_star]);
    let t2 = ops.mul_all(&[a_dagger, b, b_dagger, c, &ops.star(&ops.mul_all(&[b_dagger, a, d_dagger]))]);
    let t3 = ops.mul_all(&[d_dagger, c, &b_dagger_star]);
    ops.half_of(&ops.add(&ops.sub(&t1, &t2), &t3))
}

/// One named solvability condition. `name` is the label reported when the
/// condition fails.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub comparison: Comparison,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Solvable,
    Unsolvable,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Solvability {
    pub conditions: Vec<Condition>,
}

impl Solvability {
    pub fn verdict(&self) -> Verdict {
        let all = self.conditions.iter().fold(Comparison::exact(true, 0.0), |acc, c| acc.and(c.comparison));
        if all.holds() {
            Verdict::Solvable
        } else if all.is_indeterminate() {
            Verdict::Indeterminate
        } else {
            Verdict::Unsolvable
        }
    }

    pub fn is_solvable(&self) -> bool {
        self.verdict() == Verdict::Solvable
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.conditions.iter().filter(|c| !c.comparison.holds()).map(|c| c.name).collect()
    }
}

/// Minus: `c* = −c` and `H⁽⁻⁾((aa† + dd†)cbb†) = 2c`.
/// Plus: `c* = c` and `H⁽⁺⁾((aa† + dd†)cbb†) = 2c`.
pub fn solvability<R: StarOps>(ops: &R, sign: Sign, report: &HypothesisReport<R::Elem>, c: &R::Elem) -> Solvability {
    let HypothesisReport { a, b, a_dagger, b_dagger, d, d_dagger, .. } = report;
    let c_star = ops.star(c);
    let (adjoint_name, adjoint) = match sign {
        Sign::Minus => ("c_star_neq_minus_c", ops.compare(&c_star, &ops.neg(c))),
        Sign::Plus => ("c_star_neq_c", ops.compare(&c_star, c)),
    };
    let proj = ops.add(&ops.mul(a, a_dagger), &ops.mul(d, d_dagger));
    let inner = ops.mul_all(&[&proj, c, b, b_dagger]);
    let h = match sign {
        Sign::Minus => skew_part(ops, &inner),
        Sign::Plus => herm_part(ops, &inner),
    };
    let two_c = ops.add(c, c);
    Solvability {
        conditions: vec![
            Condition { name: adjoint_name, comparison: adjoint },
            Condition { name: "H_condition", comparison: ops.compare(&h, &two_c) },
        ],
    }
}

pub fn is_solvable<R: StarOps>(ops: &R, sign: Sign, report: &HypothesisReport<R::Elem>, c: &R::Elem) -> bool {
    solvability(ops, sign, report, c).is_solvable()
}

/// Which equation a family solves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationKind {
    /// `axb* − bx*a* = c`
    Minus,
    /// `axb* + bx*a* = c`
    Plus,
    /// `xa* + ax* = b`
    SymRight,
    /// `a*x + x*a = b`
    SymLeft,
}

/// An equation `A x B* ∓ B x* A* = C` in two-sided form. The symmetric
/// kinds are stored with their coefficients rewritten into this form.
#[derive(Clone, Debug)]
pub struct Equation<E> {
    pub sign: Sign,
    pub a: E,
    pub b: E,
    pub c: E,
}

impl<E: Clone + std::fmt::Debug> Equation<E> {
    pub fn lhs<R: StarOps<Elem = E>>(&self, ops: &R, x: &E) -> E {
        apply_equation(ops, self.sign, &self.a, &self.b, x)
    }

    pub fn residual<R: StarOps<Elem = E>>(&self, ops: &R, x: &E) -> Comparison {
        ops.compare(&self.lhs(ops, x), &self.c)
    }
}

#[derive(Clone, Debug)]
enum Generator<E> {
    TwoSided(Box<HypothesisReport<E>>),
    /// `Φ(v) = v − ½(1 + E_a)va†a − ½av*(a†)*`
    SymRight { a: E, a_dagger: E, one_plus_e: E },
    /// `Φ(w) = w − ½aa†w(1 + F_a) − ½(a†)*w*a`
    SymLeft { a: E, a_dagger: E, one_plus_f: E },
}

/// Particular solution plus the homogeneous map: every `x₀ + Φ(v)` solves
/// the equation, and every solution has this form.
#[derive(Clone, Debug)]
pub struct SolutionFamily<R: StarOps> {
    ops: R,
    kind: EquationKind,
    equation: Equation<R::Elem>,
    x0: R::Elem,
    generator: Generator<R::Elem>,
}

impl<R: StarOps> SolutionFamily<R> {
    pub fn kind(&self) -> EquationKind {
        self.kind
    }

    pub fn ops(&self) -> &R {
        &self.ops
    }

    pub fn equation(&self) -> &Equation<R::Elem> {
        &self.equation
    }

    pub fn x0(&self) -> &R::Elem {
        &self.x0
    }

    /// Hypothesis data, for the two-sided kinds.
    pub fn report(&self) -> Option<&HypothesisReport<R::Elem>> {
        match &self.generator {
            Generator::TwoSided(r) => Some(r),
            _ => None,
        }
    }

    pub fn phi(&self, v: &R::Elem) -> R::Elem {
        let ops = &self.ops;
        match &self.generator {
            Generator::TwoSided(report) => phi(ops, self.equation.sign, report, v),
            Generator::SymRight { a, a_dagger, one_plus_e } => {
                let t1 = ops.mul_all(&[one_plus_e, v, a_dagger, a]);
                let t2 = ops.mul_all(&[a, &ops.star(v), &ops.star(a_dagger)]);
                ops.sub(v, &ops.half_of(&ops.add(&t1, &t2)))
            }
            Generator::SymLeft { a, a_dagger, one_plus_f } => {
                let t1 = ops.mul_all(&[a, a_dagger, v, one_plus_f]);
                let t2 = ops.mul_all(&[&ops.star(a_dagger), &ops.star(v), a]);
                ops.sub(v, &ops.half_of(&ops.add(&t1, &t2)))
            }
        }
    }

    /// `x₀ + Φ(v)`
    pub fn eval(&self, v: &R::Elem) -> R::Elem {
        self.ops.add(&self.x0, &self.phi(v))
    }

    pub fn residual(&self, x: &R::Elem) -> Comparison {
        self.equation.residual(&self.ops, x)
    }

    pub fn satisfies(&self, x: &R::Elem) -> bool {
        self.residual(x).holds()
    }
}

impl<R: RandomElement> SolutionFamily<R> {
    /// The pseudorandom parameter `v` drawn for `seed`.
    pub fn sample_parameter(&self, seed: u64) -> R::Elem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.ops.random_like(&self.x0, &mut rng)
    }
}

/// Evaluates the family at a seeded pseudorandom parameter and checks the
/// result against the equation before returning it.
pub fn family_sample<R: RandomElement>(fam: &SolutionFamily<R>, seed: u64) -> Result<R::Elem, SolveError> {
    let x = fam.eval(&fam.sample_parameter(seed));
    let check = fam.residual(&x);
    if check.holds() {
        Ok(x)
    } else {
        Err(SolveError::VerificationFailed { residual: check.residual })
    }
}

/// Result of attempting to solve an equation.
#[derive(Clone, Debug)]
pub enum Outcome<R: StarOps> {
    Solved(SolutionFamily<R>),
    /// The solvability conditions fail (or are indeterminate on floats).
    Unsolvable {
        report: Option<Box<HypothesisReport<R::Elem>>>,
        solvability: Solvability,
    },
    /// The standing hypotheses fail, so the formulas do not apply.
    HypothesesFail(Box<HypothesisReport<R::Elem>>),
}

impl<R: StarOps> Outcome<R> {
    pub fn family(&self) -> Option<&SolutionFamily<R>> {
        match self {
            Outcome::Solved(f) => Some(f),
            _ => None,
        }
    }

    pub fn into_family(self) -> Option<SolutionFamily<R>> {
        match self {
            Outcome::Solved(f) => Some(f),
            _ => None,
        }
    }
}

/// Two-sided solve from an already computed report. Used by both the
/// square-ring and the rectangular entry points.
pub fn solve_with_report<R: StarOps>(
    ops: R,
    sign: Sign,
    report: HypothesisReport<R::Elem>,
    c: &R::Elem,
) -> Outcome<R> {
    if !report.holds() {
        return Outcome::HypothesesFail(Box::new(report));
    }
    let solvability = solvability(&ops, sign, &report, c);
    if !solvability.is_solvable() {
        return Outcome::Unsolvable { report: Some(Box::new(report)), solvability };
    }
    let x0 = particular(&ops, &report, c);
    let equation = Equation { sign, a: report.a.clone(), b: report.b.clone(), c: c.clone() };
    let kind = match sign {
        Sign::Minus => EquationKind::Minus,
        Sign::Plus => EquationKind::Plus,
    };
    Outcome::Solved(SolutionFamily { ops, kind, equation, x0, generator: Generator::TwoSided(Box::new(report)) })
}

/// Solves `axb* ∓ bx*a* = c`.
pub fn solve<R: StarRing + Clone>(
    ring: &R,
    sign: Sign,
    a: &R::Elem,
    b: &R::Elem,
    c: &R::Elem,
) -> Result<Outcome<R>, SolveError> {
    member(ring, "c", c)?;
    let report = check_hypotheses(ring, a, b)?;
    Ok(solve_with_report(ring.clone(), sign, report, c))
}

/// Data shared by the symmetric kinds: `a†`, the projector `E_a` (right
/// kind) or `F_a` (left kind) and the two conditions.
struct SymParts<E> {
    a_dagger: E,
    projector: E,
    solvability: Solvability,
}

fn sym_parts<R: StarRing>(ring: &R, kind: EquationKind, a: &R::Elem, b: &R::Elem) -> Result<SymParts<R::Elem>, SolveError> {
    member(ring, "a", a)?;
    member(ring, "b", b)?;
    let a_dagger = ring.mp_inverse(a).ok_or(SolveError::NotMpInvertible("a"))?;
    let (projector, name) = match kind {
        EquationKind::SymRight => (proj_complement_left(ring, a, &a_dagger), "E_condition"),
        EquationKind::SymLeft => (proj_complement_right(ring, a, &a_dagger), "F_condition"),
        other => return Err(SolveError::Shape(format!("{other:?} is not a symmetric kind"))),
    };
    let solvability = Solvability {
        conditions: vec![
            Condition { name: "b_star_neq_b", comparison: ring.compare(&ring.star(b), b) },
            Condition {
                name,
                comparison: ring.compare(&ring.mul_all(&[&projector, b, &projector]), &ring.zero()),
            },
        ],
    };
    Ok(SymParts { a_dagger, projector, solvability })
}

/// Conditions for `xa* + ax* = b` (`SymRight`) or `a*x + x*a = b`
/// (`SymLeft`) without building the family.
pub fn sym_solvability<R: StarRing>(ring: &R, kind: EquationKind, a: &R::Elem, b: &R::Elem) -> Result<Solvability, SolveError> {
    Ok(sym_parts(ring, kind, a, b)?.solvability)
}

/// Solves `xa* + ax* = b`: solvable iff `b* = b` and `E_a b E_a = 0`.
pub fn solve_sym_right<R: StarRing + Clone>(ring: &R, a: &R::Elem, b: &R::Elem) -> Result<Outcome<R>, SolveError> {
    let SymParts { a_dagger, projector: e_a, solvability } = sym_parts(ring, EquationKind::SymRight, a, b)?;
    if !solvability.is_solvable() {
        return Ok(Outcome::Unsolvable { report: None, solvability });
    }
    let one_plus_e = ring.add(&ring.one(), &e_a);
    // x₀ = ½(1 + E_a) b (a†)*
    let x0 = ring.half_of(&ring.mul_all(&[&one_plus_e, b, &ring.star(&a_dagger)]));
    let equation = Equation { sign: Sign::Plus, a: ring.one(), b: a.clone(), c: b.clone() };
    Ok(Outcome::Solved(SolutionFamily {
        ops: ring.clone(),
        kind: EquationKind::SymRight,
        equation,
        x0,
        generator: Generator::SymRight { a: a.clone(), a_dagger, one_plus_e },
    }))
}

/// Solves `a*x + x*a = b`: solvable iff `b* = b` and `F_a b F_a = 0`.
pub fn solve_sym_left<R: StarRing + Clone>(ring: &R, a: &R::Elem, b: &R::Elem) -> Result<Outcome<R>, SolveError> {
    let SymParts { a_dagger, projector: f_a, solvability } = sym_parts(ring, EquationKind::SymLeft, a, b)?;
    if !solvability.is_solvable() {
        return Ok(Outcome::Unsolvable { report: None, solvability });
    }
    let one_plus_f = ring.add(&ring.one(), &f_a);
    // x₀ = ½(a†)* b (1 + F_a)
    let x0 = ring.half_of(&ring.mul_all(&[&ring.star(&a_dagger), b, &one_plus_f]));
    let equation = Equation { sign: Sign::Plus, a: ring.star(a), b: ring.one(), c: b.clone() };
    Ok(Outcome::Solved(SolutionFamily {
        ops: ring.clone(),
        kind: EquationKind::SymLeft,
        equation,
        x0,
        generator: Generator::SymLeft { a: a.clone(), a_dagger, one_plus_f },
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{GaussianRational as Q, Involution, Matrix, MatrixRing, Scalar};
    use crate::ring::is_mp_inverse;

    const CT: Involution = Involution::ConjugateTranspose;

    fn ring(n: usize) -> MatrixRing<Q> {
        MatrixRing::new(n, CT)
    }

    fn s(x: Q) -> Matrix<Q> {
        Matrix::scalar(x, CT).unwrap()
    }

    fn q(n: i64) -> Q {
        Q::from_i64(n)
    }

    fn qi(n: i64) -> Q {
        Q::from_ratios(0, 1, n, 1)
    }

    fn diag(xs: &[Q]) -> Matrix<Q> {
        Matrix::diag(xs, CT)
    }

    #[test]
    fn hypotheses_identity_and_zero() {
        let r = ring(1);
        let rep = check_hypotheses(&r, &r.one(), &r.one()).unwrap();
        assert!(rep.holds());
        assert!(rep.d.is_zero() && rep.d_dagger.is_zero());

        let r2 = ring(2);
        let rep = check_hypotheses(&r2, &r2.zero(), &r2.zero()).unwrap();
        assert!(rep.holds());
        assert!(rep.d.is_zero());
    }

    #[test]
    fn hypotheses_range_failure() {
        let r = ring(2);
        let rep = check_hypotheses(&r, &diag(&[q(1), q(0)]), &diag(&[q(0), q(1)])).unwrap();
        assert!(!rep.range_ok());
        assert_eq!(rep.failed(), vec!["range_condition"]);
    }

    #[test]
    fn phi_collapses_for_unit_coefficients() {
        let r = ring(1);
        let rep = check_hypotheses(&r, &r.one(), &r.one()).unwrap();
        let v = s(Q::from_ratios(3, 1, 2, 1));
        let herm = r.half_of(&herm_part(&r, &v));
        let skew = r.half_of(&skew_part(&r, &v));
        assert_eq!(phi(&r, Sign::Minus, &rep, &v), herm);
        assert_eq!(phi(&r, Sign::Plus, &rep, &v), skew);
        assert!(phi(&r, Sign::Minus, &rep, &r.zero()).is_zero());
    }

    #[test]
    fn particular_examples() {
        let r = ring(1);
        let rep = check_hypotheses(&r, &r.one(), &r.one()).unwrap();
        assert_eq!(particular(&r, &rep, &s(qi(2))), s(qi(1)));
        assert_eq!(particular(&r, &rep, &s(q(2))), s(q(1)));

        let r2 = ring(2);
        let a = diag(&[q(1), q(0)]);
        let rep = check_hypotheses(&r2, &a, &a).unwrap();
        assert!(rep.d.is_zero());
        let c = diag(&[qi(2), q(0)]);
        let x0 = particular(&r2, &rep, &c);
        assert_eq!(x0, diag(&[qi(1), q(0)]));
        assert_eq!(apply_equation(&r2, Sign::Minus, &a, &a, &x0), c);
    }

    #[test]
    fn solvability_examples() {
        let r = ring(1);
        let rep = check_hypotheses(&r, &r.one(), &r.one()).unwrap();
        assert!(is_solvable(&r, Sign::Minus, &rep, &s(qi(2))));
        let sv = solvability(&r, Sign::Minus, &rep, &s(q(1)));
        assert!(sv.failed().contains(&"c_star_neq_minus_c"));

        let r2 = ring(2);
        let a = diag(&[q(1), q(0)]);
        let rep = check_hypotheses(&r2, &a, &a).unwrap();
        let c = Matrix::from_ints(&[&[0, 1], &[-1, 0]], CT);
        let sv = solvability(&r2, Sign::Minus, &rep, &c);
        assert_eq!(sv.failed(), vec!["H_condition"]);
        assert_eq!(sv.verdict(), Verdict::Unsolvable);
    }

    #[test]
    fn solve_scalar_examples() {
        let r = ring(1);
        let fam = solve(&r, Sign::Minus, &r.one(), &r.one(), &s(qi(2))).unwrap().into_family().unwrap();
        assert_eq!(fam.x0(), &s(qi(1)));
        let x = fam.eval(&s(q(3)));
        assert_eq!(x, s(Q::from_ratios(3, 1, 1, 1)));
        assert!(fam.satisfies(&x));

        match solve(&r, Sign::Minus, &r.one(), &r.one(), &s(q(1))).unwrap() {
            Outcome::Unsolvable { solvability, .. } => assert!(solvability.failed().contains(&"c_star_neq_minus_c")),
            other => panic!("expected unsolvable, got {other:?}"),
        }
    }

    #[test]
    fn zero_instance_phi_is_identity() {
        let r = ring(2);
        let z = r.zero();
        let fam = solve(&r, Sign::Minus, &z, &z, &z).unwrap().into_family().unwrap();
        assert!(fam.x0().is_zero());
        for seed in 0..3 {
            let v = fam.sample_parameter(seed);
            assert_eq!(fam.phi(&v), v);
            assert_eq!(family_sample(&fam, seed).unwrap(), v);
        }
    }

    #[test]
    fn solve_reports_hypothesis_failure_and_membership() {
        let r = ring(2);
        let out = solve(&r, Sign::Minus, &diag(&[q(1), q(0)]), &diag(&[q(0), q(1)]), &r.zero()).unwrap();
        assert!(matches!(out, Outcome::HypothesesFail(_)));
        let err = solve(&r, Sign::Minus, &r.one(), &r.one(), &s(q(1))).unwrap_err();
        assert!(matches!(err, SolveError::NotAMember { operand: "c", .. }));
    }

    #[test]
    fn family_sample_is_deterministic() {
        let r = ring(1);
        let fam = solve(&r, Sign::Minus, &r.one(), &r.one(), &s(qi(2))).unwrap().into_family().unwrap();
        let x1 = family_sample(&fam, 11).unwrap();
        assert_eq!(x1, family_sample(&fam, 11).unwrap());
        assert_eq!(r.sub(&x1, &r.star(&x1)), s(qi(2)));
    }

    #[test]
    fn sym_right_examples() {
        let r1 = ring(1);
        let b = s(q(5));
        let fam = solve_sym_right(&r1, &r1.one(), &b).unwrap().into_family().unwrap();
        assert_eq!(fam.x0(), &s(Q::from_ratios(5, 2, 0, 1)));

        let r = ring(2);
        let a = diag(&[q(1), q(0)]);
        let b = Matrix::from_ints(&[&[2, 1], &[1, 0]], CT);
        let fam = solve_sym_right(&r, &a, &b).unwrap().into_family().unwrap();
        assert_eq!(fam.x0(), &Matrix::from_ints(&[&[1, 0], &[1, 0]], CT));
        let x0 = fam.x0();
        assert_eq!(r.add(&r.mul(x0, &r.star(&a)), &r.mul(&a, &r.star(x0))), b);

        match solve_sym_right(&r, &a, &diag(&[q(0), q(1)])).unwrap() {
            Outcome::Unsolvable { solvability, .. } => assert_eq!(solvability.failed(), vec!["E_condition"]),
            other => panic!("expected unsolvable, got {other:?}"),
        }
    }

    #[test]
    fn sym_left_examples() {
        let r1 = ring(1);
        let fam = solve_sym_left(&r1, &r1.one(), &s(q(2))).unwrap().into_family().unwrap();
        assert_eq!(fam.x0(), &s(q(1)));

        let r = ring(2);
        let a = diag(&[q(1), q(0)]);
        let fam = solve_sym_left(&r, &a, &diag(&[q(2), q(0)])).unwrap().into_family().unwrap();
        assert_eq!(fam.x0(), &diag(&[q(1), q(0)]));
        for seed in 0..4 {
            family_sample(&fam, seed).unwrap();
        }
        match solve_sym_left(&r, &a, &diag(&[q(0), q(2)])).unwrap() {
            Outcome::Unsolvable { solvability, .. } => assert_eq!(solvability.failed(), vec!["F_condition"]),
            other => panic!("expected unsolvable, got {other:?}"),
        }
    }

    #[test]
    fn lemma_identities_on_unitary_pair() {
        let r = ring(2);
        // (1/5)[[3,4],[-4,3]] is orthogonal, so the hypotheses hold for any b
        let a = Matrix::from_ints(&[&[3, 4], &[-4, 3]], CT).scale(&Q::from_ratios(1, 5, 0, 1));
        let b = Matrix::from_ints(&[&[1, 2], &[2, 4]], CT);
        let rep = check_hypotheses(&r, &a, &b).unwrap();
        assert!(rep.holds());
        assert!(is_mp_inverse(&r, &rep.d, &rep.d_dagger));
        let dd = r.mul(&rep.d, &rep.d_dagger);
        assert!(r.mul(&rep.d_dagger, &b).is_zero());
        assert!(r.mul(&r.star(&b), &dd).is_zero());
        assert_eq!(r.mul(&dd, &a), rep.d);
        assert_eq!(r.mul(&rep.d_dagger, &a), r.mul(&rep.d_dagger, &rep.d));
    }

    /// `Q × Q` with the exchange involution `(x, y)* = (y, x)`. An element
    /// is MP-invertible iff both or neither coordinates vanish.
    #[derive(Clone, Debug)]
    struct ExchangeRing;

    impl StarOps for ExchangeRing {
        type Elem = (Q, Q);

        fn add(&self, a: &(Q, Q), b: &(Q, Q)) -> (Q, Q) {
            (a.0.plus(&b.0), a.1.plus(&b.1))
        }

        fn neg(&self, a: &(Q, Q)) -> (Q, Q) {
            (a.0.negated(), a.1.negated())
        }

        fn mul(&self, a: &(Q, Q), b: &(Q, Q)) -> (Q, Q) {
            (a.0.times(&b.0), a.1.times(&b.1))
        }

        fn star(&self, a: &(Q, Q)) -> (Q, Q) {
            (a.1.clone(), a.0.clone())
        }

        fn half_of(&self, a: &(Q, Q)) -> (Q, Q) {
            (a.0.halved(), a.1.halved())
        }

        fn compare(&self, a: &(Q, Q), b: &(Q, Q)) -> Comparison {
            Comparison::exact(a == b, 1.0)
        }
    }

    impl StarRing for ExchangeRing {
        fn zero(&self) -> (Q, Q) {
            (q(0), q(0))
        }

        fn one(&self) -> (Q, Q) {
            (q(1), q(1))
        }

        fn mp_inverse(&self, a: &(Q, Q)) -> Option<(Q, Q)> {
            match (a.0.recip(), a.1.recip()) {
                (Some(x), Some(y)) => Some((x, y)),
                (None, None) => Some(self.zero()),
                _ => None,
            }
        }
    }

    #[test]
    fn formulas_run_in_a_non_matrix_ring() {
        let r = ExchangeRing;
        let a = (q(2), q(3));
        let b = (q(5), q(7));
        // c* = −c forces c = (t, −t)
        let c = (q(4), q(-4));
        let fam = solve(&r, Sign::Minus, &a, &b, &c).unwrap().into_family().unwrap();
        assert!(fam.satisfies(fam.x0()));
        let v = (q(1), q(-6));
        assert!(fam.satisfies(&fam.eval(&v)));

        let err = check_hypotheses(&r, &(q(1), q(0)), &b).unwrap_err();
        assert_eq!(err, SolveError::NotMpInvertible("a"));
    }
}
