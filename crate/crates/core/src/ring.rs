//! Rings with involution and the operators derived from an MP-inverse.
//!
//! Every operation is pure: elements go in by reference and a new element
//! comes out. The solver formulas only need [`StarOps`]; anything that also
//! needs a unit or MP-inverses asks for [`StarRing`].

use std::fmt;

use serde::Serialize;

/// Residuals at most this many tolerances away from zero are reported as
/// indeterminate rather than as a clear failure.
pub const INDETERMINATE_BAND: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    Equal,
    Unequal,
    /// Float residual between `tol` and `INDETERMINATE_BAND * tol`.
    Indeterminate,
}

/// Outcome of comparing two elements.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub agreement: Agreement,
    /// Relative max-abs difference; always 0 for an exact match.
    pub residual: f64,
}

impl Comparison {
    pub fn exact(equal: bool, residual: f64) -> Self {
        let agreement = if equal { Agreement::Equal } else { Agreement::Unequal };
        Self { agreement, residual: if equal { 0.0 } else { residual } }
    }

    pub fn from_residual(residual: f64, tol: f64) -> Self {
        let agreement = if residual <= tol {
            Agreement::Equal
        } else if residual <= tol * INDETERMINATE_BAND {
            Agreement::Indeterminate
        } else {
            Agreement::Unequal
        };
        Self { agreement, residual }
    }

    pub fn holds(&self) -> bool {
        self.agreement == Agreement::Equal
    }

    pub fn is_indeterminate(&self) -> bool {
        self.agreement == Agreement::Indeterminate
    }

    /// Conjunction: the worse agreement wins, residuals take the max.
    pub fn and(self, other: Comparison) -> Comparison {
        use Agreement::*;
        let agreement = match (self.agreement, other.agreement) {
            (Unequal, _) | (_, Unequal) => Unequal,
            (Indeterminate, _) | (_, Indeterminate) => Indeterminate,
            _ => Equal,
        };
        Comparison { agreement, residual: self.residual.max(other.residual) }
    }
}

/// Additive group with an associative product, an involution and a
/// central halving operator.
///
/// Products between incompatible elements are a caller bug; implementations
/// may panic on them. Rectangular matrices implement this trait (they are
/// not a ring), which is why the unit lives on [`StarRing`].
pub trait StarOps {
    type Elem: Clone + fmt::Debug;

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn star(&self, a: &Self::Elem) -> Self::Elem;
    /// `2⁻¹·a`.
    fn half_of(&self, a: &Self::Elem) -> Self::Elem;
    fn compare(&self, a: &Self::Elem, b: &Self::Elem) -> Comparison;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn equals(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.compare(a, b).holds()
    }

    /// Left-to-right product of a non-empty chain.
    fn mul_all(&self, factors: &[&Self::Elem]) -> Self::Elem {
        let (first, rest) = factors.split_first().expect("empty product");
        rest.iter().fold((*first).clone(), |acc, f| self.mul(&acc, f))
    }
}

/// A unital ring with involution in which 2 is invertible.
pub trait StarRing: StarOps {
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    /// MP-inverse if the element has one.
    fn mp_inverse(&self, a: &Self::Elem) -> Option<Self::Elem>;

    /// Rejects values that are not elements of this ring.
    fn check_member(&self, _a: &Self::Elem) -> Result<(), String> {
        Ok(())
    }
}

/// Draws pseudorandom elements shaped like a template element.
pub trait RandomElement: StarOps {
    fn random_like(&self, template: &Self::Elem, rng: &mut dyn rand::RngCore) -> Self::Elem;
}

/// The four Penrose equations for the candidate pair `(a, b)`, in order
/// `aba = a`, `bab = b`, `(ab)* = ab`, `(ba)* = ba`.
pub fn penrose_checks<R: StarOps>(ring: &R, a: &R::Elem, b: &R::Elem) -> [Comparison; 4] {
    let ab = ring.mul(a, b);
    let ba = ring.mul(b, a);
    [
        ring.compare(&ring.mul(&ab, a), a),
        ring.compare(&ring.mul(&ba, b), b),
        ring.compare(&ring.star(&ab), &ab),
        ring.compare(&ring.star(&ba), &ba),
    ]
}

pub fn is_mp_inverse<R: StarOps>(ring: &R, a: &R::Elem, b: &R::Elem) -> bool {
    penrose_checks(ring, a, b).iter().all(Comparison::holds)
}

/// An element together with its verified MP-inverse.
#[derive(Clone, Debug)]
pub struct MpPair<E> {
    element: E,
    mp: E,
}

impl<E: Clone + fmt::Debug> MpPair<E> {
    /// Pairs `element` with `mp` if the Penrose equations hold.
    pub fn new<R: StarOps<Elem = E>>(ring: &R, element: E, mp: E) -> Option<Self> {
        is_mp_inverse(ring, &element, &mp).then_some(Self { element, mp })
    }

    /// Computes the MP-inverse through the ring.
    pub fn of<R: StarRing<Elem = E>>(ring: &R, element: E) -> Option<Self> {
        let mp = ring.mp_inverse(&element)?;
        Some(Self { element, mp })
    }

    pub fn element(&self) -> &E {
        &self.element
    }

    pub fn mp(&self) -> &E {
        &self.mp
    }
}

/// `E_a = 1 − aa†`.
pub fn proj_complement_left<R: StarRing>(ring: &R, a: &R::Elem, a_dagger: &R::Elem) -> R::Elem {
    ring.sub(&ring.one(), &ring.mul(a, a_dagger))
}

/// `F_a = 1 − a†a`.
pub fn proj_complement_right<R: StarRing>(ring: &R, a: &R::Elem, a_dagger: &R::Elem) -> R::Elem {
    ring.sub(&ring.one(), &ring.mul(a_dagger, a))
}

/// `a + a*`
pub fn herm_part<R: StarOps>(ring: &R, a: &R::Elem) -> R::Elem {
    ring.add(a, &ring.star(a))
}

/// `a − a*`
pub fn skew_part<R: StarOps>(ring: &R, a: &R::Elem) -> R::Elem {
    ring.sub(a, &ring.star(a))
}
