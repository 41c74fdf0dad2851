//! Scalar backends: exact Gaussian rationals and finite complex floats.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

/// Field operations shared by the two scalar backends.
///
/// Method names avoid the `std::ops` names so that trait and operator
/// resolution never collide on the concrete types.
pub trait Scalar: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    /// True when arithmetic is exact and equality is structural.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;

    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;
    fn conj(&self) -> Self;
    fn halved(&self) -> Self;
    /// Multiplicative inverse, `None` for zero.
    fn recip(&self) -> Option<Self>;

    fn is_zero(&self) -> bool;
    fn is_real(&self) -> bool;
    fn is_finite(&self) -> bool;
    /// `max(|re|, |im|)` as a float; used for pivoting and residuals.
    fn magnitude(&self) -> f64;

    /// Draws a small pseudorandom value. Exact backend: numerators in
    /// `[-9, 9]`, denominators in `{1, 2, 3}`. Float backend: unit box.
    fn sample<G: Rng + ?Sized>(rng: &mut G, real_only: bool) -> Self;
}

/// Complex number with exact rational real and imaginary parts.
///
/// `BigRational` keeps itself reduced with a positive denominator, so
/// derived equality is structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        Self { re, im: BigRational::zero() }
    }

    /// `re_num/re_den + (im_num/im_den) i` from machine integers.
    ///
    /// Panics if a denominator is zero.
    pub fn from_ratios(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> Self {
        Self {
            re: BigRational::new(BigInt::from(re_num), BigInt::from(re_den)),
            im: BigRational::new(BigInt::from(im_num), BigInt::from(im_den)),
        }
    }

    pub fn i() -> Self {
        Self::from_ratios(0, 1, 1, 1)
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(ratio_to_f64(&self.re), ratio_to_f64(&self.im))
    }
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => fmt_imag(f, &self.im, false),
            (false, false) => {
                write!(f, "{}", self.re)?;
                fmt_imag(f, &self.im, true)
            }
        }
    }
}

fn fmt_imag(f: &mut fmt::Formatter<'_>, im: &BigRational, with_sign: bool) -> fmt::Result {
    if with_sign && !im.is_negative() {
        write!(f, "+")?;
    }
    let numer = im.numer();
    if numer.abs().is_one() {
        write!(f, "{}i", if numer.is_negative() { "-" } else { "" })?;
    } else {
        write!(f, "{numer}i")?;
    }
    if !im.is_integer() {
        write!(f, "/{}", im.denom())?;
    }
    Ok(())
}

impl Scalar for GaussianRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Self::real(BigRational::zero())
    }

    fn one() -> Self {
        Self::real(BigRational::one())
    }

    fn from_i64(n: i64) -> Self {
        Self::real(BigRational::from_integer(BigInt::from(n)))
    }

    fn plus(&self, other: &Self) -> Self {
        Self::new(&self.re + &other.re, &self.im + &other.im)
    }

    fn minus(&self, other: &Self) -> Self {
        Self::new(&self.re - &other.re, &self.im - &other.im)
    }

    fn times(&self, other: &Self) -> Self {
        Self::new(
            &self.re * &other.re - &self.im * &other.im,
            &self.re * &other.im + &self.im * &other.re,
        )
    }

    fn negated(&self) -> Self {
        Self::new(-&self.re, -&self.im)
    }

    fn conj(&self) -> Self {
        Self::new(self.re.clone(), -&self.im)
    }

    fn halved(&self) -> Self {
        let two = BigRational::from_integer(BigInt::from(2));
        Self::new(&self.re / &two, &self.im / &two)
    }

    fn recip(&self) -> Option<Self> {
        let n = self.norm_sqr();
        if n.is_zero() {
            return None;
        }
        Some(Self::new(&self.re / &n, -&self.im / &n))
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn magnitude(&self) -> f64 {
        ratio_to_f64(&self.re.abs()).max(ratio_to_f64(&self.im.abs()))
    }

    fn sample<G: Rng + ?Sized>(rng: &mut G, real_only: bool) -> Self {
        let part = |rng: &mut G| {
            let num = rng.gen_range(-9i64..=9);
            let den = rng.gen_range(1i64..=3);
            BigRational::new(BigInt::from(num), BigInt::from(den))
        };
        let re = part(rng);
        let im = if real_only { BigRational::zero() } else { part(rng) };
        Self::new(re, im)
    }
}

/// Complex float with finite components.
///
/// Finiteness is enforced where matrices are built; arithmetic itself is
/// plain IEEE.
pub type ComplexFloat = Complex64;

impl Scalar for Complex64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }

    fn plus(&self, other: &Self) -> Self {
        self + other
    }

    fn minus(&self, other: &Self) -> Self {
        self - other
    }

    fn times(&self, other: &Self) -> Self {
        self * other
    }

    fn negated(&self) -> Self {
        -self
    }

    fn conj(&self) -> Self {
        Complex64::conj(self)
    }

    fn halved(&self) -> Self {
        self * 0.5
    }

    fn recip(&self) -> Option<Self> {
        if self.re == 0.0 && self.im == 0.0 {
            None
        } else {
            Some(self.inv())
        }
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    fn is_real(&self) -> bool {
        self.im == 0.0
    }

    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    fn magnitude(&self) -> f64 {
        self.re.abs().max(self.im.abs())
    }

    fn sample<G: Rng + ?Sized>(rng: &mut G, real_only: bool) -> Self {
        let re = rng.gen_range(-1.0..=1.0);
        let im = if real_only { 0.0 } else { rng.gen_range(-1.0..=1.0) };
        Complex64::new(re, im)
    }
}
