//! Number types the LP and geometry code run on.

use core::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, NumRef, One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub trait Scalar: Clone + PartialOrd + Debug + Display + NumRef + Signed {
    /// True when comparisons are exact.
    const EXACT: bool;

    fn from_float(v: f64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn to_float(&self) -> f64;

    /// Strictly positive beyond rounding noise.
    fn is_pos(&self) -> bool;
    fn is_neg(&self) -> bool;

    fn is_negligible(&self) -> bool {
        !self.is_pos() && !self.is_neg()
    }

    fn half() -> Self {
        Self::from_ratio(1, 2)
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    /// ⌊self⌋ as a count; `None` when negative.
    fn floor_count(&self) -> Option<u64>;
    /// `Some(n)` when the value is the nonnegative integer n.
    fn as_count(&self) -> Option<u64>;

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

const F64_EPS: f64 = 1e-11;

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_float(v: f64) -> Self {
        v
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_float(&self) -> f64 {
        *self
    }
    fn is_pos(&self) -> bool {
        *self > F64_EPS
    }
    fn is_neg(&self) -> bool {
        *self < -F64_EPS
    }
    fn floor_count(&self) -> Option<u64> {
        let f = Float::floor(*self + 1e-9);
        (f >= 0.0).then_some(f as u64)
    }
    fn as_count(&self) -> Option<u64> {
        let r = Float::round(*self);
        let close = Float::abs(*self - r) <= 1e-9 * Float::max(1.0, r);
        (close && r >= 0.0).then_some(r as u64)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    /// Exact binary value of `v`; panics on NaN or infinity.
    fn from_float(v: f64) -> Self {
        <BigRational as FromPrimitive>::from_f64(v).expect("finite float")
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn to_float(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_pos(&self) -> bool {
        self.is_positive()
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
    fn floor_count(&self) -> Option<u64> {
        if self.is_negative() {
            return None;
        }
        self.floor().to_integer().to_u64()
    }
    fn as_count(&self) -> Option<u64> {
        if self.is_integer() && !self.is_negative() {
            self.to_integer().to_u64()
        } else {
            None
        }
    }
}

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::from_ratio(num, den)
}

pub fn rational_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Best rational approximation of `v` with denominator at most `max_den`.
pub fn approximate(v: f64, max_den: u64) -> Rational {
    let neg = v < 0.0;
    let exact = <Rational as Scalar>::from_float(v.abs());
    if *exact.denom() <= BigInt::from(max_den) {
        return if neg { -exact } else { exact };
    }
    let (mut p0, mut q0, mut p1, mut q1) = (
        BigInt::zero(),
        BigInt::one(),
        BigInt::one(),
        BigInt::zero(),
    );
    let mut n = exact.numer().clone();
    let mut d = exact.denom().clone();
    let limit = BigInt::from(max_den);
    loop {
        let a = &n / &d;
        let q2 = &q0 + &a * &q1;
        if q2 > limit {
            break;
        }
        let p2 = &p0 + &a * &p1;
        p0 = core::mem::replace(&mut p1, p2);
        q0 = core::mem::replace(&mut q1, q2);
        let r = &n - &a * &d;
        n = core::mem::replace(&mut d, r);
    }
    // semiconvergent check, as in Python's Fraction.limit_denominator
    let k = (&limit - &q0) / &q1;
    let b1 = Rational::new(&p0 + &k * &p1, &q0 + &k * &q1);
    let b2 = Rational::new(p1, q1);
    let r = if (&b2 - &exact).abs() <= (&b1 - &exact).abs() {
        b2
    } else {
        b1
    };
    if neg {
        -r
    } else {
        r
    }
}
