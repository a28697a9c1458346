//! Numeric backends.
//!
//! Everything downstream of the symbolic pipeline (compiled programs, the
//! integrator, the exact-solution oracles) is generic over [`Scalar`]. Two
//! backends are provided: native `f64` and [`Extended`], an MPFR float with a
//! fixed, caller-chosen number of bits.

use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rug::ops::Pow;
use rug::{Assign, Float, Integer};

/// Elementary functions understood by the symbolic kernel and every backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

impl fmt::Display for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A numeric evaluation failed in a way that would otherwise produce NaN or
/// an infinity.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DomainError {
    #[error("{func} is undefined at {arg}")]
    Func { func: Func, arg: f64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite result")]
    NonFinite,
}

/// Arithmetic backend used by compiled programs, the integrator and the
/// oracles.
///
/// All values that interact must have been created with the same
/// [`Scalar::Precision`].
pub trait Scalar:
    Clone
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
    + for<'a> DivAssign<&'a Self>
{
    type Precision: Copy + PartialEq + fmt::Debug + Send + Sync;

    fn precision(&self) -> Self::Precision;
    fn from_f64(prec: Self::Precision, v: f64) -> Self;
    fn from_i64(prec: Self::Precision, v: i64) -> Self;
    fn from_rational(prec: Self::Precision, r: &BigRational) -> Self;
    /// Parses a decimal literal at full backend precision.
    fn parse_decimal(prec: Self::Precision, s: &str) -> Option<Self>;
    fn to_f64(&self) -> f64;
    /// Unit roundoff of the backend (distance from 1 to the next value).
    fn epsilon(prec: Self::Precision) -> Self;
    /// Number of significant decimal digits carried by the backend.
    fn decimal_digits(prec: Self::Precision) -> usize;
    /// Decimal rendering with every significant digit the backend carries.
    fn to_full_string(&self) -> String;

    fn zero(prec: Self::Precision) -> Self {
        Self::from_i64(prec, 0)
    }
    fn one(prec: Self::Precision) -> Self {
        Self::from_i64(prec, 1)
    }

    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn tan(&self) -> Self;
    fn sinh(&self) -> Self;
    fn cosh(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn asin(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
    fn is_finite(&self) -> bool;
    fn is_zero(&self) -> bool;

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// `self = a` without allocating on backends that support it.
    fn assign_from(&mut self, a: &Self) {
        self.clone_from(a);
    }
    /// `self = a + b`, likewise.
    fn assign_add(&mut self, a: &Self, b: &Self) {
        *self = a.clone() + b;
    }
    fn assign_mul(&mut self, a: &Self, b: &Self) {
        *self = a.clone() * b;
    }
    fn assign_div(&mut self, a: &Self, b: &Self) {
        *self = a.clone() / b;
    }
    fn assign_neg(&mut self, a: &Self) {
        *self = -a.clone();
    }
    fn assign_powi(&mut self, a: &Self, n: i32) {
        *self = a.powi(n);
    }

    /// Applies an elementary function, rejecting arguments outside its real
    /// domain.
    fn apply(&self, f: Func) -> Result<Self, DomainError> {
        let bad = match f {
            Func::Log => *self <= Self::zero(self.precision()),
            Func::Sqrt => *self < Self::zero(self.precision()),
            _ => false,
        };
        if bad || !self.is_finite() {
            return Err(DomainError::Func {
                func: f,
                arg: self.to_f64(),
            });
        }
        let v = match f {
            Func::Sin => self.sin(),
            Func::Cos => self.cos(),
            Func::Tan => self.tan(),
            Func::Sinh => self.sinh(),
            Func::Cosh => self.cosh(),
            Func::Exp => self.exp(),
            Func::Log => self.ln(),
            Func::Sqrt => self.sqrt(),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(DomainError::Func {
                func: f,
                arg: self.to_f64(),
            })
        }
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    const EXACT: i64 = 1 << 53;
    match (r.numer().to_i64(), r.denom().to_i64()) {
        (Some(n), Some(d)) if n.abs() <= EXACT && d <= EXACT => n as f64 / d as f64,
        _ => r.to_f64().unwrap_or(f64::NAN),
    }
}

impl Scalar for f64 {
    type Precision = ();

    fn precision(&self) {}
    fn from_f64(_: (), v: f64) -> f64 {
        v
    }
    fn from_i64(_: (), v: i64) -> f64 {
        v as f64
    }
    fn from_rational(_: (), r: &BigRational) -> f64 {
        rational_to_f64(r)
    }
    fn parse_decimal(_: (), s: &str) -> Option<f64> {
        s.trim().parse().ok()
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn epsilon(_: ()) -> f64 {
        f64::EPSILON
    }
    fn decimal_digits(_: ()) -> usize {
        17
    }
    fn to_full_string(&self) -> String {
        format!("{:.16e}", self)
    }
    fn abs(&self) -> f64 {
        f64::abs(*self)
    }
    fn sqrt(&self) -> f64 {
        f64::sqrt(*self)
    }
    fn sin(&self) -> f64 {
        f64::sin(*self)
    }
    fn cos(&self) -> f64 {
        f64::cos(*self)
    }
    fn tan(&self) -> f64 {
        f64::tan(*self)
    }
    fn sinh(&self) -> f64 {
        f64::sinh(*self)
    }
    fn cosh(&self) -> f64 {
        f64::cosh(*self)
    }
    fn exp(&self) -> f64 {
        f64::exp(*self)
    }
    fn ln(&self) -> f64 {
        f64::ln(*self)
    }
    fn asin(&self) -> f64 {
        f64::asin(*self)
    }
    fn powi(&self, n: i32) -> f64 {
        f64::powi(*self, n)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

/// Number of MPFR bits used for a requested count of significant decimal
/// digits (one guard digit included).
pub fn bits_for_digits(digits: u32) -> u32 {
    (((digits + 1) as f64) * std::f64::consts::LOG2_10).round() as u32
}

/// Default extended precision: 35 significant decimal digits.
pub const DEFAULT_EXTENDED_DIGITS: u32 = 35;

/// Multiprecision float backed by MPFR.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Extended(pub Float);

impl Extended {
    pub fn with_digits(digits: u32, v: f64) -> Extended {
        Extended(Float::with_val(bits_for_digits(digits), v))
    }

    pub fn bits(&self) -> u32 {
        self.0.prec()
    }
}

impl fmt::Debug for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Extended({})", self.to_full_string())
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_full_string())
    }
}

macro_rules! extended_binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident) => {
        impl $tr for Extended {
            type Output = Extended;
            fn $m(self, rhs: Extended) -> Extended {
                Extended($tr::$m(self.0, rhs.0))
            }
        }
        impl<'a> $tr<&'a Extended> for Extended {
            type Output = Extended;
            fn $m(self, rhs: &'a Extended) -> Extended {
                Extended($tr::$m(self.0, &rhs.0))
            }
        }
        impl $atr for Extended {
            fn $am(&mut self, rhs: Extended) {
                $atr::$am(&mut self.0, rhs.0)
            }
        }
        impl<'a> $atr<&'a Extended> for Extended {
            fn $am(&mut self, rhs: &'a Extended) {
                $atr::$am(&mut self.0, &rhs.0)
            }
        }
    };
}

extended_binop!(Add, add, AddAssign, add_assign);
extended_binop!(Sub, sub, SubAssign, sub_assign);
extended_binop!(Mul, mul, MulAssign, mul_assign);
extended_binop!(Div, div, DivAssign, div_assign);

impl Neg for Extended {
    type Output = Extended;
    fn neg(self) -> Extended {
        Extended(-self.0)
    }
}

fn bigint_to_rug(v: &BigInt) -> Integer {
    match v.to_i64() {
        Some(small) => Integer::from(small),
        None => Integer::from_str_radix(&v.to_str_radix(16), 16).expect("hex digits"),
    }
}

impl Scalar for Extended {
    type Precision = u32;

    fn precision(&self) -> u32 {
        self.0.prec()
    }
    fn from_f64(prec: u32, v: f64) -> Extended {
        Extended(Float::with_val(prec, v))
    }
    fn from_i64(prec: u32, v: i64) -> Extended {
        Extended(Float::with_val(prec, v))
    }
    fn from_rational(prec: u32, r: &BigRational) -> Extended {
        let n = Float::with_val(prec, bigint_to_rug(r.numer()));
        if r.denom().is_one() {
            return Extended(n);
        }
        Extended(n / bigint_to_rug(r.denom()))
    }
    fn parse_decimal(prec: u32, s: &str) -> Option<Extended> {
        let parsed = Float::parse(s.trim()).ok()?;
        Some(Extended(Float::with_val(prec, parsed)))
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }
    fn epsilon(prec: u32) -> Extended {
        Extended(Float::with_val(prec, Float::i_exp(1, 1 - prec as i32)))
    }
    fn decimal_digits(prec: u32) -> usize {
        ((prec as f64) / std::f64::consts::LOG2_10).floor() as usize
    }
    fn to_full_string(&self) -> String {
        let digits = Self::decimal_digits(self.0.prec()).max(1);
        self.0.to_string_radix(10, Some(digits))
    }
    fn abs(&self) -> Extended {
        Extended(self.0.clone().abs())
    }
    fn sqrt(&self) -> Extended {
        Extended(self.0.clone().sqrt())
    }
    fn sin(&self) -> Extended {
        Extended(self.0.clone().sin())
    }
    fn cos(&self) -> Extended {
        Extended(self.0.clone().cos())
    }
    fn tan(&self) -> Extended {
        Extended(self.0.clone().tan())
    }
    fn sinh(&self) -> Extended {
        Extended(self.0.clone().sinh())
    }
    fn cosh(&self) -> Extended {
        Extended(self.0.clone().cosh())
    }
    fn exp(&self) -> Extended {
        Extended(self.0.clone().exp())
    }
    fn ln(&self) -> Extended {
        Extended(self.0.clone().ln())
    }
    fn asin(&self) -> Extended {
        Extended(self.0.clone().asin())
    }
    fn powi(&self, n: i32) -> Extended {
        Extended(self.0.clone().pow(n))
    }
    fn is_finite(&self) -> bool {
        self.0.is_finite()
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn assign_from(&mut self, a: &Extended) {
        self.0.assign(&a.0);
    }
    fn assign_add(&mut self, a: &Extended, b: &Extended) {
        self.0.assign(&a.0 + &b.0);
    }
    fn assign_mul(&mut self, a: &Extended, b: &Extended) {
        self.0.assign(&a.0 * &b.0);
    }
    fn assign_div(&mut self, a: &Extended, b: &Extended) {
        self.0.assign(&a.0 / &b.0);
    }
    fn assign_neg(&mut self, a: &Extended) {
        self.0.assign(-&a.0);
    }
    fn assign_powi(&mut self, a: &Extended, n: i32) {
        self.0.assign((&a.0).pow(n));
    }
}

/// Maximum absolute entry of a vector.
pub fn max_abs<S: Scalar>(prec: S::Precision, v: &[S]) -> S {
    v.iter()
        .map(Scalar::abs)
        .fold(S::zero(prec), |acc, x| acc.max_of(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extended_rational_is_correctly_rounded() {
        let prec = bits_for_digits(35);
        let third = BigRational::new(1.into(), 3.into());
        let x = Extended::from_rational(prec, &third);
        let three = Extended::from_i64(prec, 3);
        let err = (x * &three - Extended::one(prec)).abs();
        assert!(err < Extended::epsilon(prec) * Extended::from_i64(prec, 2));
    }

    #[test]
    fn default_precision_is_about_thirty_five_digits() {
        let prec = bits_for_digits(DEFAULT_EXTENDED_DIGITS);
        assert_eq!(prec, 120);
        assert!(Extended::decimal_digits(prec) >= 35);
    }

    #[test]
    fn domain_errors_are_reported() {
        assert!((-1.0f64).apply(Func::Sqrt).is_err());
        assert!(0.0f64.apply(Func::Log).is_err());
        assert_eq!(4.0f64.apply(Func::Sqrt).unwrap(), 2.0);
        let prec = 64;
        assert!(Extended::from_i64(prec, -2).apply(Func::Log).is_err());
    }

    #[test]
    fn huge_rationals_convert() {
        let big: BigInt = BigInt::from(10).pow(40u32);
        let r = BigRational::new(big.clone() + 1, big);
        assert!((f64::from_rational((), &r) - 1.0).abs() < 1e-15);
        let x = Extended::from_rational(200, &r);
        assert!(x > Extended::one(200));
    }
}
