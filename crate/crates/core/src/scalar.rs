//! Coefficient fields for the polynomial engine.
//!
//! Exact statements (invariance equations, dimension counts, the SU(2,2)
//! basis) are checked over the Gaussian rationals `Q[i]`; experiments run
//! over `Complex64`. Both implement [`Scalar`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// A field element usable as a polynomial coefficient.
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn conj(&self) -> Self;
    fn from_bigint(v: &BigInt) -> Self;
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self;
    /// Multiplicative inverse; `None` for zero.
    fn inv(&self) -> Option<Self>;
    fn to_c64(&self) -> Complex64;
    /// Whether `|self| <= tol`. Exact scalars ignore `tol`.
    fn is_negligible(&self, tol: f64) -> bool;
    /// Whether this scalar type represents values exactly.
    fn is_exact() -> bool;

    fn from_i64(v: i64) -> Self {
        Self::from_bigint(&BigInt::from(v))
    }

    fn from_u64(v: u64) -> Self {
        Self::from_bigint(&BigInt::from(v))
    }

    /// `1/v` for a positive integer `v`.
    fn recip_u64(v: u64) -> Self {
        Self::from_ratio(&BigInt::from(1u8), &BigInt::from(v))
    }

    /// `M! = prod_i M_i!` for an exponent vector.
    fn from_multi_factorial(exps: &[u16]) -> Self {
        Self::from_bigint(&crate::combinatorics::multi_factorial(exps))
    }

    fn abs(&self) -> f64 {
        self.to_c64().norm()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn from_bigint(v: &BigInt) -> Self {
        Complex64::new(v.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        let r = BigRational::new(num.clone(), den.clone());
        Complex64::new(r.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn inv(&self) -> Option<Self> {
        if Scalar::is_zero(self) {
            None
        } else {
            Some(Complex64::new(1.0, 0.0) / self)
        }
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn is_negligible(&self, tol: f64) -> bool {
        self.norm() <= tol
    }
    fn is_exact() -> bool {
        false
    }
    fn from_u64(v: u64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn recip_u64(v: u64) -> Self {
        Complex64::new(1.0 / v as f64, 0.0)
    }
    fn from_multi_factorial(exps: &[u16]) -> Self {
        Complex64::new(crate::combinatorics::multi_factorial_f64(exps), 0.0)
    }
}

/// An element `re + i·im` of the Gaussian rationals.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        Self {
            re,
            im: BigRational::zero(),
        }
    }

    /// `num/den` as a real Gaussian rational.
    pub fn ratio(num: i64, den: i64) -> Self {
        Self::real(BigRational::new(num.into(), den.into()))
    }

    pub fn imag_unit() -> Self {
        Self {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// `|z|^2 = re^2 + im^2`, exact.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }
}

impl fmt::Debug for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, -self.im.clone())
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl Add for GaussRational {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl Sub for GaussRational {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl Mul for GaussRational {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.im.is_zero() && rhs.im.is_zero() {
            return Self::real(self.re * rhs.re);
        }
        Self {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Neg for GaussRational {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Scalar for GaussRational {
    fn zero() -> Self {
        Self::default()
    }
    fn one() -> Self {
        Self::real(BigRational::one())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }
    fn from_bigint(v: &BigInt) -> Self {
        Self::real(BigRational::from_integer(v.clone()))
    }
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        Self::real(BigRational::new(num.clone(), den.clone()))
    }
    fn inv(&self) -> Option<Self> {
        if Scalar::is_zero(self) {
            return None;
        }
        let n = self.norm_sqr();
        Some(Self {
            re: &self.re / &n,
            im: -(&self.im / &n),
        })
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
    fn is_negligible(&self, _tol: f64) -> bool {
        Scalar::is_zero(self)
    }
    fn is_exact() -> bool {
        true
    }
}

/// A rational serialized as numerator/denominator strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalRepr {
    pub num: String,
    pub den: String,
}

impl From<&BigRational> for RationalRepr {
    fn from(r: &BigRational) -> Self {
        Self {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
        }
    }
}

impl RationalRepr {
    pub fn parse(&self) -> Option<BigRational> {
        let num: BigInt = self.num.parse().ok()?;
        let den: BigInt = self.den.parse().ok()?;
        if den.is_zero() {
            return None;
        }
        Some(BigRational::new(num, den))
    }
}
