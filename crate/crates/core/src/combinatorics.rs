//! Exact factorials and binomials.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `binom(n, k)` with `binom(n, k) = 0` for `k < 0` or `k > n`, and the
/// usual extension to negative `n` left undefined (returns 0).
pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

pub fn ratio(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

/// `ln n!` in floating point.
pub fn ln_factorial(n: u64) -> f64 {
    statrs::function::gamma::ln_gamma(n as f64 + 1.0)
}

/// `ln binom(n, k)` in floating point.
pub fn ln_binomial(n: f64, k: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// Multi-index factorial `M! = prod M_i!`.
pub fn multi_factorial(exps: &[u16]) -> BigInt {
    exps.iter().fold(BigInt::one(), |acc, &e| acc * factorial(e as u64))
}

/// Multi-index factorial as `f64`.
pub fn multi_factorial_f64(exps: &[u16]) -> f64 {
    exps.iter()
        .map(|&e| (1..=e as u64).map(|k| k as f64).product::<f64>())
        .product()
}
