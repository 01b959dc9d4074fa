//! Arbitrary-precision rational scalars and small combinatorial helpers.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// The scalar field: arbitrary-precision rationals.
pub type Rat = num_rational::BigRational;

/// Integer as a rational.
pub fn rat_int(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

/// The fraction `p/q`; panics on `q == 0`.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn factorial(k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=k {
        acc *= BigInt::from(i);
    }
    acc
}

/// Binomial coefficient `C(n, k)` as a rational.
pub fn binomial(n: usize, k: usize) -> Rat {
    if k > n {
        return Rat::zero();
    }
    Rat::from_integer(factorial(n) / (factorial(k) * factorial(n - k)))
}

/// Binomial coefficient as a plain integer count.
pub fn binomial_usize(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// True when `|v| >= 1/4`, the regularity conditioning bound used when
/// sampling random first-order blocks.
pub fn well_conditioned(v: &Rat) -> bool {
    v.abs() >= rat(1, 4)
}
