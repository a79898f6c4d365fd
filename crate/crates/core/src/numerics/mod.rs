//! Number contracts shared by every stage of the pipeline: unbounded
//! integers, exact rationals in lowest terms, and binary floating values
//! with explicit precision control.

mod real;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use num_bigint::BigInt as BigInteger;
pub use num_rational::BigRational;
pub use real::{parse_decimal_rational, PrecisionReal, MIN_PRECISION_BITS};

/// Guard bits added on top of `digits * 4` unless overridden.
pub const DEFAULT_GUARD_BITS: u32 = 64;

/// Environment variable that overrides [`DEFAULT_GUARD_BITS`].
pub const PRECISION_ENV_VAR: &str = "GCF_FORGE_PRECISION_BITS";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericsError {
    #[error("insufficient precision: {available} bits available, {required} bits required for {digits} digits")]
    InsufficientPrecision { available: u32, required: u32, digits: u32 },
    #[error("precision must be at least {MIN_PRECISION_BITS} bits, got {0}")]
    PrecisionTooSmall(u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of a negative value")]
    NegativeSqrt,
    #[error("invalid decimal literal `{0}`")]
    InvalidDecimal(String),
}

/// Working-precision rule: `digits * 4 + guard_bits` mantissa bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecisionPolicy {
    pub guard_bits: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        Self {
            guard_bits: DEFAULT_GUARD_BITS,
        }
    }
}

impl PrecisionPolicy {
    /// Reads the guard-bit override from the environment; malformed values
    /// fall back to the default.
    pub fn from_env() -> Self {
        std::env::var(PRECISION_ENV_VAR)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map(|guard_bits| Self { guard_bits })
            .unwrap_or_default()
    }

    pub fn bits_for_digits(&self, digits: u32) -> u32 {
        (digits.saturating_mul(4))
            .saturating_add(self.guard_bits)
            .max(MIN_PRECISION_BITS)
    }
}

pub fn rational_to_real(q: &BigRational, precision_bits: u32) -> Result<PrecisionReal, NumericsError> {
    if precision_bits < MIN_PRECISION_BITS {
        return Err(NumericsError::PrecisionTooSmall(precision_bits));
    }
    Ok(PrecisionReal::from_rational(q, precision_bits))
}

/// `10^-k` as an exact rational (k may be negative).
pub fn pow10(k: i64) -> BigRational {
    let p = BigInt::from(10).pow(k.unsigned_abs() as u32);
    if k >= 0 {
        BigRational::new(BigInt::one(), p)
    } else {
        BigRational::from_integer(p)
    }
}

fn agreement_scale(y: &BigRational) -> BigRational {
    let a = y.abs();
    if a > BigRational::one() {
        a
    } else {
        BigRational::one()
    }
}

/// True iff `|x - y| <= 10^-digits * max(1, |y|)`, compared exactly.
pub fn agree_to_digits(x: &PrecisionReal, y: &PrecisionReal, digits: u32) -> Result<bool, NumericsError> {
    let required = digits.saturating_mul(4);
    for p in [x.precision_bits(), y.precision_bits()] {
        if p < required {
            return Err(NumericsError::InsufficientPrecision {
                available: p,
                required,
                digits,
            });
        }
    }
    Ok(rationals_agree(&x.to_rational(), &y.to_rational(), digits))
}

pub fn rationals_agree(x: &BigRational, y: &BigRational, digits: u32) -> bool {
    (x - y).abs() <= pow10(digits as i64) * agreement_scale(y)
}

/// Largest `k <= cap` with `|x - y| <= 10^-k * max(1, |y|)`; 0 if even one
/// digit fails.
pub fn agreement_digits(x: &BigRational, y: &BigRational, cap: u32) -> u32 {
    let diff = (x - y).abs();
    if diff.is_zero() {
        return cap;
    }
    let rel = diff / agreement_scale(y);
    if rel >= BigRational::one() {
        return 0;
    }
    // 10^-(e+1) < rel <= 10^-e  (approximately); refine exactly
    let e = -real::decimal_exponent(&rel) - 1;
    let mut k = e.max(0) as u32;
    while k < cap && rel <= pow10(k as i64 + 1) {
        k += 1;
    }
    while k > 0 && rel > pow10(k as i64) {
        k -= 1;
    }
    k.min(cap)
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// `(2m)! / (m!)^2` via the product `prod_{k=1..m} (m+k)/k`.
pub fn central_binomial(m: u64) -> BigInt {
    let mut c = BigInt::one();
    for k in 1..=m {
        c = c * BigInt::from(m + k) / BigInt::from(k);
    }
    c
}
