//! Binary floating values with an explicit mantissa width.
//!
//! A [`PrecisionReal`] stores `mantissa * 2^exponent` where the mantissa is
//! odd (or zero) and fits in `precision_bits` bits. Every constructor and
//! arithmetic operation rounds to nearest, ties to even, so results are
//! correctly rounded except where noted (`pi`, `powi`).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{BigRational, NumericsError};

/// Smallest mantissa width accepted anywhere in the crate.
pub const MIN_PRECISION_BITS: u32 = 8;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrecisionReal {
    mantissa: BigInt,
    exponent: i64,
    precision_bits: u32,
}

fn bit_len(x: &BigInt) -> u64 {
    x.magnitude().bits()
}

fn pow2(n: u64) -> BigInt {
    BigInt::one() << n
}

/// Round `mag * 2^exp` (mag > 0) to `prec` bits, half to even.
fn round_magnitude(mag: BigUint, exp: i64, prec: u32) -> (BigUint, i64) {
    let bits = mag.bits();
    if bits <= prec as u64 {
        return (mag, exp);
    }
    let shift = bits - prec as u64;
    let q = &mag >> shift;
    let rem = &mag - (&q << shift);
    let half = BigUint::one() << (shift - 1);
    let q = match rem.cmp(&half) {
        Ordering::Greater => q + 1u32,
        Ordering::Equal if q.is_odd() => q + 1u32,
        _ => q,
    };
    (q, exp + shift as i64)
}

impl PrecisionReal {
    /// Round `mantissa * 2^exponent` to `precision_bits` bits.
    pub fn from_parts(mantissa: BigInt, exponent: i64, precision_bits: u32) -> Self {
        let prec = precision_bits.max(1);
        if mantissa.is_zero() {
            return Self::zero(prec);
        }
        let sign = mantissa.sign();
        let (mag, exp) = round_magnitude(mantissa.into_parts().1, exponent, prec);
        let tz = mag.trailing_zeros().unwrap_or(0);
        let mag = mag >> tz;
        Self {
            mantissa: BigInt::from_biguint(sign, mag),
            exponent: exp + tz as i64,
            precision_bits: prec,
        }
    }

    pub fn zero(precision_bits: u32) -> Self {
        Self {
            mantissa: BigInt::zero(),
            exponent: 0,
            precision_bits,
        }
    }

    pub fn from_integer(n: impl Into<BigInt>, precision_bits: u32) -> Self {
        Self::from_parts(n.into(), 0, precision_bits)
    }

    /// Correctly rounded `num / den * 2^exponent`.
    fn from_ratio(num: &BigInt, den: &BigInt, exponent: i64, prec: u32) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return Self::zero(prec);
        }
        let negative = num.is_negative() != den.is_negative();
        let (n, d) = (num.abs(), den.abs());
        // quotient gets at least prec + 2 bits
        let s = prec as i64 + 2 + bit_len(&d) as i64 - bit_len(&n) as i64;
        let (n, d) = if s >= 0 {
            (n << s as u64, d)
        } else {
            (n, d << (-s) as u64)
        };
        let (q, r) = n.div_rem(&d);
        let sticky = if r.is_zero() { 0 } else { 1 };
        let m: BigInt = (q << 1u32) + sticky;
        let m = if negative { -m } else { m };
        Self::from_parts(m, exponent - s - 1, prec)
    }

    pub fn from_rational(q: &BigRational, precision_bits: u32) -> Self {
        Self::from_ratio(q.numer(), q.denom(), 0, precision_bits)
    }

    /// Parse `[-]digits[.digits][e[+-]digits]` and round to `precision_bits`.
    pub fn parse_decimal(s: &str, precision_bits: u32) -> Result<Self, NumericsError> {
        let q = parse_decimal_rational(s)?;
        Ok(Self::from_rational(&q, precision_bits))
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    /// Same value rounded to a new mantissa width.
    pub fn with_precision(&self, precision_bits: u32) -> Self {
        Self::from_parts(self.mantissa.clone(), self.exponent, precision_bits)
    }

    /// The exact dyadic rational this value represents.
    pub fn to_rational(&self) -> BigRational {
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa << self.exponent as u64)
        } else {
            BigRational::new(self.mantissa.clone(), pow2((-self.exponent) as u64))
        }
    }

    /// Position of the most significant bit: `2^(m-1) <= |x| < 2^m`.
    pub fn magnitude_exponent(&self) -> Option<i64> {
        (!self.is_zero()).then(|| self.exponent + bit_len(&self.mantissa) as i64)
    }

    pub fn neg(&self) -> Self {
        Self {
            mantissa: -&self.mantissa,
            ..self.clone()
        }
    }

    pub fn abs(&self) -> Self {
        Self {
            mantissa: self.mantissa.abs(),
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Self, prec: u32) -> Self {
        if self.is_zero() {
            return other.with_precision(prec);
        }
        if other.is_zero() {
            return self.with_precision(prec);
        }
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as u64;
        let b = &other.mantissa << (other.exponent - e) as u64;
        Self::from_parts(a + b, e, prec)
    }

    pub fn sub(&self, other: &Self, prec: u32) -> Self {
        self.add(&other.neg(), prec)
    }

    pub fn mul(&self, other: &Self, prec: u32) -> Self {
        Self::from_parts(&self.mantissa * &other.mantissa, self.exponent + other.exponent, prec)
    }

    pub fn div(&self, other: &Self, prec: u32) -> Result<Self, NumericsError> {
        if other.is_zero() {
            return Err(NumericsError::DivisionByZero);
        }
        Ok(Self::from_ratio(
            &self.mantissa,
            &other.mantissa,
            self.exponent - other.exponent,
            prec,
        ))
    }

    pub fn sqrt(&self, prec: u32) -> Result<Self, NumericsError> {
        if self.is_negative() {
            return Err(NumericsError::NegativeSqrt);
        }
        if self.is_zero() {
            return Ok(Self::zero(prec));
        }
        let m = self.mantissa.magnitude();
        // radicand gets at least 2 * (prec + 2) bits and an even exponent
        let mut s = 2 * (prec as i64 + 2) - m.bits() as i64;
        s = s.max(0);
        if (self.exponent - s).rem_euclid(2) != 0 {
            s += 1;
        }
        let radicand = m << s as u64;
        let root = radicand.sqrt();
        let sticky = if &root * &root == radicand { 0u32 } else { 1 };
        let root = (root << 1u32) + sticky;
        Ok(Self::from_parts(
            BigInt::from_biguint(Sign::Plus, root),
            (self.exponent - s) / 2 - 1,
            prec,
        ))
    }

    /// Integer power by repeated squaring with 32 guard bits; error below one
    /// unit in the last place for |n| < 2^20.
    pub fn powi(&self, n: i64, prec: u32) -> Result<Self, NumericsError> {
        if n < 0 {
            let pos = self.powi(-n, prec + 32)?;
            return Self::from_integer(1, prec + 32).div(&pos, prec);
        }
        let w = prec + 32;
        let mut acc = Self::from_integer(1, w);
        let mut base = self.with_precision(w);
        let mut k = n as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base, w);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base, w);
            }
        }
        Ok(acc.with_precision(prec))
    }

    /// π by Machin's formula in fixed point, error well under one unit in
    /// the last place.
    pub fn pi(prec: u32) -> Self {
        let w = prec as u64 + 32 + 2 * (64 - (prec as u64).leading_zeros() as u64);
        let one = pow2(w);
        let pi_fixed = atan_inv_fixed(5, &one) * 16 - atan_inv_fixed(239, &one) * 4;
        Self::from_parts(pi_fixed, -(w as i64), prec)
    }

    /// Fixed-point decimal text with `frac_digits` digits after the point,
    /// correctly rounded (half away from zero).
    pub fn to_fixed(&self, frac_digits: usize) -> String {
        let scaled = self.to_rational() * BigRational::from_integer(BigInt::from(10).pow(frac_digits as u32));
        let r = scaled.round();
        format_scaled_integer(r.numer(), frac_digits)
    }

    /// Decimal text with `sig_digits` significant digits.
    pub fn to_significant(&self, sig_digits: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let sig = sig_digits.max(1);
        let q = self.to_rational();
        let mut e10 = decimal_exponent(&q.abs());
        let mut scaled = scale_round(&q, sig as i64 - 1 - e10);
        // rounding may carry into a new leading digit
        if scaled.magnitude().to_string().len() > sig {
            e10 += 1;
            scaled = scale_round(&q, sig as i64 - 1 - e10);
        }
        let frac = sig as i64 - 1 - e10;
        if (-7..=30).contains(&e10) {
            let s = if frac >= 0 {
                format_scaled_integer(&scaled, frac as usize)
            } else {
                (scaled * BigInt::from(10).pow((-frac) as u32)).to_string()
            };
            trim_fraction(s)
        } else {
            let s = format_scaled_integer(&scaled, sig - 1);
            format!("{}e{}", trim_fraction(s), e10)
        }
    }

    /// Decimal text that parses back to exactly this value at this precision.
    pub fn to_round_trip_string(&self) -> String {
        let digits = (self.precision_bits as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
        self.to_significant(digits)
    }

    pub fn to_f64(&self) -> f64 {
        let small = self.with_precision(53);
        let m: f64 = small.mantissa.to_string().parse().unwrap_or(f64::NAN);
        m * 2f64.powi(small.exponent.clamp(-1100, 1100) as i32)
    }
}

fn atan_inv_fixed(x: u32, one: &BigInt) -> BigInt {
    let x = BigInt::from(x);
    let x2 = &x * &x;
    let mut power = one / &x;
    let mut sum = power.clone();
    let mut k = 1u64;
    loop {
        power /= &x2;
        if power.is_zero() {
            break;
        }
        let term = &power / BigInt::from(2 * k + 1);
        if k % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        k += 1;
    }
    sum
}

/// floor(log10(q)) for q > 0.
pub(crate) fn decimal_exponent(q: &BigRational) -> i64 {
    debug_assert!(q.is_positive());
    let ten = BigRational::from_integer(BigInt::from(10));
    let est = (q.numer().to_string().len() as i64) - (q.denom().to_string().len() as i64);
    let mut e = est;
    let pow = |e: i64| -> BigRational {
        if e >= 0 {
            BigRational::from_integer(BigInt::from(10).pow(e as u32))
        } else {
            BigRational::new(BigInt::one(), BigInt::from(10).pow((-e) as u32))
        }
    };
    let mut p = pow(e);
    while &p > q {
        e -= 1;
        p /= &ten;
    }
    loop {
        let next = &p * &ten;
        if &next > q {
            break;
        }
        p = next;
        e += 1;
    }
    e
}

fn scale_round(q: &BigRational, k: i64) -> BigInt {
    let s = if k >= 0 {
        q * BigRational::from_integer(BigInt::from(10).pow(k as u32))
    } else {
        q / BigRational::from_integer(BigInt::from(10).pow((-k) as u32))
    };
    s.round().to_integer()
}

fn format_scaled_integer(n: &BigInt, frac_digits: usize) -> String {
    let neg = n.is_negative();
    let digits = n.magnitude().to_string();
    let body = if frac_digits == 0 {
        digits
    } else {
        let padded = format!("{:0>width$}", digits, width = frac_digits + 1);
        let (int, frac) = padded.split_at(padded.len() - frac_digits);
        format!("{int}.{frac}")
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

fn trim_fraction(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Exact rational value of a decimal literal.
pub fn parse_decimal_rational(s: &str) -> Result<BigRational, NumericsError> {
    let bad = || NumericsError::InvalidDecimal(s.to_string());
    let t = s.trim();
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("0{int}{frac}").parse().map_err(|_| bad())?;
    let e = exp - frac.len() as i64;
    if e.unsigned_abs() > 1_000_000 {
        return Err(bad());
    }
    let ten = BigInt::from(10);
    let mut q = if e >= 0 {
        BigRational::from_integer(digits * ten.pow(e as u32))
    } else {
        BigRational::new(digits, ten.pow((-e) as u32))
    };
    if neg {
        q = -q;
    }
    Ok(q)
}

impl PartialOrd for PrecisionReal {
    /// Orders by value; values that compare equal may differ in precision.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.to_rational().cmp(&other.to_rational()))
    }
}

impl fmt::Display for PrecisionReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f
            .precision()
            .unwrap_or((self.precision_bits as f64 * std::f64::consts::LOG10_2) as usize);
        write!(f, "{}", self.to_significant(digits))
    }
}

impl FromStr for PrecisionReal {
    type Err = NumericsError;

    /// Parses `<decimal>` or `<decimal>@<bits>`; without a suffix the
    /// precision is 64 bits.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('@') {
            Some((d, bits)) => {
                let bits: u32 = bits
                    .trim()
                    .parse()
                    .map_err(|_| NumericsError::InvalidDecimal(s.to_string()))?;
                Self::parse_decimal(d, bits)
            }
            None => Self::parse_decimal(s, 64),
        }
    }
}
