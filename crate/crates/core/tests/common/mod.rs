//! Oracles shared by the integration tests. Nothing here calls into the
//! library's numerics, series or gcf code.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use gcf_forge::expr::parse_const_expr;
use gcf_forge::gcf::GcfProblem;
use gcf_forge::poly::Polynomial;

pub const QUARTIC_TOML: &str =
    "name = \"quartic\"\nb0 = \"1\"\na = \"-(2*n^4 - n^3)\"\nb = \"3*n^2 + 3*n + 1\"\ntarget = \"8/pi^2\"\n";

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn quartic_problem(target: Option<&str>) -> GcfProblem {
    GcfProblem::new(
        rat(1, 1),
        Polynomial::from_integers(&[0, 0, 0, 1, -2]),
        Polynomial::from_integers(&[1, 3, 3]),
        target.map(|t| parse_const_expr(t).unwrap()),
    )
    .unwrap()
}

pub fn factorial(n: u64) -> BigInt {
    let mut f = BigInt::one();
    for k in 2..=n {
        f *= k;
    }
    f
}

/// `2^(k+1) (k!)^2 / (2k+2)!`
pub fn closed_form_term(k: u64) -> BigRational {
    let f = factorial(k);
    BigRational::new((BigInt::one() << (k + 1)) * &f * &f, factorial(2 * k + 2))
}

/// `arctan(1/x) * scale`, off by at most a few units per term count.
fn arctan_inv_scaled(x: u64, scale: &BigInt) -> BigInt {
    let x = BigInt::from(x);
    let x2 = &x * &x;
    let mut power = scale / &x;
    let mut sum = BigInt::zero();
    let mut k = 0u64;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * k + 1);
        if k.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &x2;
        k += 1;
    }
    sum
}

/// Pi to within `10^-digits` by Takano's formula
/// `pi/4 = 12 atan(1/49) + 32 atan(1/57) - 5 atan(1/239) + 12 atan(1/110443)`.
pub fn pi_oracle(digits: u32) -> BigRational {
    let guard = 20;
    let scale = BigInt::from(10).pow(digits + guard);
    let s = 12 * arctan_inv_scaled(49, &scale) + 32 * arctan_inv_scaled(57, &scale)
        - 5 * arctan_inv_scaled(239, &scale)
        + 12 * arctan_inv_scaled(110443, &scale);
    BigRational::new(4 * s, scale)
}

/// `|x - y| <= 10^-digits * max(1, |y|)`
pub fn agree(x: &BigRational, y: &BigRational, digits: u32) -> bool {
    let scale = if y.abs() > BigRational::one() {
        y.abs()
    } else {
        BigRational::one()
    };
    (x - y).abs() * BigRational::from_integer(BigInt::from(10).pow(digits)) <= scale
}

/// Wallis-Euler recurrence for the quartic problem in plain integers,
/// independent of the library: `(A_n, B_n)` for `n = 0..=depth`.
pub fn quartic_convergents_oracle(depth: usize) -> Vec<(BigInt, BigInt)> {
    let a = |n: i64| -BigInt::from(2 * n.pow(4) - n.pow(3));
    let b = |n: i64| BigInt::from(3 * n * n + 3 * n + 1);
    let (mut a2, mut a1) = (BigInt::one(), BigInt::one());
    let (mut b2, mut b1) = (BigInt::zero(), BigInt::one());
    let mut out = vec![(a1.clone(), b1.clone())];
    for n in 1..=depth as i64 {
        let an = b(n) * &a1 + a(n) * &a2;
        let bn = b(n) * &b1 + a(n) * &b2;
        a2 = std::mem::replace(&mut a1, an);
        b2 = std::mem::replace(&mut b1, bn);
        out.push((a1.clone(), b1.clone()));
    }
    out
}
