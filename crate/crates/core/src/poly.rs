//! Dense univariate polynomials over the rationals.
//!
//! Coefficients are stored lowest degree first with trailing zeros
//! stripped, so structural equality is polynomial equality.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::numerics::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("the zero polynomial has no factorization")]
    ZeroPolynomial,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    coeffs: Vec<BigRational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// The identity polynomial `n`.
    pub fn identity() -> Self {
        Self::from_integers(&[0, 1])
    }

    /// `n - root`
    pub fn linear_monic(root: &BigRational) -> Self {
        Self::new(vec![-root.clone(), BigRational::one()])
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coefficient(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading_coefficient(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        match self.degree() {
            None => Some(BigRational::zero()),
            Some(0) => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    pub fn evaluate(&self, n: &BigInt) -> BigRational {
        self.evaluate_rational(&BigRational::from_integer(n.clone()))
    }

    pub fn evaluate_at(&self, n: i64) -> BigRational {
        self.evaluate(&BigInt::from(n))
    }

    /// Horner evaluation.
    pub fn evaluate_rational(&self, x: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// `q(n) = p(n + k)`, expanded exactly.
    pub fn shift(&self, k: i64) -> Self {
        self.shift_rational(&BigRational::from_integer(k.into()))
    }

    pub fn shift_rational(&self, k: &BigRational) -> Self {
        if k.is_zero() {
            return self.clone();
        }
        // Horner in polynomial arithmetic: p(n+k) = (...(a_d (n+k) + a_{d-1})(n+k) ...)
        let x = Self::new(vec![k.clone(), BigRational::one()]);
        self.coeffs
            .iter()
            .rev()
            .fold(Self::zero(), |acc, c| &(&acc * &x) + &Self::constant(c.clone()))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(BigRational::one());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Division by `n - root`; returns quotient and remainder `p(root)`.
    pub fn div_linear(&self, root: &BigRational) -> (Self, BigRational) {
        if self.is_zero() {
            return (Self::zero(), BigRational::zero());
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() - 1];
        let mut carry = BigRational::zero();
        for i in (0..self.coeffs.len()).rev() {
            let v = &self.coeffs[i] + &carry * root;
            if i == 0 {
                return (Self::new(out), v);
            }
            out[i - 1] = v.clone();
            carry = v;
        }
        unreachable!()
    }

    pub fn monic(&self) -> Self {
        match self.leading_coefficient() {
            Some(lc) => self.scale(&lc.recip()),
            None => Self::zero(),
        }
    }

    /// Integer polynomial with coprime coefficients and positive leading
    /// coefficient, together with the rational `k` such that `self = k * prim`.
    pub fn primitive_part(&self) -> (BigRational, Vec<BigInt>) {
        if self.is_zero() {
            return (BigRational::zero(), Vec::new());
        }
        let lcm_den = self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| (c * BigRational::from_integer(lcm_den.clone())).to_integer())
            .collect();
        let mut g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if ints.last().is_some_and(|c| c.is_negative()) {
            g = -g;
        }
        let prim = ints.iter().map(|c| c / &g).collect();
        (BigRational::new(g, lcm_den), prim)
    }

    /// All distinct rational roots, ascending, via the rational root theorem.
    pub fn rational_roots(&self) -> Vec<BigRational> {
        let factored = match factor_rational(self) {
            Ok(f) => f,
            Err(_) => return Vec::new(),
        };
        factored.factors.iter().map(|(f, _)| -f.coefficient(0)).collect()
    }

    /// Integer roots `>= min`, ascending.
    pub fn integer_roots_from(&self, min: i64) -> Vec<BigInt> {
        self.rational_roots()
            .into_iter()
            .filter(|r| r.is_integer() && r.to_integer() >= BigInt::from(min))
            .map(|r| r.to_integer())
            .collect()
    }

    /// Cauchy bound: every real root `x` satisfies `|x| < 1 + max |a_i / a_d|`.
    pub fn cauchy_root_bound(&self) -> Option<BigRational> {
        let lc = self.leading_coefficient()?;
        let d = self.degree()?;
        let m = self.coeffs[..d]
            .iter()
            .map(|c| (c / lc).abs())
            .max()
            .unwrap_or_else(BigRational::zero);
        Some(m + BigRational::one())
    }

    /// Lexicographic comparison of coefficient lists, lowest degree first.
    pub fn cmp_coefficients(&self, other: &Self) -> Ordering {
        self.coeffs.cmp(&other.coeffs)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coefficient(i) + rhs.coefficient(i)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;

            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        -&self
    }
}

impl fmt::Display for Polynomial {
    /// Prints in the polynomial grammar accepted by `expr::parse_polynomial`,
    /// highest degree first: `2*n^2 - n`, `1/2*n + 3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            let var = match i {
                0 => String::new(),
                1 => "n".to_string(),
                _ => format!("n^{i}"),
            };
            if i == 0 {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{var}")?;
            } else {
                write!(f, "{mag}*{var}")?;
            }
        }
        Ok(())
    }
}

/// `sign * content * prod(factor^mult) * residual`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredPolynomial {
    /// Positive magnitude of the leading coefficient.
    pub content: BigRational,
    pub sign: i8,
    /// Monic linear factors `n - r`, ascending in `r`.
    pub factors: Vec<(Polynomial, u32)>,
    /// Monic part of degree >= 2 with no rational roots.
    pub residual: Option<Polynomial>,
}

impl FactoredPolynomial {
    pub fn signed_content(&self) -> BigRational {
        if self.sign < 0 {
            -self.content.clone()
        } else {
            self.content.clone()
        }
    }

    pub fn reconstruct(&self) -> Polynomial {
        let mut p = Polynomial::constant(self.signed_content());
        for (f, m) in &self.factors {
            p = &p * &f.pow(*m);
        }
        if let Some(r) = &self.residual {
            p = &p * r;
        }
        p
    }
}

fn positive_divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = BigInt::one();
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            let other = &n / &d;
            if other != d {
                large.push(other);
            }
            small.push(d.clone());
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// One rational root of a primitive integer polynomial with nonzero
/// constant term, searched in ascending order.
fn find_rational_root(prim: &Polynomial, ints: &[BigInt]) -> Option<BigRational> {
    let a0 = ints.first()?;
    let an = ints.last()?;
    let ps = positive_divisors(a0);
    let qs = positive_divisors(an);
    let mut candidates: Vec<BigRational> = ps
        .iter()
        .flat_map(|p| {
            qs.iter().flat_map(move |q| {
                let r = BigRational::new(p.clone(), q.clone());
                [-r.clone(), r]
            })
        })
        .collect();
    candidates.sort();
    candidates.dedup();
    candidates.into_iter().find(|r| prim.evaluate_rational(r).is_zero())
}

/// Extracts every rational root with multiplicity; whatever remains is
/// returned whole as the residual.
pub fn factor_rational(p: &Polynomial) -> Result<FactoredPolynomial, PolyError> {
    let lc = p.leading_coefficient().ok_or(PolyError::ZeroPolynomial)?.clone();
    let sign = if lc.is_negative() { -1 } else { 1 };
    let content = lc.abs();
    let mut rest = p.monic();
    let mut roots: Vec<(BigRational, u32)> = Vec::new();

    let zero_mult = rest.coeffs.iter().take_while(|c| c.is_zero()).count();
    if zero_mult > 0 {
        rest = Polynomial::new(rest.coeffs[zero_mult..].to_vec());
        roots.push((BigRational::zero(), zero_mult as u32));
    }
    while rest.degree().unwrap_or(0) > 0 {
        let (_, ints) = rest.primitive_part();
        let Some(r) = find_rational_root(&rest, &ints) else {
            break;
        };
        let mut mult = 0;
        loop {
            let (q, rem) = rest.div_linear(&r);
            if !rem.is_zero() {
                break;
            }
            rest = q;
            mult += 1;
        }
        roots.push((r, mult));
    }
    roots.sort_by(|a, b| a.0.cmp(&b.0));
    let residual = (rest.degree().unwrap_or(0) > 0).then_some(rest);
    Ok(FactoredPolynomial {
        content,
        sign,
        factors: roots
            .into_iter()
            .map(|(r, m)| (Polynomial::linear_monic(&r), m))
            .collect(),
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn p(c: &[i64]) -> Polynomial {
        Polynomial::from_integers(c)
    }

    #[test]
    fn evaluate_examples() {
        let b = p(&[1, 3, 3]);
        let a = p(&[0, 0, 0, 1, -2]);
        assert_eq!(b.evaluate_at(2), rat(19, 1));
        assert_eq!(a.evaluate_at(3), rat(-135, 1));
        assert_eq!(Polynomial::zero().evaluate_at(7), rat(0, 1));
    }

    #[test]
    fn shift_examples() {
        let d = p(&[0, -1, 2]);
        assert_eq!(d.shift(1), p(&[1, 3, 2]));
        assert_eq!(d.shift(0), d);
        assert_eq!(p(&[0, 0, 1]).shift(1), p(&[1, 2, 1]));
        assert_eq!(p(&[0, 0, 1]).shift(-1), p(&[1, -2, 1]));
    }

    #[test]
    fn arithmetic_examples() {
        let c = p(&[0, 0, 1]);
        let d = p(&[0, -1, 2]);
        assert_eq!(&c + &d.shift(1), p(&[1, 3, 3]));
        assert_eq!(&c * &d, p(&[0, 0, 0, -1, 2]));
        assert!((&d - &d).is_zero());
        assert_eq!((&d - &d).degree(), None);
    }

    #[test]
    fn display_forms() {
        assert_eq!(p(&[0, -1, 2]).to_string(), "2*n^2 - n");
        assert_eq!(p(&[1, 3, 3]).to_string(), "3*n^2 + 3*n + 1");
        assert_eq!(p(&[0, 0, 0, 1, -2]).to_string(), "-2*n^4 + n^3");
        assert_eq!(Polynomial::zero().to_string(), "0");
        assert_eq!(p(&[-1]).to_string(), "-1");
        assert_eq!(Polynomial::linear_monic(&rat(1, 2)).to_string(), "n - 1/2");
        assert_eq!(Polynomial::new(vec![rat(0, 1), rat(-3, 4)]).to_string(), "-3/4*n");
    }

    #[test]
    fn factor_quartic() {
        let f = factor_rational(&p(&[0, 0, 0, -1, 2])).unwrap();
        assert_eq!(f.content, rat(2, 1));
        assert_eq!(f.sign, 1);
        assert_eq!(
            f.factors,
            vec![(Polynomial::identity(), 3), (Polynomial::linear_monic(&rat(1, 2)), 1)]
        );
        assert_eq!(f.residual, None);
        assert_eq!(f.reconstruct(), p(&[0, 0, 0, -1, 2]));
    }

    #[test]
    fn factor_without_rational_roots() {
        let f = factor_rational(&p(&[1, 0, 1])).unwrap();
        assert_eq!(f.content, rat(1, 1));
        assert!(f.factors.is_empty());
        assert_eq!(f.residual, Some(p(&[1, 0, 1])));
    }

    #[test]
    fn factor_monomial_and_negative() {
        let f = factor_rational(&p(&[0, 6])).unwrap();
        assert_eq!(f.content, rat(6, 1));
        assert_eq!(f.factors, vec![(Polynomial::identity(), 1)]);

        let g = factor_rational(&p(&[-5])).unwrap();
        assert_eq!((g.content.clone(), g.sign), (rat(5, 1), -1));
        assert_eq!(g.reconstruct(), p(&[-5]));

        assert_eq!(factor_rational(&Polynomial::zero()), Err(PolyError::ZeroPolynomial));
    }

    #[test]
    fn factor_mixed_residual() {
        // (3n - 2)^2 (n^2 + n + 1) (n + 4)
        let q = &(&p(&[-2, 3]).pow(2) * &p(&[1, 1, 1])) * &p(&[4, 1]);
        let f = factor_rational(&q).unwrap();
        assert_eq!(f.content, rat(9, 1));
        assert_eq!(
            f.factors,
            vec![
                (Polynomial::linear_monic(&rat(-4, 1)), 1),
                (Polynomial::linear_monic(&rat(2, 3)), 2)
            ]
        );
        assert_eq!(f.residual, Some(p(&[1, 1, 1])));
        assert_eq!(f.reconstruct(), q);
    }

    #[test]
    fn integer_roots_and_bounds() {
        let q = &p(&[-3, 1]) * &p(&[1, 2]);
        assert_eq!(q.integer_roots_from(1), vec![BigInt::from(3)]);
        assert!(p(&[0, -1, 2]).integer_roots_from(1).is_empty());
        let bound = q.cauchy_root_bound().unwrap();
        for r in q.rational_roots() {
            assert!(r.abs() < bound);
        }
    }

    fn poly_strategy() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec((-20i64..20, 1i64..5), 0..6)
            .prop_map(|cs| Polynomial::new(cs.into_iter().map(|(n, d)| rat(n, d)).collect()))
    }

    proptest! {
        #[test]
        fn shift_composes(q in poly_strategy(), a in -10i64..10, b in -10i64..10) {
            prop_assert_eq!(q.shift(a).shift(b), q.shift(a + b));
        }

        #[test]
        fn shift_evaluates(q in poly_strategy(), n in -50i64..50, k in -20i64..20) {
            prop_assert_eq!(q.shift(k).evaluate_at(n), q.evaluate_at(n + k));
        }

        #[test]
        fn factorization_reconstructs(
            roots in prop::collection::vec((-6i64..6, 1i64..4), 0..4),
            extra in poly_strategy(),
            lead in -5i64..5,
        ) {
            prop_assume!(lead != 0);
            let mut q = Polynomial::constant(rat(lead, 1));
            for (n, d) in roots {
                q = &q * &Polynomial::linear_monic(&rat(n, d));
            }
            if !extra.is_zero() {
                q = &q * &extra;
            }
            let f = factor_rational(&q).unwrap();
            prop_assert_eq!(f.reconstruct(), q);
            for (fac, m) in &f.factors {
                prop_assert_eq!(fac.degree(), Some(1));
                prop_assert!(*m >= 1);
            }
            if let Some(r) = &f.residual {
                prop_assert!(r.rational_roots().is_empty() || r.degree() == Some(0));
            }
        }
    }
}
