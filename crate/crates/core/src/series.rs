//! The reciprocal series induced by a coupling.
//!
//! With `c`, `d` a coupling, the terms
//!
//! ```text
//! t_k = prod_{j=1..k} c(j) / prod_{j=1..k+1} d(j)
//! ```
//!
//! have partial sums `S_n` equal to `B_n / A_n` whenever `b0 = d(1)`.
//! Consecutive terms obey `t_{k+1} / t_k = c(k+1) / d(k+2)`, a rational
//! function of `k` whose limit drives the ratio test.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::factorize::Coupling;
use crate::numerics::{central_binomial, pow10, BigRational, PrecisionPolicy, PrecisionReal};
use crate::poly::Polynomial;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("d(j) vanishes at j = {0}")]
    ZeroDenominatorFactor(BigInt),
    #[error("series is not certified convergent (rho = {0})")]
    NotConvergent(Rho),
    #[error("z = {0} is outside [0, 4)")]
    OutOfDomain(BigRational),
}

/// Exact limit of the term ratio.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Rho {
    Finite(BigRational),
    Infinite,
}

impl fmt::Display for Rho {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rho::Finite(q) => write!(f, "{q}"),
            Rho::Infinite => write!(f, "infinity"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Convergent,
    Divergent,
    Inconclusive,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Convergent => "convergent",
            Classification::Divergent => "divergent",
            Classification::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioCertificate {
    /// `c(k+1)`
    pub numerator: Polynomial,
    /// `d(k+2)`
    pub denominator: Polynomial,
    pub rho: Rho,
    pub classification: Classification,
}

impl RatioCertificate {
    /// `R(k)`, or `None` at a pole.
    pub fn evaluate(&self, k: i64) -> Option<BigRational> {
        let den = self.denominator.evaluate_at(k);
        (!den.is_zero()).then(|| self.numerator.evaluate_at(k) / den)
    }
}

pub fn ratio_certificate(coupling: &Coupling) -> RatioCertificate {
    let numerator = coupling.c.shift(1);
    let denominator = coupling.d.shift(2);
    let rho = match (numerator.degree(), denominator.degree()) {
        (None, _) => Rho::Finite(BigRational::zero()),
        (Some(_), None) => Rho::Infinite,
        (Some(dn), Some(dd)) if dn < dd => Rho::Finite(BigRational::zero()),
        (Some(dn), Some(dd)) if dn == dd => Rho::Finite(
            numerator.leading_coefficient().expect("nonzero") / denominator.leading_coefficient().expect("nonzero"),
        ),
        _ => Rho::Infinite,
    };
    let classification = match &rho {
        Rho::Infinite => Classification::Divergent,
        Rho::Finite(r) => match r.abs().cmp(&BigRational::one()) {
            std::cmp::Ordering::Less => Classification::Convergent,
            std::cmp::Ordering::Equal => Classification::Inconclusive,
            std::cmp::Ordering::Greater => Classification::Divergent,
        },
    };
    RatioCertificate {
        numerator,
        denominator,
        rho,
        classification,
    }
}

/// Incremental generator of `t_0, t_1, ...`; one multiplication per
/// running product per step.
#[derive(Debug, Clone)]
pub struct TermStream {
    coupling: Coupling,
    k: u64,
    num: BigRational,
    den: BigRational,
}

impl TermStream {
    /// Fails if `d` has a root at a positive integer.
    pub fn new(coupling: &Coupling) -> Result<Self, SeriesError> {
        if coupling.d.is_zero() {
            return Err(SeriesError::ZeroDenominatorFactor(BigInt::one()));
        }
        if let Some(j) = coupling.d.integer_roots_from(1).into_iter().next() {
            return Err(SeriesError::ZeroDenominatorFactor(j));
        }
        Ok(Self {
            coupling: coupling.clone(),
            k: 0,
            num: BigRational::one(),
            den: coupling.d.evaluate_at(1),
        })
    }

    /// Running `prod_{j=1..k} c(j)`, i.e. the decoupled trace `w_k` started
    /// from `w_0 = 1`.
    pub fn numerator_product(&self) -> &BigRational {
        &self.num
    }

    pub fn denominator_product(&self) -> &BigRational {
        &self.den
    }
}

impl Iterator for TermStream {
    type Item = BigRational;

    fn next(&mut self) -> Option<BigRational> {
        let t = &self.num / &self.den;
        self.k += 1;
        let k = BigInt::from(self.k);
        self.num *= self.coupling.c.evaluate(&k);
        self.den *= self.coupling.d.evaluate(&(k + 1));
        Some(t)
    }
}

pub fn terms(coupling: &Coupling, count: usize) -> Result<Vec<BigRational>, SeriesError> {
    Ok(TermStream::new(coupling)?.take(count).collect())
}

pub fn partial_sums(coupling: &Coupling, count: usize) -> Result<Vec<BigRational>, SeriesError> {
    let mut acc = BigRational::zero();
    Ok(TermStream::new(coupling)?
        .take(count)
        .map(|t| {
            acc += t;
            acc.clone()
        })
        .collect())
}

/// Smallest `K >= 0` with `|R(k)| <= bound` for every real `k >= K`, found
/// from the Cauchy root bound of `N(k)^2 - bound^2 D(k)^2`. Requires
/// `|rho| < bound`, which makes that polynomial eventually negative, so it
/// is strictly negative beyond its largest real root and `D` cannot vanish
/// there.
pub fn certified_ratio_threshold(cert: &RatioCertificate, bound: &BigRational) -> u64 {
    let n2 = &cert.numerator * &cert.numerator;
    let d2 = &cert.denominator * &cert.denominator;
    let g = &n2 - &d2.scale(&(bound * bound));
    g.cauchy_root_bound()
        .map(|b| b.ceil().to_integer().to_u64().unwrap_or(u64::MAX))
        .unwrap_or(0)
}

/// Exact prefix sum plus a rigorous bound on the omitted tail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifiedSum {
    pub partial: BigRational,
    pub tail_bound: BigRational,
    pub terms_used: usize,
}

/// Sums until the certified tail is at most `tolerance`.
pub fn certified_sum(coupling: &Coupling, tolerance: &BigRational) -> Result<CertifiedSum, SeriesError> {
    let cert = ratio_certificate(coupling);
    let rho = match (&cert.classification, &cert.rho) {
        (Classification::Convergent, Rho::Finite(r)) => r.abs(),
        _ => return Err(SeriesError::NotConvergent(cert.rho.clone())),
    };
    let one = BigRational::one();
    let rho_bar = (&rho + &one) / BigRational::from_integer(2.into());
    let threshold = certified_ratio_threshold(&cert, &rho_bar);
    let factor = &rho_bar / (&one - &rho_bar);

    let mut partial = BigRational::zero();
    let mut used = 0usize;
    for t in TermStream::new(coupling)? {
        partial += &t;
        used += 1;
        // t_n with n = used - 1; the tail after n is at most |t_n| * rho_bar / (1 - rho_bar)
        if (used as u64) > threshold {
            let tail = t.abs() * &factor;
            if &tail <= tolerance {
                return Ok(CertifiedSum {
                    partial,
                    tail_bound: tail,
                    terms_used: used,
                });
            }
        }
    }
    unreachable!("term stream is infinite")
}

/// `S` to within `10^-digits`, with the number of terms summed.
pub fn sum_to_precision(coupling: &Coupling, digits: u32) -> Result<(PrecisionReal, usize), SeriesError> {
    sum_to_precision_with(coupling, digits, &PrecisionPolicy::default())
}

pub fn sum_to_precision_with(
    coupling: &Coupling,
    digits: u32,
    policy: &PrecisionPolicy,
) -> Result<(PrecisionReal, usize), SeriesError> {
    // half the budget to the tail, half to the final rounding
    let tol = pow10(digits as i64) / BigRational::from_integer(2.into());
    let sum = certified_sum(coupling, &tol)?;
    let bits = conversion_bits(&sum.partial, digits, policy);
    Ok((PrecisionReal::from_rational(&sum.partial, bits), sum.terms_used))
}

/// Bits such that rounding `q` costs at most `10^-digits / 2` absolutely.
fn conversion_bits(q: &BigRational, digits: u32, policy: &PrecisionPolicy) -> u32 {
    let int_bits = q.abs().ceil().to_integer().bits() as u32;
    policy.bits_for_digits(digits).max(4 * digits + 2) + int_bits
}

/// `sum_{m>=1} z^m / (m^2 C(2m, m))`, equal to `2 arcsin(sqrt(z)/2)^2`.
pub fn central_binomial_sum(z: &BigRational, digits: u32) -> Result<PrecisionReal, SeriesError> {
    central_binomial_sum_with(z, digits, &PrecisionPolicy::default())
}

pub fn central_binomial_sum_with(
    z: &BigRational,
    digits: u32,
    policy: &PrecisionPolicy,
) -> Result<PrecisionReal, SeriesError> {
    let four = BigRational::from_integer(4.into());
    if z.is_negative() || *z >= four {
        return Err(SeriesError::OutOfDomain(z.clone()));
    }
    let bits = policy.bits_for_digits(digits).max(4 * digits + 4);
    if z.is_zero() {
        return Ok(PrecisionReal::zero(bits));
    }
    // term_{m+1} / term_m = z m^2 / (2 (m+1)(2m+1)) < z / 4 for m >= 1
    let r = z / &four;
    let factor = &r / (BigRational::one() - &r);
    let tol = pow10(digits as i64) / BigRational::from_integer(2.into());
    let mut term = z / BigRational::from_integer(central_binomial(1));
    let mut sum = BigRational::zero();
    let mut m: i64 = 1;
    loop {
        sum += &term;
        if &term * &factor <= tol {
            break;
        }
        let mm = BigInt::from(m);
        term = term * z * BigRational::from_integer(&mm * &mm)
            / BigRational::from_integer(BigInt::from(2) * (&mm + 1) * (BigInt::from(2) * &mm + 1));
        m += 1;
    }
    Ok(PrecisionReal::from_rational(&sum, bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::factorial;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn p(c: &[i64]) -> Polynomial {
        Polynomial::from_integers(c)
    }

    fn quartic() -> Coupling {
        Coupling::new(p(&[0, 0, 1]), p(&[0, -1, 2]))
    }

    /// 2^(k+1) (k!)^2 / (2k+2)!
    fn closed_form(k: u64) -> BigRational {
        let f = factorial(k);
        BigRational::new((BigInt::one() << (k + 1)) * &f * &f, factorial(2 * k + 2))
    }

    #[test]
    fn first_terms() {
        assert_eq!(closed_form(0), rat(1, 1));
        assert_eq!(closed_form(1), rat(4, 24));
        assert_eq!(closed_form(2), rat(32, 720));
        assert_eq!(terms(&quartic(), 3).unwrap(), vec![rat(1, 1), rat(1, 6), rat(2, 45)]);
    }

    #[test]
    fn first_partial_sums() {
        assert_eq!(
            partial_sums(&quartic(), 3).unwrap(),
            vec![rat(1, 1), rat(7, 6), rat(109, 90)]
        );
    }

    #[test]
    fn zero_of_d_rejected() {
        let cp = Coupling::new(p(&[1]), p(&[-3, 1]));
        assert_eq!(terms(&cp, 5), Err(SeriesError::ZeroDenominatorFactor(3.into())));
    }

    #[test]
    fn certificates() {
        let cert = ratio_certificate(&quartic());
        assert_eq!(cert.numerator, p(&[1, 2, 1]));
        assert_eq!(cert.denominator, &p(&[2, 1]) * &p(&[3, 2]));
        assert_eq!(cert.rho, Rho::Finite(rat(1, 2)));
        assert_eq!(cert.classification, Classification::Convergent);

        let trivial = ratio_certificate(&Coupling::new(p(&[0, 1]), p(&[0, 1])));
        assert_eq!(
            (trivial.numerator.clone(), trivial.denominator.clone()),
            (p(&[1, 1]), p(&[2, 1]))
        );
        assert_eq!(trivial.rho, Rho::Finite(rat(1, 1)));
        assert_eq!(trivial.classification, Classification::Inconclusive);

        let big = ratio_certificate(&Coupling::new(p(&[0, 0, 1]), p(&[0, 1])));
        assert_eq!(big.rho, Rho::Infinite);
        assert_eq!(big.classification, Classification::Divergent);

        let alternating = ratio_certificate(&Coupling::new(p(&[0, -1]), p(&[0, 3])));
        assert_eq!(alternating.rho, Rho::Finite(rat(-1, 3)));
        assert_eq!(alternating.classification, Classification::Convergent);
    }

    #[test]
    fn ratio_matches_consecutive_terms() {
        for cp in [
            quartic(),
            Coupling::new(p(&[0, 1]), p(&[0, 2])),
            Coupling::new(p(&[1, 1]), p(&[2, 3, 1])),
        ] {
            let cert = ratio_certificate(&cp);
            let ts = terms(&cp, 60).unwrap();
            for k in 0..59 {
                assert_eq!(Some(&ts[k + 1] / &ts[k]), cert.evaluate(k as i64));
            }
        }
    }

    #[test]
    fn threshold_is_sound() {
        let cert = ratio_certificate(&quartic());
        let bound = rat(3, 4);
        let k0 = certified_ratio_threshold(&cert, &bound);
        for k in k0..k0 + 500 {
            assert!(cert.evaluate(k as i64).unwrap().abs() <= bound);
        }
    }

    #[test]
    fn geometric_series_sums_to_one() {
        // c = n, d = 2n: t_k = 1 / (2^(k+1) (k+1)), which sums to ln 2, not 1
        let cp = Coupling::new(p(&[0, 1]), p(&[0, 2]));
        let brute: BigRational = terms(&cp, 400).unwrap().into_iter().sum();
        let (s, _) = sum_to_precision(&cp, 40).unwrap();
        assert!((s.to_rational() - brute).abs() <= pow10(40));

        // constant coupling c = 1, d = 2: t_k = 2^-(k+1), sum = 1
        let geo = Coupling::new(p(&[1]), p(&[2]));
        let (s, _) = sum_to_precision(&geo, 60).unwrap();
        assert!((s.to_rational() - rat(1, 1)).abs() <= pow10(60));
    }

    #[test]
    fn pi_squared_over_eight() {
        // pi^2/8 = 1.23370055013616982735...
        let (s, used) = sum_to_precision(&quartic(), 10).unwrap();
        assert!(s.to_fixed(12).starts_with("1.2337005501"));
        assert!(used < 60);
    }

    #[test]
    fn not_convergent_rejected() {
        let cp = Coupling::new(p(&[0, 1]), p(&[0, 1]));
        assert!(matches!(sum_to_precision(&cp, 5), Err(SeriesError::NotConvergent(_))));
    }

    #[test]
    fn central_binomial_sum_domain() {
        assert!(central_binomial_sum(&rat(0, 1), 10).unwrap().is_zero());
        assert!(matches!(
            central_binomial_sum(&rat(4, 1), 10),
            Err(SeriesError::OutOfDomain(_))
        ));
        assert!(matches!(
            central_binomial_sum(&rat(-1, 2), 10),
            Err(SeriesError::OutOfDomain(_))
        ));
    }

    #[test]
    fn central_binomial_brute_force() {
        let z = rat(3, 1);
        let brute: BigRational = (1..=300u64)
            .map(|m| {
                let zm = num_traits::pow::Pow::pow(z.clone(), m as u32);
                zm / BigRational::from_integer(BigInt::from(m * m) * central_binomial(m))
            })
            .sum();
        let s = central_binomial_sum(&z, 25).unwrap();
        assert!((s.to_rational() - brute).abs() <= pow10(25));
    }
}
