//! Convergents of `b0 + K(a(n) / b(n))` by the Wallis-Euler recurrence.
//!
//! Numerators and denominators both satisfy
//! `y(n) = b(n) y(n-1) + a(n) y(n-2)` for `n >= 1`; they differ only in the
//! starting frame `(y(-1), y(0))`: `(1, b0)` for numerators and `(0, 1)`
//! for denominators.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::expr::ConstExpr;
use crate::numerics::BigRational;
use crate::poly::Polynomial;

/// Default number of recurrence steps.
pub const DEFAULT_DEPTH: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GcfError {
    #[error("partial numerator a(n) is identically zero")]
    ZeroPartialNumerator,
    #[error("partial numerator a(n) vanishes at n = {0}")]
    VanishingPartialNumerator(BigInt),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GcfProblem {
    b0: BigRational,
    a: Polynomial,
    b: Polynomial,
    target: Option<ConstExpr>,
}

impl GcfProblem {
    /// Rejects any `a` with a zero at a positive integer.
    pub fn new(b0: BigRational, a: Polynomial, b: Polynomial, target: Option<ConstExpr>) -> Result<Self, GcfError> {
        if a.is_zero() {
            return Err(GcfError::ZeroPartialNumerator);
        }
        if let Some(n) = a.integer_roots_from(1).into_iter().next() {
            return Err(GcfError::VanishingPartialNumerator(n));
        }
        Ok(Self { b0, a, b, target })
    }

    pub fn b0(&self) -> &BigRational {
        &self.b0
    }

    pub fn a(&self) -> &Polynomial {
        &self.a
    }

    pub fn b(&self) -> &Polynomial {
        &self.b
    }

    pub fn target(&self) -> Option<&ConstExpr> {
        self.target.as_ref()
    }

    pub fn with_b0(&self, b0: BigRational) -> Self {
        Self { b0, ..self.clone() }
    }

    pub fn with_target(&self, target: Option<ConstExpr>) -> Self {
        Self { target, ..self.clone() }
    }
}

/// Which starting frame of the recurrence to follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    Numerator,
    Denominator,
}

impl Frame {
    /// `(y(-1), y(0))`
    pub fn initial(self, problem: &GcfProblem) -> (BigRational, BigRational) {
        match self {
            Frame::Numerator => (BigRational::one(), problem.b0.clone()),
            Frame::Denominator => (BigRational::zero(), BigRational::one()),
        }
    }
}

/// Iterates one solution of the recurrence from an arbitrary frame,
/// yielding `y(0), y(1), ...`.
#[derive(Debug, Clone)]
pub struct RecurrenceIter<'a> {
    a: &'a Polynomial,
    b: &'a Polynomial,
    prev: BigRational,
    cur: BigRational,
    n: u64,
}

impl<'a> RecurrenceIter<'a> {
    pub fn new(problem: &'a GcfProblem, y_minus_1: BigRational, y_0: BigRational) -> Self {
        Self {
            a: &problem.a,
            b: &problem.b,
            prev: y_minus_1,
            cur: y_0,
            n: 0,
        }
    }

    pub fn from_frame(problem: &'a GcfProblem, frame: Frame) -> Self {
        let (m1, y0) = frame.initial(problem);
        Self::new(problem, m1, y0)
    }
}

impl Iterator for RecurrenceIter<'_> {
    type Item = BigRational;

    fn next(&mut self) -> Option<BigRational> {
        let out = self.cur.clone();
        self.n += 1;
        let n = BigInt::from(self.n);
        let next = self.b.evaluate(&n) * &self.cur + self.a.evaluate(&n) * &self.prev;
        self.prev = std::mem::replace(&mut self.cur, next);
        Some(out)
    }
}

/// `(n, A_n, B_n, x_n)`; `x` is `None` where `B_n = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergentTriple {
    pub n: usize,
    pub numerator: BigRational,
    pub denominator: BigRational,
    pub value: Option<BigRational>,
}

/// Convergents for `n = 0..=depth`. Zero denominators do not stop the
/// iteration; see [`zero_denominators`].
pub fn convergents(problem: &GcfProblem, depth: usize) -> Vec<ConvergentTriple> {
    let nums = RecurrenceIter::from_frame(problem, Frame::Numerator);
    let dens = RecurrenceIter::from_frame(problem, Frame::Denominator);
    nums.zip(dens)
        .take(depth + 1)
        .enumerate()
        .map(|(n, (a, b))| {
            let value = (!b.is_zero()).then(|| &a / &b);
            ConvergentTriple {
                n,
                numerator: a,
                denominator: b,
                value,
            }
        })
        .collect()
}

/// Indices whose convergent has a zero denominator.
pub fn zero_denominators(triples: &[ConvergentTriple]) -> Vec<usize> {
    triples.iter().filter(|t| t.value.is_none()).map(|t| t.n).collect()
}

/// `W_n = A_n B_{n-1} - A_{n-1} B_n` for `n = 0..=upto`.
pub fn casoratian(problem: &GcfProblem, upto: usize) -> Vec<BigRational> {
    let (mut prev_a, _) = Frame::Numerator.initial(problem);
    let (mut prev_b, _) = Frame::Denominator.initial(problem);
    convergents(problem, upto)
        .into_iter()
        .map(|t| {
            let w = &t.numerator * &prev_b - &prev_a * &t.denominator;
            prev_a = t.numerator;
            prev_b = t.denominator;
            w
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn quartic() -> GcfProblem {
        GcfProblem::new(
            rat(1, 1),
            Polynomial::from_integers(&[0, 0, 0, 1, -2]),
            Polynomial::from_integers(&[1, 3, 3]),
            None,
        )
        .unwrap()
    }

    #[test]
    fn first_convergents_by_hand() {
        // a(1) = -1, b(1) = 7, a(2) = -24, b(2) = 19
        let c = convergents(&quartic(), 2);
        assert_eq!(c.len(), 3);
        assert_eq!(
            (c[0].numerator.clone(), c[0].denominator.clone()),
            (rat(1, 1), rat(1, 1))
        );
        assert_eq!(c[0].value, Some(rat(1, 1)));
        assert_eq!(
            (c[1].numerator.clone(), c[1].denominator.clone()),
            (rat(6, 1), rat(7, 1))
        );
        assert_eq!(c[1].value, Some(rat(6, 7)));
        // A2 = 19*6 - 24*1, B2 = 19*7 - 24*1
        assert_eq!(
            (c[2].numerator.clone(), c[2].denominator.clone()),
            (rat(90, 1), rat(109, 1))
        );
        assert_eq!(c[2].value, Some(rat(90, 109)));
    }

    #[test]
    fn depth_zero_is_b0() {
        let p = quartic().with_b0(rat(5, 3));
        let c = convergents(&p, 0);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].value, Some(rat(5, 3)));
    }

    #[test]
    fn zero_denominator_is_reported_and_skipped() {
        // b(n) = 0, a(n) = 1: B = 1, 0, 1, 0, ...
        let p = GcfProblem::new(rat(0, 1), Polynomial::from_integers(&[1]), Polynomial::zero(), None).unwrap();
        let c = convergents(&p, 4);
        assert_eq!(c.len(), 5);
        assert_eq!(zero_denominators(&c), vec![1, 3]);
        assert!(c[2].value.is_some());
    }

    #[test]
    fn casoratian_examples() {
        let w = casoratian(&quartic(), 2);
        assert_eq!(w, vec![rat(-1, 1), rat(-1, 1), rat(-24, 1)]);
    }

    #[test]
    fn casoratian_determinant_recursion() {
        let p = quartic();
        let w = casoratian(&p, 60);
        for n in 1..=60 {
            assert_eq!(w[n], -p.a().evaluate_at(n as i64) * &w[n - 1]);
            assert!(!w[n].is_zero());
        }
    }

    #[test]
    fn shared_iterator_satisfies_recurrence() {
        let p = quartic();
        for frame in [Frame::Numerator, Frame::Denominator] {
            let (m1, _) = frame.initial(&p);
            let ys: Vec<_> = RecurrenceIter::from_frame(&p, frame).take(40).collect();
            let mut window = vec![m1];
            window.extend(ys);
            for n in 1..window.len() - 1 {
                let (y2, y1, y0) = (&window[n - 1], &window[n], &window[n + 1]);
                let k = n as i64;
                assert_eq!(*y0, p.b().evaluate_at(k) * y1 + p.a().evaluate_at(k) * y2);
            }
        }
    }

    #[test]
    fn rejects_vanishing_numerator() {
        let b = Polynomial::from_integers(&[1]);
        assert_eq!(
            GcfProblem::new(rat(1, 1), Polynomial::zero(), b.clone(), None),
            Err(GcfError::ZeroPartialNumerator)
        );
        // a(n) = n - 3
        assert_eq!(
            GcfProblem::new(rat(1, 1), Polynomial::from_integers(&[-3, 1]), b.clone(), None),
            Err(GcfError::VanishingPartialNumerator(3.into()))
        );
        // roots at 0 and 1/2 are harmless
        assert!(GcfProblem::new(rat(1, 1), Polynomial::from_integers(&[0, -1, 2]), b, None).is_ok());
    }
}
