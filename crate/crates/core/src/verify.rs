//! End-to-end verification of a continued fraction identity.
//!
//! The pipeline: find a coupling `(c, d)`, check the boundary rule
//! `b0 = d(1)`, confirm exactly that the numerators collapse to
//! `A_n = prod_{j=1..n+1} d(j)` and that `x_n * S_n = 1`, certify the
//! series by its ratio limit, sum it to the requested accuracy, and compare
//! the reciprocal with the target constant.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{eval_const_expr, EvalError};
use crate::factorize::{find_couplings, Coupling, FactorizeError};
use crate::gcf::{casoratian, convergents, ConvergentTriple, Frame, GcfProblem, RecurrenceIter};
use crate::numerics::{agreement_digits, pow10, BigRational, PrecisionPolicy, PrecisionReal};
use crate::series::{certified_sum, ratio_certificate, Classification, Rho, SeriesError, TermStream};

/// Extra decimal digits carried by the series sum beyond the request.
pub const GUARD_DIGITS: u32 = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("boundary rule b0 = d(1) fails: b0 = {b0}, d(1) = {d1}")]
    BoundaryRuleViolated { b0: Box<BigRational>, d1: Box<BigRational> },
    #[error("series is not certified convergent (rho = {0})")]
    NotConvergent(Rho),
    #[error("convergent {0} has a zero denominator")]
    ZeroDenominatorConvergent(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Factorize(#[from] FactorizeError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("target evaluation failed: {0}")]
    Target(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Verified,
    RefutedAtDepth,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Verified => "verified",
            Verdict::RefutedAtDepth => "refuted-at-depth",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "verified" => Ok(Verdict::Verified),
            "refuted-at-depth" => Ok(Verdict::RefutedAtDepth),
            "inconclusive" => Ok(Verdict::Inconclusive),
            other => Err(format!("unknown verdict `{other}`")),
        }
    }
}

/// `w_k = y_k - d(k+1) y_{k-1}` along one frame's solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxiliaryTrace {
    pub frame: Frame,
    pub w: Vec<BigRational>,
}

pub fn auxiliary_trace(problem: &GcfProblem, coupling: &Coupling, frame: Frame, depth: usize) -> AuxiliaryTrace {
    let (mut prev, _) = frame.initial(problem);
    let w = RecurrenceIter::from_frame(problem, frame)
        .take(depth + 1)
        .enumerate()
        .map(|(k, y)| {
            let w = &y - coupling.d.evaluate_at(k as i64 + 1) * &prev;
            prev = y;
            w
        })
        .collect();
    AuxiliaryTrace { frame, w }
}

pub fn check_boundary_selection(problem: &GcfProblem, coupling: &Coupling) -> bool {
    *problem.b0() == coupling.d.evaluate_at(1)
}

fn require_boundary(problem: &GcfProblem, coupling: &Coupling) -> Result<(), VerifyError> {
    if check_boundary_selection(problem, coupling) {
        Ok(())
    } else {
        Err(VerifyError::BoundaryRuleViolated {
            b0: Box::new(problem.b0().clone()),
            d1: Box::new(coupling.d.evaluate_at(1)),
        })
    }
}

/// Length of the longest prefix (as a last index, `-1` if empty) on which
/// `holds` is true.
fn prefix_depth(mut holds: impl Iterator<Item = bool>) -> i64 {
    let mut last = -1;
    while let Some(true) = holds.next() {
        last += 1;
    }
    last
}

fn numerator_product_depth(triples: &[ConvergentTriple], coupling: &Coupling) -> i64 {
    let mut product = coupling.d.evaluate_at(1);
    prefix_depth(triples.iter().map(|t| {
        let ok = t.numerator == product;
        product *= coupling.d.evaluate_at(t.n as i64 + 2);
        ok
    }))
}

/// Largest `n <= depth` with `A_m = prod_{j=1..m+1} d(j)` for all `m <= n`;
/// `-1` if it already fails at `n = 0`.
pub fn check_numerator_product(problem: &GcfProblem, coupling: &Coupling, depth: usize) -> i64 {
    numerator_product_depth(&convergents(problem, depth), coupling)
}

fn reciprocal_identity_depth(triples: &[ConvergentTriple], coupling: &Coupling) -> Result<i64, VerifyError> {
    let mut sum = BigRational::zero();
    let mut stream = TermStream::new(coupling)?;
    let mut checks = Vec::with_capacity(triples.len());
    for t in triples {
        sum += stream.next().expect("infinite stream");
        let x = t.value.as_ref().ok_or(VerifyError::ZeroDenominatorConvergent(t.n))?;
        checks.push((x * &sum).is_one());
    }
    Ok(prefix_depth(checks.into_iter()))
}

/// Largest `n <= depth` with `x_m * S_m = 1` exactly for all `m <= n`.
pub fn check_reciprocal_identity(problem: &GcfProblem, coupling: &Coupling, depth: usize) -> Result<i64, VerifyError> {
    require_boundary(problem, coupling)?;
    reciprocal_identity_depth(&convergents(problem, depth), coupling)
}

fn casoratian_depth(problem: &GcfProblem, depth: usize) -> i64 {
    let w = casoratian(problem, depth);
    prefix_depth(
        w.iter()
            .enumerate()
            .map(|(n, wn)| !wn.is_zero() && (n == 0 || *wn == -problem.a().evaluate_at(n as i64) * &w[n - 1])),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PincherleEvidence {
    /// `x_n` strictly decreasing on `0..=depth`.
    pub monotone: bool,
    /// Leading digits on which `x_depth` and `x_{depth/2}` agree.
    pub cauchy_digits: u32,
}

fn convergent_evidence(triples: &[ConvergentTriple], cap: u32) -> PincherleEvidence {
    let monotone = triples
        .windows(2)
        .all(|w| matches!((&w[0].value, &w[1].value), (Some(a), Some(b)) if b < a))
        && triples.iter().all(|t| t.value.is_some());
    let depth = triples.len().saturating_sub(1);
    let cauchy_digits = match (&triples[depth].value, &triples[depth / 2].value) {
        (Some(x), Some(y)) => agreement_digits(x, y, cap),
        _ => 0,
    };
    PincherleEvidence {
        monotone,
        cauchy_digits,
    }
}

pub fn pincherle_evidence(
    problem: &GcfProblem,
    coupling: &Coupling,
    depth: usize,
    digits: u32,
) -> Result<PincherleEvidence, VerifyError> {
    let cert = ratio_certificate(coupling);
    if cert.classification != Classification::Convergent {
        return Err(VerifyError::NotConvergent(cert.rho));
    }
    Ok(convergent_evidence(&convergents(problem, depth), digits))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub problem: GcfProblem,
    pub coupling: Option<Coupling>,
    pub alternative_couplings: Vec<Coupling>,
    pub boundary_rule_holds: bool,
    pub exact_identity_depth: Option<i64>,
    pub numerator_product_depth: Option<i64>,
    pub casoratian_depth: i64,
    pub rho: Option<Rho>,
    pub classification: Option<Classification>,
    pub series_value: Option<PrecisionReal>,
    pub terms_used: Option<usize>,
    /// `1 / S` when the series route ran, else the deepest convergent.
    pub gcf_value: Option<PrecisionReal>,
    pub target_value: Option<PrecisionReal>,
    pub digits_matched: u32,
    /// Digits of `gcf_value` backed by a rigorous (series) or empirical
    /// (convergent) error estimate.
    pub certified_digits: u32,
    pub monotone_convergents: bool,
    pub cauchy_digits: u32,
    pub requested_digits: u32,
    pub depth: usize,
    pub verdict: Verdict,
}

impl VerificationReport {
    /// All exact structural checks passed at full depth.
    pub fn structural_checks_passed(&self) -> bool {
        let full = Some(self.depth as i64);
        self.coupling.is_some()
            && self.boundary_rule_holds
            && self.exact_identity_depth == full
            && self.numerator_product_depth == full
            && self.casoratian_depth == self.depth as i64
            && self.classification == Some(Classification::Convergent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub digits: u32,
    pub depth: usize,
    pub policy: PrecisionPolicy,
}

impl VerifyOptions {
    pub fn new(digits: u32, depth: usize) -> Self {
        Self {
            digits,
            depth,
            policy: PrecisionPolicy::default(),
        }
    }
}

pub fn verify_conjecture(problem: &GcfProblem, digits: u32, depth: usize) -> Result<VerificationReport, VerifyError> {
    verify_conjecture_with(problem, &VerifyOptions::new(digits, depth))
}

pub fn verify_conjecture_with(problem: &GcfProblem, opts: &VerifyOptions) -> Result<VerificationReport, VerifyError> {
    if opts.digits < 1 {
        return Err(VerifyError::InvalidArgument("digits must be at least 1".into()));
    }
    if opts.depth < 4 {
        return Err(VerifyError::InvalidArgument("depth must be at least 4".into()));
    }
    let (digits, depth) = (opts.digits, opts.depth);
    let work_digits = digits + GUARD_DIGITS;
    let bits = opts.policy.bits_for_digits(work_digits);

    let couplings = find_couplings(problem.a(), problem.b())?;
    let chosen = couplings.iter().position(|c| check_boundary_selection(problem, c));
    let triples = convergents(problem, depth);
    let evidence = convergent_evidence(&triples, work_digits);
    let target_value = problem.target().map(|t| eval_const_expr(t, bits)).transpose()?;

    let mut report = VerificationReport {
        problem: problem.clone(),
        coupling: None,
        alternative_couplings: couplings.clone(),
        boundary_rule_holds: false,
        exact_identity_depth: None,
        numerator_product_depth: None,
        casoratian_depth: casoratian_depth(problem, depth),
        rho: None,
        classification: None,
        series_value: None,
        terms_used: None,
        gcf_value: None,
        target_value,
        digits_matched: 0,
        certified_digits: 0,
        monotone_convergents: evidence.monotone,
        cauchy_digits: evidence.cauchy_digits,
        requested_digits: digits,
        depth,
        verdict: Verdict::Inconclusive,
    };

    let mut series_ok = false;
    if let Some(i) = chosen {
        let coupling = couplings[i].clone();
        report.alternative_couplings.remove(i);
        report.boundary_rule_holds = true;
        report.exact_identity_depth = Some(reciprocal_identity_depth(&triples, &coupling)?);
        report.numerator_product_depth = Some(numerator_product_depth(&triples, &coupling));
        let cert = ratio_certificate(&coupling);
        report.rho = Some(cert.rho.clone());
        report.classification = Some(cert.classification);
        if cert.classification == Classification::Convergent {
            let tol = pow10(work_digits as i64 + 1);
            let sum = certified_sum(&coupling, &tol)?;
            if sum.partial.abs() > sum.tail_bound {
                let sbits = bits + sum.partial.abs().ceil().to_integer().bits() as u32;
                let series = PrecisionReal::from_rational(&sum.partial, sbits);
                let gcf_exact = sum.partial.recip();
                // |1/S~ - 1/S| <= T / (|S~| (|S~| - T))
                let s = sum.partial.abs();
                let err = &sum.tail_bound / (&s * (&s - &sum.tail_bound));
                let gcf = PrecisionReal::from_rational(&gcf_exact, bits);
                let rounding = gcf_exact.abs() * BigRational::new(1.into(), num_bigint::BigInt::one() << (bits - 1));
                report.certified_digits = agreement_digits(&(&gcf_exact + err + rounding), &gcf_exact, work_digits);
                report.series_value = Some(series);
                report.gcf_value = Some(gcf);
                report.terms_used = Some(sum.terms_used);
                series_ok = true;
            }
        }
        report.coupling = Some(coupling);
    }

    if !series_ok {
        // numerical fallback: deepest available convergent
        report.gcf_value = triples
            .iter()
            .rev()
            .find_map(|t| t.value.as_ref())
            .map(|x| PrecisionReal::from_rational(x, bits));
        report.certified_digits = evidence.cauchy_digits;
    }

    if let (Some(g), Some(t)) = (&report.gcf_value, &report.target_value) {
        let cap = report
            .certified_digits
            .min(g.precision_bits() / 4)
            .min(t.precision_bits() / 4);
        report.digits_matched = agreement_digits(&g.to_rational(), &t.to_rational(), cap);
    }

    report.verdict = if !(series_ok && report.structural_checks_passed()) || report.target_value.is_none() {
        Verdict::Inconclusive
    } else if report.digits_matched >= digits {
        Verdict::Verified
    } else {
        Verdict::RefutedAtDepth
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_const_expr;
    use crate::poly::Polynomial;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn p(c: &[i64]) -> Polynomial {
        Polynomial::from_integers(c)
    }

    fn quartic(target: Option<&str>) -> GcfProblem {
        GcfProblem::new(
            rat(1, 1),
            p(&[0, 0, 0, 1, -2]),
            p(&[1, 3, 3]),
            target.map(|t| parse_const_expr(t).unwrap()),
        )
        .unwrap()
    }

    fn coupling() -> Coupling {
        Coupling::new(p(&[0, 0, 1]), p(&[0, -1, 2]))
    }

    #[test]
    fn numerator_trace_vanishes() {
        let t = auxiliary_trace(&quartic(None), &coupling(), Frame::Numerator, 40);
        assert_eq!(t.w.len(), 41);
        assert!(t.w.iter().all(|w| w.is_zero()));
    }

    #[test]
    fn denominator_trace_propagates() {
        let t = auxiliary_trace(&quartic(None), &coupling(), Frame::Denominator, 40);
        assert_eq!(&t.w[..3], &[rat(1, 1), rat(1, 1), rat(4, 1)]);
        for k in 1..=40 {
            assert_eq!(t.w[k], coupling().c.evaluate_at(k as i64) * &t.w[k - 1]);
        }
    }

    #[test]
    fn perturbed_frame_trace() {
        let t = auxiliary_trace(&quartic(None).with_b0(rat(2, 1)), &coupling(), Frame::Numerator, 3);
        assert_eq!(t.w[0], rat(1, 1));
    }

    #[test]
    fn boundary_rule() {
        assert!(check_boundary_selection(&quartic(None), &coupling()));
        assert!(!check_boundary_selection(
            &quartic(None).with_b0(rat(2, 1)),
            &coupling()
        ));
        let trivial = GcfProblem::new(rat(1, 1), p(&[0, 0, -1]), p(&[1, 2]), None).unwrap();
        assert!(check_boundary_selection(
            &trivial,
            &Coupling::new(p(&[0, 1]), p(&[0, 1]))
        ));
    }

    #[test]
    fn numerator_product_examples() {
        assert_eq!(check_numerator_product(&quartic(None), &coupling(), 50), 50);
        let c = convergents(&quartic(None), 1);
        assert_eq!(
            c[1].numerator,
            coupling().d.evaluate_at(1) * coupling().d.evaluate_at(2)
        );
        assert_eq!(
            check_numerator_product(&quartic(None).with_b0(rat(2, 1)), &coupling(), 10),
            -1
        );
    }

    #[test]
    fn reciprocal_identity() {
        assert_eq!(check_reciprocal_identity(&quartic(None), &coupling(), 60), Ok(60));
        assert!(matches!(
            check_reciprocal_identity(&quartic(None).with_b0(rat(2, 1)), &coupling(), 5),
            Err(VerifyError::BoundaryRuleViolated { .. })
        ));
    }

    #[test]
    fn trace_and_product_views_agree() {
        for b0 in [rat(1, 1), rat(2, 1), rat(1, 2)] {
            let prob = quartic(None).with_b0(b0);
            let zero_trace = auxiliary_trace(&prob, &coupling(), Frame::Numerator, 30)
                .w
                .iter()
                .all(|w| w.is_zero());
            let full = check_numerator_product(&prob, &coupling(), 30) == 30;
            assert_eq!(zero_trace, full);
        }
    }

    #[test]
    fn pincherle_examples() {
        let ev = pincherle_evidence(&quartic(None), &coupling(), 64, 30).unwrap();
        assert!(ev.monotone);
        assert!(ev.cauchy_digits >= 8);
        let c = convergents(&quartic(None), 1);
        assert!(c[0].value > c[1].value);
        let divergent = Coupling::new(p(&[0, 0, 1]), p(&[0, 1]));
        assert!(matches!(
            pincherle_evidence(&quartic(None), &divergent, 10, 10),
            Err(VerifyError::NotConvergent(Rho::Infinite))
        ));
    }

    #[test]
    fn verify_quartic_identity() {
        let r = verify_conjecture(&quartic(Some("8/pi^2")), 30, 120).unwrap();
        assert_eq!(r.verdict, Verdict::Verified);
        assert!(r.digits_matched >= 30);
        assert_eq!(r.rho, Some(Rho::Finite(rat(1, 2))));
        assert_eq!(r.coupling, Some(coupling()));
        assert!(r.alternative_couplings.is_empty());
        let product = r.gcf_value.as_ref().unwrap().to_rational() * r.series_value.as_ref().unwrap().to_rational();
        assert!((product - rat(1, 1)).abs() < pow10(40));
    }

    #[test]
    fn wrong_target_is_refuted() {
        let r = verify_conjecture(&quartic(Some("pi^2/8")), 20, 64).unwrap();
        assert_eq!(r.verdict, Verdict::RefutedAtDepth);
        assert_eq!(r.digits_matched, 0);
    }

    #[test]
    fn no_coupling_is_inconclusive() {
        let prob = GcfProblem::new(rat(1, 1), p(&[-1]), p(&[1]), None).unwrap();
        let r = verify_conjecture(&prob, 10, 16).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(r.coupling.is_none());
        assert!(r.series_value.is_none());
        assert_eq!(r.exact_identity_depth, None);
    }

    #[test]
    fn no_target_is_inconclusive() {
        let r = verify_conjecture(&quartic(None), 10, 32).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(r.structural_checks_passed());
        assert!(r.series_value.is_some());
    }

    #[test]
    fn argument_guards() {
        assert!(matches!(
            verify_conjecture(&quartic(None), 0, 10),
            Err(VerifyError::InvalidArgument(_))
        ));
        assert!(matches!(
            verify_conjecture(&quartic(None), 5, 3),
            Err(VerifyError::InvalidArgument(_))
        ));
    }

    #[test]
    fn report_value_agrees_with_deep_convergent() {
        let r = verify_conjecture(&quartic(Some("8/pi^2")), 20, 80).unwrap();
        let x = convergents(&quartic(None), 80).pop().unwrap().value.unwrap();
        let g = r.gcf_value.unwrap().to_rational();
        assert!(agreement_digits(&g, &x, 100) >= r.cauchy_digits);
    }
}
