//! Search for couplings `(c, d)` with
//!
//! ```text
//! c(n) + d(n+1) = b(n)        c(n) * d(n) = -a(n)
//! ```
//!
//! which split the three-term recurrence into the first-order cascade
//! `y(n) - d(n+1) y(n-1) = c(n) (y(n-1) - d(n) y(n-2))`.
//!
//! `-a` is factored into monic rational linear factors plus an indivisible
//! residual. Every way of distributing those factors between `c` and `d`
//! fixes `c = u*P`, `d = v*Q` up to two scalars, and the sum identity is a
//! linear system in `(u, v)`. The search is complete over such splits only;
//! an empty result does not rule out couplings built from nonlinear factors
//! of the residual.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::numerics::BigRational;
use crate::poly::{factor_rational, Polynomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FactorizeError {
    #[error("partial numerator a(n) is identically zero")]
    ZeroPartialNumerator,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coupling {
    pub c: Polynomial,
    pub d: Polynomial,
}

impl Coupling {
    pub fn new(c: Polynomial, d: Polynomial) -> Self {
        Self { c, d }
    }

    fn order_key(&self, other: &Self) -> Ordering {
        self.c
            .degree()
            .cmp(&other.c.degree())
            .then_with(|| self.c.cmp_coefficients(&other.c))
            .then_with(|| self.d.cmp_coefficients(&other.d))
    }
}

/// Exact check of both coupling identities by canonical polynomial equality.
pub fn verify_coupling(a: &Polynomial, b: &Polynomial, coupling: &Coupling) -> bool {
    let sum = &coupling.c + &coupling.d.shift(1);
    let product = &coupling.c * &coupling.d;
    sum == *b && product == -a
}

/// All couplings reachable through linear-factor splits of `-a`, sorted by
/// degree of `c`, then the coefficients of `c` (lowest degree first), then
/// those of `d`.
pub fn find_couplings(a: &Polynomial, b: &Polynomial) -> Result<Vec<Coupling>, FactorizeError> {
    let neg_a = -a;
    let factored = factor_rational(&neg_a).map_err(|_| FactorizeError::ZeroPartialNumerator)?;
    let k = factored.signed_content();

    let residual_choices: Vec<(Option<&Polynomial>, Option<&Polynomial>)> = match &factored.residual {
        Some(r) => vec![(Some(r), None), (None, Some(r))],
        None => vec![(None, None)],
    };

    let mut found: Vec<Coupling> = Vec::new();
    for (res_p, res_q) in residual_choices {
        for exps in exponent_splits(&factored.factors.iter().map(|(_, m)| *m).collect::<Vec<_>>()) {
            let mut p = Polynomial::constant(BigRational::one());
            let mut q = Polynomial::constant(BigRational::one());
            for ((f, m), e) in factored.factors.iter().zip(&exps) {
                p = &p * &f.pow(*e);
                q = &q * &f.pow(m - e);
            }
            if let Some(r) = res_p {
                p = &p * r;
            }
            if let Some(r) = res_q {
                q = &q * r;
            }
            for (u, v) in solve_scalars(&p, &q.shift(1), b, &k) {
                let coupling = Coupling::new(p.scale(&u), q.scale(&v));
                debug_assert!(verify_coupling(a, b, &coupling));
                if verify_coupling(a, b, &coupling) && !found.contains(&coupling) {
                    found.push(coupling);
                }
            }
        }
    }
    found.sort_by(|x, y| x.order_key(y));
    Ok(found)
}

/// Every vector `e` with `0 <= e[i] <= mults[i]`.
fn exponent_splits(mults: &[u32]) -> Vec<Vec<u32>> {
    mults.iter().fold(vec![Vec::new()], |acc, &m| {
        acc.into_iter()
            .flat_map(|prefix| {
                (0..=m).map(move |e| {
                    let mut v = prefix.clone();
                    v.push(e);
                    v
                })
            })
            .collect()
    })
}

fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let (n, d) = (q.numer(), q.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    (&rn * &rn == *n && &rd * &rd == *d).then(|| BigRational::new(rn, rd))
}

/// Solutions `(u, v)` of `u*P + v*Qs = b` (coefficientwise) with `u*v = k`.
///
/// Rank 2: two independent rows fix `(u, v)`, the remaining rows are
/// checked by substitution. Rank 1: one linear relation `alpha*u + beta*v =
/// gamma` remains, which together with `u*v = k` is a quadratic solved over
/// the rationals.
fn solve_scalars(p: &Polynomial, qs: &Polynomial, b: &Polynomial, k: &BigRational) -> Vec<(BigRational, BigRational)> {
    let len = [p, qs, b].iter().map(|x| x.coefficients().len()).max().unwrap_or(0);
    let rows: Vec<[BigRational; 3]> = (0..len)
        .map(|i| [p.coefficient(i), qs.coefficient(i), b.coefficient(i)])
        .collect();
    let satisfies = |u: &BigRational, v: &BigRational| rows.iter().all(|[x, y, z]| &(x * u + y * v) == z);

    // a pair of rows with nonzero determinant
    for (i, r1) in rows.iter().enumerate() {
        for r2 in &rows[i + 1..] {
            let det = &r1[0] * &r2[1] - &r1[1] * &r2[0];
            if det.is_zero() {
                continue;
            }
            let u = (&r1[2] * &r2[1] - &r1[1] * &r2[2]) / &det;
            let v = (&r1[0] * &r2[2] - &r1[2] * &r2[0]) / &det;
            return if satisfies(&u, &v) && &(&u * &v) == k {
                vec![(u, v)]
            } else {
                Vec::new()
            };
        }
    }

    // rank <= 1: every row is a multiple of one nonzero (alpha, beta)
    let Some(pivot) = rows.iter().find(|r| !r[0].is_zero() || !r[1].is_zero()) else {
        return Vec::new();
    };
    let (alpha, beta, gamma) = (&pivot[0], &pivot[1], &pivot[2]);
    let mut candidates: Vec<(BigRational, BigRational)> = Vec::new();
    if alpha.is_zero() {
        let v = gamma / beta;
        if !v.is_zero() {
            candidates.push((k / &v, v));
        }
    } else if beta.is_zero() {
        let u = gamma / alpha;
        if !u.is_zero() {
            candidates.push((u.clone(), k / &u));
        }
    } else {
        // beta v^2 - gamma v + alpha k = 0
        let disc = gamma * gamma - BigRational::from_integer(4.into()) * beta * alpha * k;
        if let Some(root) = rational_sqrt(&disc) {
            let two_beta = BigRational::from_integer(2.into()) * beta;
            for v in [(gamma + &root) / &two_beta, (gamma - &root) / &two_beta] {
                let u = (gamma - beta * &v) / alpha;
                candidates.push((u, v));
            }
        }
    }
    candidates.dedup();
    candidates
        .into_iter()
        .filter(|(u, v)| satisfies(u, v) && &(u * v) == k)
        .collect()
}
