//! JSON document for [`VerificationReport`].
//!
//! Rationals are written as `p/q` text, polynomials and constants in the
//! expression grammar, reals as `{decimal, precision_bits}` where the decimal
//! has enough digits to round back to the identical binary value.

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse_const_expr, parse_polynomial, ParseError};
use crate::factorize::Coupling;
use crate::gcf::{GcfError, GcfProblem};
use crate::numerics::{BigRational, NumericsError, PrecisionReal};
use crate::series::{Classification, Rho};
use crate::verify::{Verdict, VerificationReport};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("field `{field}`: {source}")]
    Expr { field: &'static str, source: ParseError },
    #[error("field `{field}`: bad rational `{text}`")]
    Rational { field: &'static str, text: String },
    #[error("field `{field}`: {source}")]
    Real { field: &'static str, source: NumericsError },
    #[error(transparent)]
    Problem(#[from] GcfError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    pub b0: String,
    pub a: String,
    pub b: String,
    pub target: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingDoc {
    pub c: String,
    pub d: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealDoc {
    pub decimal: String,
    pub precision_bits: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub problem: ProblemDoc,
    pub coupling: Option<CouplingDoc>,
    pub alternative_couplings: Vec<CouplingDoc>,
    pub boundary_rule_holds: bool,
    pub exact_identity_depth: Option<i64>,
    pub numerator_product_depth: Option<i64>,
    pub casoratian_depth: i64,
    pub rho: Option<String>,
    pub classification: Option<Classification>,
    pub series_value: Option<RealDoc>,
    pub terms_used: Option<usize>,
    pub gcf_value: Option<RealDoc>,
    pub target_value: Option<RealDoc>,
    pub digits_matched: u32,
    pub certified_digits: u32,
    pub monotone_convergents: bool,
    pub cauchy_digits: u32,
    pub requested_digits: u32,
    pub depth: usize,
    pub verdict: Verdict,
}

fn coupling_doc(c: &Coupling) -> CouplingDoc {
    CouplingDoc {
        c: c.c.to_string(),
        d: c.d.to_string(),
    }
}

fn real_doc(x: &PrecisionReal) -> RealDoc {
    RealDoc {
        decimal: x.to_round_trip_string(),
        precision_bits: x.precision_bits(),
    }
}

impl From<&VerificationReport> for ReportDocument {
    fn from(r: &VerificationReport) -> Self {
        let p = &r.problem;
        ReportDocument {
            problem: ProblemDoc {
                b0: p.b0().to_string(),
                a: p.a().to_string(),
                b: p.b().to_string(),
                target: p.target().map(|t| t.to_string()),
            },
            coupling: r.coupling.as_ref().map(coupling_doc),
            alternative_couplings: r.alternative_couplings.iter().map(coupling_doc).collect(),
            boundary_rule_holds: r.boundary_rule_holds,
            exact_identity_depth: r.exact_identity_depth,
            numerator_product_depth: r.numerator_product_depth,
            casoratian_depth: r.casoratian_depth,
            rho: r.rho.as_ref().map(|x| x.to_string()),
            classification: r.classification,
            series_value: r.series_value.as_ref().map(real_doc),
            terms_used: r.terms_used,
            gcf_value: r.gcf_value.as_ref().map(real_doc),
            target_value: r.target_value.as_ref().map(real_doc),
            digits_matched: r.digits_matched,
            certified_digits: r.certified_digits,
            monotone_convergents: r.monotone_convergents,
            cauchy_digits: r.cauchy_digits,
            requested_digits: r.requested_digits,
            depth: r.depth,
            verdict: r.verdict,
        }
    }
}

fn rational(field: &'static str, text: &str) -> Result<BigRational, ReportError> {
    BigRational::from_str(text.trim()).map_err(|_| ReportError::Rational {
        field,
        text: text.to_string(),
    })
}

fn polynomial(field: &'static str, text: &str) -> Result<crate::poly::Polynomial, ReportError> {
    parse_polynomial(text).map_err(|source| ReportError::Expr { field, source })
}

fn coupling(field: &'static str, doc: &CouplingDoc) -> Result<Coupling, ReportError> {
    Ok(Coupling::new(polynomial(field, &doc.c)?, polynomial(field, &doc.d)?))
}

fn real(field: &'static str, doc: &RealDoc) -> Result<PrecisionReal, ReportError> {
    PrecisionReal::parse_decimal(&doc.decimal, doc.precision_bits).map_err(|source| ReportError::Real { field, source })
}

fn rho(text: &str) -> Result<Rho, ReportError> {
    if text == "infinity" {
        Ok(Rho::Infinite)
    } else {
        rational("rho", text).map(Rho::Finite)
    }
}

impl TryFrom<&ReportDocument> for VerificationReport {
    type Error = ReportError;

    fn try_from(d: &ReportDocument) -> Result<Self, ReportError> {
        let target = d
            .problem
            .target
            .as_deref()
            .map(|t| {
                parse_const_expr(t).map_err(|source| ReportError::Expr {
                    field: "target",
                    source,
                })
            })
            .transpose()?;
        let problem = GcfProblem::new(
            rational("b0", &d.problem.b0)?,
            polynomial("a", &d.problem.a)?,
            polynomial("b", &d.problem.b)?,
            target,
        )?;
        Ok(VerificationReport {
            problem,
            coupling: d.coupling.as_ref().map(|c| coupling("coupling", c)).transpose()?,
            alternative_couplings: d
                .alternative_couplings
                .iter()
                .map(|c| coupling("alternative_couplings", c))
                .collect::<Result<_, _>>()?,
            boundary_rule_holds: d.boundary_rule_holds,
            exact_identity_depth: d.exact_identity_depth,
            numerator_product_depth: d.numerator_product_depth,
            casoratian_depth: d.casoratian_depth,
            rho: d.rho.as_deref().map(rho).transpose()?,
            classification: d.classification,
            series_value: d.series_value.as_ref().map(|x| real("series_value", x)).transpose()?,
            terms_used: d.terms_used,
            gcf_value: d.gcf_value.as_ref().map(|x| real("gcf_value", x)).transpose()?,
            target_value: d.target_value.as_ref().map(|x| real("target_value", x)).transpose()?,
            digits_matched: d.digits_matched,
            certified_digits: d.certified_digits,
            monotone_convergents: d.monotone_convergents,
            cauchy_digits: d.cauchy_digits,
            requested_digits: d.requested_digits,
            depth: d.depth,
            verdict: d.verdict,
        })
    }
}

pub fn to_json(report: &VerificationReport) -> String {
    serde_json::to_string_pretty(&ReportDocument::from(report)).expect("report document serializes")
}

#[derive(Debug, Error)]
pub enum ReadReportError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Report(#[from] ReportError),
}

pub fn from_json(text: &str) -> Result<VerificationReport, ReadReportError> {
    let doc: ReportDocument = serde_json::from_str(text)?;
    Ok(VerificationReport::try_from(&doc)?)
}
