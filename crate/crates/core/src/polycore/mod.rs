//! Exact multivariate polynomials over the rationals.
//!
//! Variables are positional; names only matter for parsing and printing.

mod monomial;
mod parse;
mod polymatrix;
mod polynomial;
pub mod rational;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use monomial::{default_names, Monomial};
pub use parse::{infer_var_names, parse_polynomial};
pub use polymatrix::PolyMatrix;
pub use polynomial::Polynomial;
pub use rational::Rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable {name:?} at offset {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("variable count mismatch: {left} vs {right}")]
    NvarsMismatch { left: usize, right: usize },
    #[error("variable index {var} out of range for {nvars} variables")]
    VarOutOfRange { var: usize, nvars: usize },
    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("point has {got} coordinates, expected {expected}")]
    PointLength { expected: usize, got: usize },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("inexact polynomial division")]
    InexactDivision,
    #[error("invalid document: {0}")]
    Document(String),
}

/// One term of a [`PolyDoc`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDoc {
    pub exponents: Vec<u32>,
    pub coeff: String,
}

/// JSON form of a polynomial: `{nvars, terms: [{exponents, coeff: "a/b"}]}`.
/// Terms are written largest first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyDoc {
    pub nvars: usize,
    pub terms: Vec<TermDoc>,
}

impl From<&Polynomial> for PolyDoc {
    fn from(p: &Polynomial) -> Self {
        PolyDoc {
            nvars: p.nvars(),
            terms: p
                .terms()
                .rev()
                .map(|(m, c)| TermDoc {
                    exponents: m.exps().to_vec(),
                    coeff: rational::fmt_rational(c),
                })
                .collect(),
        }
    }
}

impl TryFrom<&PolyDoc> for Polynomial {
    type Error = PolyError;

    fn try_from(doc: &PolyDoc) -> Result<Self, PolyError> {
        let mut p = Polynomial::zero(doc.nvars);
        for t in &doc.terms {
            if t.exponents.len() != doc.nvars {
                return Err(PolyError::Document(format!(
                    "term has {} exponents, expected {}",
                    t.exponents.len(),
                    doc.nvars
                )));
            }
            let c = rational::parse_rational(&t.coeff).map_err(PolyError::Document)?;
            p.add_term(Monomial::new(t.exponents.clone()), c);
        }
        Ok(p)
    }
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolyDoc::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let doc = PolyDoc::deserialize(d)?;
        Polynomial::try_from(&doc).map_err(serde::de::Error::custom)
    }
}

/// Reads a polynomial from either its JSON document or plain text. Text
/// input may start with a `vars: a b c` line; otherwise variables are the
/// identifiers found in the text, in natural order.
pub fn read_polynomial(input: &str) -> Result<(Polynomial, Vec<String>), PolyError> {
    let trimmed = input.trim_start();
    if trimmed.starts_with('{') {
        let doc: PolyDoc = serde_json::from_str(trimmed).map_err(|e| PolyError::Document(e.to_string()))?;
        let p = Polynomial::try_from(&doc)?;
        return Ok((p, default_names(doc.nvars)));
    }
    let (names, body) = match trimmed.strip_prefix("vars:") {
        Some(rest) => {
            let (line, body) = rest.split_once('\n').unwrap_or((rest, ""));
            (line.split_whitespace().map(String::from).collect(), body.to_string())
        }
        None => (infer_var_names(trimmed)?, trimmed.to_string()),
    };
    let p = parse_polynomial(&body, &names)?;
    Ok((p, names))
}
