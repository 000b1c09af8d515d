use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::ldl::{rational_psd_check, PsdVerdict, RationalMatrix};
use super::{GramError, MonomialBasis};
use crate::polycore::rational::{fmt_rational, parse_rational};
use crate::polycore::{default_names, Monomial, PolyDoc, Polynomial, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct GramBlock {
    pub basis: MonomialBasis,
    pub q: RationalMatrix,
}

/// `(a + x_1^2 + ... + x_k^2)^r` with `a = 1` when `affine` and `0`
/// otherwise; `k = vars`, or every variable when `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Multiplier {
    pub r: u32,
    pub vars: Option<usize>,
    pub affine: bool,
}

impl Multiplier {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn power(r: u32) -> Self {
        Self { r, ..Self::default() }
    }

    pub fn polynomial(&self, nvars: usize) -> Polynomial {
        let mut base = Polynomial::sum_of_squares_power(nvars, self.vars.unwrap_or(nvars), 1);
        if self.affine {
            base = &base + &Polynomial::one(nvars);
        }
        base.pow(self.r)
    }

    /// `multiplier * p`.
    pub fn apply(&self, p: &Polynomial) -> Polynomial {
        if self.r == 0 {
            p.clone()
        } else {
            &self.polynomial(p.nvars()) * p
        }
    }
}

/// Claim: `multiplier * target = sum_blocks z'Qz` with every `Q` PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct GramCertificate {
    pub target: Polynomial,
    pub multiplier: Multiplier,
    pub blocks: Vec<GramBlock>,
}

impl GramCertificate {
    /// The polynomial the blocks must expand to.
    pub fn full_target(&self) -> Polynomial {
        self.multiplier.apply(&self.target)
    }
}

#[derive(Serialize, Deserialize)]
struct BlockDoc {
    monomials: Vec<Vec<u32>>,
    #[serde(rename = "Q")]
    q: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct CertificateDoc {
    target: PolyDoc,
    multiplier_r: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    multiplier_vars: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    multiplier_affine: bool,
    blocks: Vec<BlockDoc>,
}

impl Serialize for GramCertificate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CertificateDoc {
            target: PolyDoc::from(&self.target),
            multiplier_r: self.multiplier.r,
            multiplier_vars: self.multiplier.vars,
            multiplier_affine: self.multiplier.affine,
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockDoc {
                    monomials: b.basis.iter().map(|m| m.exps().to_vec()).collect(),
                    q: b.q.iter().map(|row| row.iter().map(fmt_rational).collect()).collect(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GramCertificate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let doc = CertificateDoc::deserialize(d)?;
        let target = Polynomial::try_from(&doc.target).map_err(D::Error::custom)?;
        let nvars = target.nvars();
        let mut blocks = Vec::with_capacity(doc.blocks.len());
        for (k, b) in doc.blocks.into_iter().enumerate() {
            let n = b.monomials.len();
            if b.monomials.iter().any(|e| e.len() != nvars) {
                return Err(D::Error::custom(format!("block {k}: exponent length differs from {nvars}")));
            }
            if b.q.len() != n || b.q.iter().any(|row| row.len() != n) {
                return Err(D::Error::custom(format!("block {k}: Q must be {n}x{n}")));
            }
            let q = b
                .q
                .iter()
                .map(|row| row.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(D::Error::custom)?;
            blocks.push(GramBlock {
                basis: MonomialBasis::new(nvars, b.monomials.into_iter().map(Monomial::new).collect()),
                q,
            });
        }
        Ok(GramCertificate {
            target,
            multiplier: Multiplier {
                r: doc.multiplier_r,
                vars: doc.multiplier_vars,
                affine: doc.multiplier_affine,
            },
            blocks,
        })
    }
}

/// `sum_blocks z'Qz`, without the multiplier.
pub fn expand_gram(cert: &GramCertificate) -> Polynomial {
    let nvars = cert.target.nvars();
    let mut out = Polynomial::zero(nvars);
    for b in &cert.blocks {
        let z = &b.basis.monomials;
        for i in 0..z.len() {
            for j in 0..z.len() {
                out.add_term(z[i].mul(&z[j]), b.q[i][j].clone());
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub monomial: Monomial,
    pub expected: Rational,
    pub actual: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockReport {
    pub size: usize,
    pub symmetric: bool,
    pub verdict: Option<PsdVerdict>,
    pub pivots: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub identity_holds: bool,
    /// Largest monomial (graded-lex) where the identity fails.
    pub first_mismatch: Option<Mismatch>,
    pub blocks: Vec<BlockReport>,
    pub pass: bool,
    pub names: Vec<String>,
}

impl VerificationReport {
    pub fn all_positive_definite(&self) -> bool {
        self.blocks.iter().all(|b| b.verdict == Some(PsdVerdict::PositiveDefinite))
    }

    /// Human-readable first discrepancy, if any.
    pub fn first_failure(&self) -> Option<String> {
        if let Some(m) = &self.first_mismatch {
            return Some(format!(
                "coefficient of {} is {} on the left but {} on the right",
                m.monomial.format_with(&self.names),
                fmt_rational(&m.expected),
                fmt_rational(&m.actual)
            ));
        }
        self.blocks.iter().enumerate().find_map(|(k, b)| match b.verdict {
            None => Some(format!("block {} is not symmetric", k + 1)),
            Some(PsdVerdict::Indefinite { step }) => {
                Some(format!("block {} is not PSD (elimination step {step})", k + 1))
            }
            _ => None,
        })
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.first_mismatch {
            None => writeln!(f, "identity: exact match")?,
            Some(_) => writeln!(f, "identity: FAILED, {}", self.first_failure().unwrap_or_default())?,
        }
        for (k, b) in self.blocks.iter().enumerate() {
            let verdict = match b.verdict {
                Some(PsdVerdict::PositiveDefinite) => "positive definite".to_string(),
                Some(PsdVerdict::PositiveSemidefinite) => "positive semidefinite".to_string(),
                Some(PsdVerdict::Indefinite { step }) => format!("indefinite at step {step}"),
                None => "asymmetric".to_string(),
            };
            let pivots: Vec<String> = b.pivots.iter().take(b.size).map(fmt_rational).collect();
            writeln!(f, "block {} ({}x{}): {}", k + 1, b.size, b.size, verdict)?;
            writeln!(f, "  pivots: [{}]", pivots.join(", "))?;
        }
        writeln!(f, "result: {}", if self.pass { "PASS" } else { "FAIL" })
    }
}

/// Exact check of the coefficient identity and of PSD-ness of every block.
pub fn verify_certificate(cert: &GramCertificate) -> VerificationReport {
    let lhs = cert.full_target();
    let rhs = expand_gram(cert);
    let diff = &lhs - &rhs;
    let first_mismatch = diff.leading_term().map(|(m, _)| Mismatch {
        monomial: m.clone(),
        expected: lhs.coeff(m),
        actual: rhs.coeff(m),
    });
    let mut blocks = Vec::with_capacity(cert.blocks.len());
    for b in &cert.blocks {
        let shape_ok = b.q.len() == b.basis.len() && b.q.iter().all(|r| r.len() == b.basis.len());
        let report = match shape_ok.then(|| rational_psd_check(&b.q)) {
            Some(Ok(ldl)) => BlockReport {
                size: b.basis.len(),
                symmetric: true,
                verdict: Some(ldl.verdict),
                pivots: ldl.d,
            },
            _ => BlockReport {
                size: b.basis.len(),
                symmetric: false,
                verdict: None,
                pivots: Vec::new(),
            },
        };
        blocks.push(report);
    }
    let identity_holds = first_mismatch.is_none();
    let pass = identity_holds && blocks.iter().all(|b| b.verdict.is_some_and(|v| v.is_psd()));
    VerificationReport {
        identity_holds,
        first_mismatch,
        blocks,
        pass,
        names: default_names(cert.target.nvars()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSquare {
    pub weight: Rational,
    pub poly: Polynomial,
}

/// Per block, `z'Qz = sum_k d_k (L' P' z)_k^2` from the exact LDL factors.
pub fn extract_sos_decomposition(cert: &GramCertificate) -> Result<Vec<Vec<WeightedSquare>>, GramError> {
    let nvars = cert.target.nvars();
    let mut out = Vec::with_capacity(cert.blocks.len());
    for (k, b) in cert.blocks.iter().enumerate() {
        let ldl = rational_psd_check(&b.q)?;
        if !ldl.verdict.is_psd() {
            return Err(GramError::NotPsd { block: k });
        }
        let n = b.basis.len();
        let mut squares = Vec::with_capacity(ldl.rank);
        for col in 0..ldl.rank {
            let mut poly = Polynomial::zero(nvars);
            for i in col..n {
                if !ldl.l[i][col].is_zero() {
                    poly.add_term(b.basis.monomials[ldl.perm[i]].clone(), ldl.l[i][col].clone());
                }
            }
            squares.push(WeightedSquare {
                weight: ldl.d[col].clone(),
                poly,
            });
        }
        out.push(squares);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::rational::int;

    fn cert(target: Polynomial, basis: &[&[u32]], q: &[&[i64]]) -> GramCertificate {
        let nvars = target.nvars();
        GramCertificate {
            target,
            multiplier: Multiplier::none(),
            blocks: vec![GramBlock {
                basis: MonomialBasis::from_exponents(nvars, basis),
                q: q.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect(),
            }],
        }
    }

    #[test]
    fn expands_rank_one() {
        let t = Polynomial::from_int_terms(2, &[(&[2, 0], 1), (&[1, 1], 2), (&[0, 2], 1)]);
        let c = cert(t.clone(), &[&[1, 0], &[0, 1]], &[&[1, 1], &[1, 1]]);
        assert_eq!(expand_gram(&c), t);
        let rep = verify_certificate(&c);
        assert!(rep.pass);
        let sq = extract_sos_decomposition(&c).unwrap();
        assert_eq!(sq[0].len(), 1);
        let back = sq[0][0].poly.pow(2).scale(&sq[0][0].weight);
        assert_eq!(back, t);
    }

    #[test]
    fn one_by_one() {
        let t = Polynomial::from_int_terms(1, &[(&[2], 4)]);
        assert_eq!(expand_gram(&cert(t.clone(), &[&[1]], &[&[4]])), t);
    }

    #[test]
    fn mismatch_reported() {
        let t = Polynomial::from_int_terms(1, &[(&[2], 4)]);
        let rep = verify_certificate(&cert(t, &[&[1]], &[&[5]]));
        assert!(!rep.pass);
        assert_eq!(rep.first_mismatch.unwrap().monomial.exps(), &[2]);
    }

    #[test]
    fn vacuous_certificate_passes() {
        let c = GramCertificate {
            target: Polynomial::zero(2),
            multiplier: Multiplier::none(),
            blocks: Vec::new(),
        };
        assert!(verify_certificate(&c).pass);
    }

    #[test]
    fn semidefinite_skip() {
        let t = Polynomial::from_int_terms(2, &[(&[2, 0], 1)]);
        let c = cert(t, &[&[1, 0], &[0, 1]], &[&[1, 0], &[0, 0]]);
        let sq = extract_sos_decomposition(&c).unwrap();
        assert_eq!(sq[0].len(), 1);
    }

    #[test]
    fn json_round_trip() {
        let t = Polynomial::from_int_terms(2, &[(&[2, 0], 1), (&[1, 1], 2), (&[0, 2], 1)]);
        let c = cert(t, &[&[1, 0], &[0, 1]], &[&[1, 1], &[1, 1]]);
        let js = serde_json::to_string(&c).unwrap();
        assert!(js.contains("\"Q\""));
        let back: GramCertificate = serde_json::from_str(&js).unwrap();
        assert_eq!(back, c);
    }
}
