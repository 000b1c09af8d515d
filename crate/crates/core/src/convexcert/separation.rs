use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::grambasis::{default_blocks, rational_psd_check, MonomialBasis, PsdVerdict, RationalMatrix};
use crate::polycore::rational::{fmt_rational, parse_rational, round_to_denominator, to_f64};
use crate::polycore::{default_names, Monomial, PolyDoc, Polynomial, Rational};
use crate::sosprog::SosResult;

/// A linear functional `c`, supported on `subspace` and zero elsewhere,
/// claimed to be negative on `target` and nonnegative on every square of a
/// polynomial supported on `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationCertificate {
    pub target: Polynomial,
    pub subspace: MonomialBasis,
    pub c: Vec<Rational>,
    pub z: MonomialBasis,
}

impl SeparationCertificate {
    fn lookup(&self) -> BTreeMap<&Monomial, &Rational> {
        self.subspace.iter().zip(&self.c).collect()
    }

    /// `<c, target>`, counting only target monomials in the subspace.
    pub fn pairing(&self) -> Rational {
        let c = self.lookup();
        let mut acc = Rational::zero();
        for (m, coef) in self.target.terms() {
            if let Some(v) = c.get(m) {
                acc += coef * *v;
            }
        }
        acc
    }

    pub fn moment_matrix(&self) -> RationalMatrix {
        moment_matrix(&self.c, &self.subspace, &self.z)
    }
}

/// `(zz')|_c`: entry `(i, j)` is `c(z_i z_j)` when that monomial lies in
/// the subspace and zero otherwise.
pub fn moment_matrix(c: &[Rational], subspace: &MonomialBasis, z: &MonomialBasis) -> RationalMatrix {
    let lookup: BTreeMap<&Monomial, &Rational> = subspace.iter().zip(c).collect();
    let n = z.len();
    let mut out = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            if let Some(v) = lookup.get(&z.monomials[i].mul(&z.monomials[j])) {
                out[i][j] = (*v).clone();
                out[j][i] = (*v).clone();
            }
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct SeparationDoc {
    target: PolyDoc,
    subspace: Vec<Vec<u32>>,
    c: Vec<String>,
    z: Vec<Vec<u32>>,
}

impl Serialize for SeparationCertificate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SeparationDoc {
            target: PolyDoc::from(&self.target),
            subspace: self.subspace.iter().map(|m| m.exps().to_vec()).collect(),
            c: self.c.iter().map(fmt_rational).collect(),
            z: self.z.iter().map(|m| m.exps().to_vec()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SeparationCertificate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let doc = SeparationDoc::deserialize(d)?;
        let target = Polynomial::try_from(&doc.target).map_err(D::Error::custom)?;
        let n = target.nvars();
        let basis = |rows: Vec<Vec<u32>>, what: &str| -> Result<MonomialBasis, D::Error> {
            if rows.iter().any(|e| e.len() != n) {
                return Err(D::Error::custom(format!("{what}: exponent length differs from {n}")));
            }
            Ok(MonomialBasis::new(n, rows.into_iter().map(Monomial::new).collect()))
        };
        let subspace = basis(doc.subspace, "subspace")?;
        let z = basis(doc.z, "z")?;
        if doc.c.len() != subspace.len() {
            return Err(D::Error::custom(format!(
                "c has {} entries but the subspace has {} monomials",
                doc.c.len(),
                subspace.len()
            )));
        }
        let c = doc
            .c
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        Ok(SeparationCertificate { target, subspace, c, z })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationReport {
    pub pairing: Rational,
    pub pairing_negative: bool,
    pub moment_verdict: PsdVerdict,
    pub pivots: Vec<Rational>,
    /// Target monomials outside the subspace (ignored by the pairing).
    pub outside_subspace: Vec<Monomial>,
    /// Whether `z` contains the Newton-filtered, pruned basis of the target,
    /// so that a PASS rules out every SOS decomposition of the target.
    pub covers_target_basis: bool,
    pub well_formed: bool,
    pub pass: bool,
    pub names: Vec<String>,
}

impl SeparationReport {
    /// PASS together with basis coverage: the target is not SOS at all.
    pub fn proves_not_sos(&self) -> bool {
        self.pass && self.covers_target_basis
    }
}

impl fmt::Display for SeparationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "pairing <c, target> = {} (= {:.6}): {}",
            fmt_rational(&self.pairing),
            to_f64(&self.pairing),
            if self.pairing_negative { "negative" } else { "NOT negative" }
        )?;
        let verdict = match self.moment_verdict {
            PsdVerdict::PositiveDefinite => "positive definite".to_string(),
            PsdVerdict::PositiveSemidefinite => "positive semidefinite".to_string(),
            PsdVerdict::Indefinite { step } => format!("indefinite at step {step}"),
        };
        writeln!(f, "moment matrix ({}x{}): {}", self.pivots.len(), self.pivots.len(), verdict)?;
        let pivots: Vec<String> = self.pivots.iter().map(fmt_rational).collect();
        writeln!(f, "  pivots: [{}]", pivots.join(", "))?;
        if !self.outside_subspace.is_empty() {
            let ms: Vec<String> = self.outside_subspace.iter().map(|m| m.format_with(&self.names)).collect();
            writeln!(f, "target monomials outside the subspace: {}", ms.join(", "))?;
        }
        if !self.well_formed {
            writeln!(f, "certificate is malformed (duplicate monomials or length mismatch)")?;
        }
        writeln!(
            f,
            "z covers the target's Newton basis: {}",
            if self.covers_target_basis { "yes" } else { "no" }
        )?;
        writeln!(f, "result: {}", if self.pass { "PASS" } else { "FAIL" })
    }
}

/// Exact check that `<c, target> < 0` and that the moment matrix is PSD.
pub fn verify_separation(cert: &SeparationCertificate) -> SeparationReport {
    let well_formed = cert.c.len() == cert.subspace.len()
        && !cert.subspace.has_duplicates()
        && !cert.z.has_duplicates()
        && cert.subspace.iter().chain(cert.z.iter()).all(|m| m.nvars() == cert.target.nvars());
    let pairing = cert.pairing();
    let pairing_negative = pairing.is_negative();
    let (moment_verdict, pivots) = match rational_psd_check(&cert.moment_matrix()) {
        Ok(ldl) => (ldl.verdict, ldl.d),
        // The moment matrix is symmetric by construction.
        Err(_) => (PsdVerdict::Indefinite { step: 0 }, Vec::new()),
    };
    let lookup = cert.lookup();
    let outside_subspace = cert.target.monomials().filter(|m| !lookup.contains_key(m)).cloned().collect();
    let covers_target_basis = default_blocks(&cert.target)
        .iter()
        .flat_map(|b| b.iter())
        .all(|m| cert.z.position(m).is_some());
    let pass = well_formed && pairing_negative && moment_verdict.is_psd();
    SeparationReport {
        pairing,
        pairing_negative,
        moment_verdict,
        pivots,
        outside_subspace,
        covers_target_basis,
        well_formed,
        pass,
        names: default_names(cert.target.nvars()),
    }
}

fn double_factorial_odd(k: u32) -> f64 {
    // (k-1)!! for even k: moments of a standard normal.
    let mut acc = 1.0;
    let mut i = k as i64 - 1;
    while i > 1 {
        acc *= i as f64;
        i -= 2;
    }
    acc
}

fn gaussian_moment(m: &Monomial) -> f64 {
    if m.exps().iter().any(|e| e % 2 == 1) {
        return 0.0;
    }
    m.exps().iter().map(|&e| double_factorial_odd(e)).product()
}

/// Turns the numeric dual of a failed SOS program into an exact separation
/// for `target` (the polynomial `res` was solved for).
///
/// The dual moments are PSD only up to solver accuracy, so they are mixed
/// with a small multiple of Gaussian moments (whose moment matrix is
/// positive definite) before rounding, keeping the pairing negative. Each
/// candidate is verified exactly; `None` if none passes.
pub fn separation_from_moments(target: &Polynomial, res: &SosResult) -> Option<SeparationCertificate> {
    let rows = &res.system.rows;
    let z = MonomialBasis::new(target.nvars(), res.blocks.iter().flat_map(|b| b.iter().cloned()).collect());
    let subspace = MonomialBasis::new(target.nvars(), rows.clone());
    let mut g: Vec<f64> = rows.iter().map(gaussian_moment).collect();
    let g_trace: f64 = z.iter().map(|m| gaussian_moment(&m.pow(2))).sum();
    if g_trace > 0.0 {
        g.iter_mut().for_each(|v| *v /= g_trace);
    }
    let pair = |w: &[f64]| -> f64 {
        rows.iter().zip(w).map(|(m, v)| v * to_f64(&target.coeff(m))).sum::<f64>() / res.scale
    };
    let t = pair(&res.moments);
    if !(t < 0.0) {
        return None;
    }
    let gp = pair(&g);
    let eps0 = if gp > 0.0 { (0.5 * -t / gp).min(1.0) } else { 1.0 };
    for digits in [4u32, 6, 8, 10] {
        let den = BigInt::from(10u64.pow(digits));
        for k in 0..8 {
            let eps = eps0 * 0.25f64.powi(k);
            let c: Vec<Rational> = res
                .moments
                .iter()
                .zip(&g)
                .map(|(v, gv)| round_to_denominator(v + eps * gv, &den))
                .collect();
            let cert = SeparationCertificate {
                target: target.clone(),
                subspace: subspace.clone(),
                c,
                z: z.clone(),
            };
            if verify_separation(&cert).pass {
                return Some(cert);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::rational::int;
    use crate::polycore::{default_names, parse_polynomial};

    fn basis(ms: &[&[u32]], n: usize) -> MonomialBasis {
        MonomialBasis::from_exponents(n, ms)
    }

    #[test]
    fn zero_functional_gives_zero_matrix() {
        let s = basis(&[&[2, 0], &[1, 1], &[0, 2]], 2);
        let z = basis(&[&[1, 0], &[0, 1]], 2);
        let m = moment_matrix(&[int(0), int(0), int(0)], &s, &z);
        assert!(m.iter().flatten().all(|v| v.is_zero()));
    }

    #[test]
    fn point_evaluation_is_rank_one() {
        // c = evaluation at (1, 2): c(m) = m(1, 2).
        let s = basis(&[&[2, 0], &[1, 1], &[0, 2]], 2);
        let z = basis(&[&[1, 0], &[0, 1]], 2);
        let m = moment_matrix(&[int(1), int(2), int(4)], &s, &z);
        let ldl = rational_psd_check(&m).unwrap();
        assert_eq!(ldl.rank, 1);
        assert!(ldl.verdict.is_psd());
    }

    #[test]
    fn indefinite_quadratic_is_separated() {
        let names = default_names(2);
        let t = parse_polynomial("x1^2 - x2^2", &names).unwrap();
        let cert = SeparationCertificate {
            target: t,
            subspace: basis(&[&[2, 0], &[0, 2]], 2),
            c: vec![int(0), int(1)],
            z: basis(&[&[1, 0], &[0, 1]], 2),
        };
        let rep = verify_separation(&cert);
        assert!(rep.pass);
        assert!(rep.proves_not_sos());
        assert_eq!(rep.pairing, int(-1));
        let js = serde_json::to_string(&cert).unwrap();
        let back: SeparationCertificate = serde_json::from_str(&js).unwrap();
        assert_eq!(back, cert);
    }
}
