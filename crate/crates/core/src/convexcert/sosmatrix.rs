use crate::grambasis::{
    default_blocks, verify_certificate, GramCertificate, GramError, Multiplier, RationalizeOptions,
};
use crate::polycore::{PolyMatrix, Polynomial};
use crate::sosprog::{certificate_from_result, sos_feasibility, SosOptions, SosResult};

use super::separation::{separation_from_moments, verify_separation, SeparationCertificate};
use super::CertError;

#[derive(Debug, Clone, PartialEq)]
pub struct DecideOptions {
    pub sos: SosOptions,
    pub rationalize: RationalizeOptions,
    /// Optima within this distance below zero are treated as boundary cases
    /// and settled by exact evidence only.
    pub boundary: f64,
    /// Largest multiplier exponent tried when certifying convexity.
    pub r_cap: u32,
}

impl Default for DecideOptions {
    fn default() -> Self {
        Self {
            sos: SosOptions::default(),
            rationalize: RationalizeOptions::default(),
            boundary: 1e-6,
            r_cap: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SosVerdict {
    Sos,
    NotSos,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct SosDecision {
    pub verdict: SosVerdict,
    /// Whether the verdict is backed by an exactly verified witness (or by an
    /// exact structural argument such as an unreachable monomial).
    pub exact: bool,
    pub target: Polynomial,
    pub multiplier: Multiplier,
    pub numeric: Option<SosResult>,
    pub certificate: Option<GramCertificate>,
    pub separation: Option<SeparationCertificate>,
    pub note: Option<String>,
}

impl SosDecision {
    pub fn is_certified_sos(&self) -> bool {
        self.verdict == SosVerdict::Sos && self.exact
    }

    pub fn is_certified_not_sos(&self) -> bool {
        self.verdict == SosVerdict::NotSos && self.exact
    }

    /// Normalized optimum of the max-t program, when it was solved.
    pub fn t(&self) -> Option<f64> {
        self.numeric.as_ref().map(|r| r.t_normalized)
    }
}

fn try_certificate(
    res: &SosResult,
    target: &Polynomial,
    multiplier: Multiplier,
    opts: &DecideOptions,
) -> Result<GramCertificate, String> {
    let cert =
        certificate_from_result(res, target, multiplier, &opts.rationalize).map_err(|e| e.to_string())?;
    let rep = verify_certificate(&cert);
    if rep.pass {
        Ok(cert)
    } else {
        Err(rep.first_failure().unwrap_or_else(|| "verification failed".into()))
    }
}

/// Decides whether `multiplier * target` is SOS over its default blocks and
/// tries to back the answer with an exact certificate or separation.
pub fn decide_sos(target: &Polynomial, multiplier: Multiplier, opts: &DecideOptions) -> Result<SosDecision, CertError> {
    let full = multiplier.apply(target);
    let blocks = default_blocks(&full);
    let mut out = SosDecision {
        verdict: SosVerdict::Inconclusive,
        exact: false,
        target: target.clone(),
        multiplier,
        numeric: None,
        certificate: None,
        separation: None,
        note: None,
    };
    let res = match sos_feasibility(&full, &blocks, &opts.sos) {
        Ok(res) => res,
        Err(GramError::Unreachable(m)) => {
            // The blocks hold every monomial any SOS decomposition could use.
            out.verdict = SosVerdict::NotSos;
            out.exact = true;
            out.note = Some(format!("monomial {m:?} is not a product of admissible basis monomials"));
            return Ok(out);
        }
        Err(e) => return Err(e.into()),
    };
    if res.is_sos.is_none() {
        out.note = Some(format!(
            "solver stopped with status {:?}{}",
            res.status,
            res.diagnostics.as_deref().map(|d| format!(": {d}")).unwrap_or_default()
        ));
        out.numeric = Some(res);
        return Ok(out);
    }
    let t = res.t_normalized;
    let mut notes = Vec::new();
    if t >= -opts.boundary {
        match try_certificate(&res, target, multiplier, opts) {
            Ok(cert) => {
                out.verdict = SosVerdict::Sos;
                out.exact = true;
                out.certificate = Some(cert);
                out.numeric = Some(res);
                return Ok(out);
            }
            Err(e) => notes.push(format!("rationalization failed: {e}")),
        }
    }
    if t >= -opts.sos.tol {
        out.verdict = SosVerdict::Sos;
    } else if let Some(sep) = separation_from_moments(&full, &res) {
        out.verdict = SosVerdict::NotSos;
        out.exact = verify_separation(&sep).proves_not_sos();
        out.separation = Some(sep);
    } else {
        notes.push("no exact separation found".into());
        if t < -opts.boundary {
            out.verdict = SosVerdict::NotSos;
        }
    }
    if !notes.is_empty() {
        out.note = Some(notes.join("; "));
    }
    out.numeric = Some(res);
    Ok(out)
}

/// Sos-matrix test for `P` via `y'P(x)y`, optionally multiplied by
/// `(sum x_i^2)^r` (or `(1 + sum x_i^2)^r` when `affine`) over the `x`
/// variables only.
pub fn is_sos_matrix(p: &PolyMatrix, r: u32, affine: bool, opts: &DecideOptions) -> Result<SosDecision, CertError> {
    if !p.is_square() || !p.is_symmetric() {
        return Err(CertError::Shape("sos-matrix test needs a square symmetric matrix".into()));
    }
    let n = p.nvars();
    let yhy = p.quadratic_form_in_y(n)?;
    let multiplier = Multiplier {
        r,
        vars: Some(n),
        affine,
    };
    decide_sos(&yhy, multiplier, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvexityClass {
    SosConvex,
    ConvexNotSosConvex,
    /// Not sos-convex, and no convexity certificate up to the `r` cap.
    NotSosConvexUnknownConvexity,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct SosConvexityReport {
    pub hessian: PolyMatrix,
    /// The `r = 0` sos-matrix test on the Hessian.
    pub sos_convex: SosDecision,
    /// The multiplier attempts for convexity, in order of increasing `r`.
    pub convexity: Vec<SosDecision>,
}

impl SosConvexityReport {
    /// Smallest `r` with an exact certificate that the Hessian is PSD.
    pub fn convex_r(&self) -> Option<u32> {
        if self.sos_convex.is_certified_sos() {
            return Some(0);
        }
        self.convexity
            .iter()
            .find(|d| d.is_certified_sos())
            .map(|d| d.multiplier.r)
    }

    pub fn convexity_certificate(&self) -> Option<&GramCertificate> {
        if self.sos_convex.is_certified_sos() {
            return self.sos_convex.certificate.as_ref();
        }
        self.convexity.iter().find(|d| d.is_certified_sos()).and_then(|d| d.certificate.as_ref())
    }

    pub fn class(&self) -> ConvexityClass {
        if !self.sos_convex.exact {
            return ConvexityClass::Inconclusive;
        }
        match self.sos_convex.verdict {
            SosVerdict::Sos => ConvexityClass::SosConvex,
            SosVerdict::NotSos if self.convex_r().is_some() => ConvexityClass::ConvexNotSosConvex,
            SosVerdict::NotSos => ConvexityClass::NotSosConvexUnknownConvexity,
            SosVerdict::Inconclusive => ConvexityClass::Inconclusive,
        }
    }
}

/// Sos-convexity of `p` (`r = 0` test on its Hessian) and multiplier
/// certified convexity for `r = 1..=r_cap`. Non-forms use the affine
/// multiplier `(1 + sum x_i^2)^r`.
pub fn is_sos_convex(p: &Polynomial, opts: &DecideOptions) -> Result<SosConvexityReport, CertError> {
    let hessian = p.hessian();
    let sos_convex = is_sos_matrix(&hessian, 0, false, opts)?;
    let mut convexity = Vec::new();
    if !sos_convex.is_certified_sos() {
        let affine = !p.is_form();
        for r in 1..=opts.r_cap {
            let d = is_sos_matrix(&hessian, r, affine, opts)?;
            let done = d.is_certified_sos();
            convexity.push(d);
            if done {
                break;
            }
        }
    }
    Ok(SosConvexityReport {
        hessian,
        sos_convex,
        convexity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::{default_names, parse_polynomial};

    fn poly(s: &str, n: usize) -> Polynomial {
        parse_polynomial(s, &default_names(n)).unwrap()
    }

    #[test]
    fn quartic_is_sos_convex() {
        let rep = is_sos_convex(&poly("x1^4 + x2^4", 2), &DecideOptions::default()).unwrap();
        assert_eq!(rep.class(), ConvexityClass::SosConvex);
        assert_eq!(rep.convex_r(), Some(0));
    }

    #[test]
    fn cross_term_alone_is_exactly_not_sos() {
        let d = decide_sos(&poly("2*x1*x2", 2), Multiplier::none(), &DecideOptions::default()).unwrap();
        assert_eq!(d.verdict, SosVerdict::NotSos);
        assert!(d.exact);
    }

    #[test]
    fn indefinite_quadratic_gets_separation() {
        let d = decide_sos(&poly("x1^2 - x2^2", 2), Multiplier::none(), &DecideOptions::default()).unwrap();
        assert_eq!(d.verdict, SosVerdict::NotSos);
        assert!(d.exact, "{:?}", d.note);
        assert!(verify_separation(d.separation.as_ref().unwrap()).pass);
    }
}
