//! The worked example's constants as exact values.

use std::path::Path;

use crate::grambasis::{GramCertificate, MonomialBasis};
use crate::polycore::rational::int;
use crate::polycore::{default_names, parse_polynomial, PolyMatrix, Polynomial, Rational};

use super::separation::SeparationCertificate;
use super::CertError;

pub const APPENDIX_FIXTURE: &str = "appendix_certificate.json";
pub const SEPARATION_FIXTURE: &str = "h11_separation.json";

const P_TEXT: &str = "32*x1^8 + 118*x1^6*x2^2 + 40*x1^6*x3^2 + 25*x1^4*x2^4 - 43*x1^4*x2^2*x3^2 \
    - 35*x1^4*x3^4 + 3*x1^2*x2^4*x3^2 - 16*x1^2*x2^2*x3^4 + 24*x1^2*x3^6 + 16*x2^8 \
    + 44*x2^6*x3^2 + 70*x2^4*x3^4 + 60*x2^2*x3^6 + 30*x3^8";
const H11_TEXT: &str = "1792*x1^6 + 3540*x1^4*x2^2 + 1200*x1^4*x3^2 + 300*x1^2*x2^4 \
    - 516*x1^2*x2^2*x3^2 - 420*x1^2*x3^4 + 6*x2^4*x3^2 - 32*x2^2*x3^4 + 48*x3^6";
const H11_VECTOR: [i64; 9] = [1792, 3540, 1200, 300, -516, -420, 6, -32, 48];
const MOTZKIN_TEXT: &str = "x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2 + 1";
const MOTZKIN_FORM_TEXT: &str = "x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2*x3^2 + x3^6";
const CHOI_TEXT: [[&str; 3]; 3] = [
    ["x1^2 + 2*x2^2", "-x1*x2", "-x1*x3"],
    ["-x1*x2", "x2^2 + 2*x3^2", "-x2*x3"],
    ["-x1*x3", "-x2*x3", "x3^2 + 2*x1^2"],
];

#[derive(Debug, Clone)]
pub struct Fixtures {
    /// The trivariate octic that is convex but not sos-convex.
    pub p: Polynomial,
    /// `d^2 p / d x1^2` as printed.
    pub h11: Polynomial,
    /// Coefficients of `h11` in the order of `s`.
    pub h11_vector: Vec<Rational>,
    /// The separating functional, indexed like `s`.
    pub c: Vec<Rational>,
    pub z_sep: MonomialBasis,
    pub s: MonomialBasis,
    pub separation: SeparationCertificate,
    /// Gram certificate for `(x1^2 + x2^2 + x3^2) * y'H(x)y` in
    /// `(x1, x2, x3, y1, y2, y3)`.
    pub appendix_cert: GramCertificate,
    pub motzkin: Polynomial,
    pub motzkin_form: Polynomial,
    pub choi: PolyMatrix,
}

fn parse3(text: &str) -> Polynomial {
    parse_polynomial(text, &default_names(3)).expect("fixture polynomial parses")
}

fn parse2(text: &str) -> Polynomial {
    parse_polynomial(text, &default_names(2)).expect("fixture polynomial parses")
}

fn build(appendix_json: &str, separation_json: &str, origin: &str) -> Result<Fixtures, CertError> {
    let appendix_cert: GramCertificate = serde_json::from_str(appendix_json).map_err(|e| CertError::Fixture {
        path: format!("{origin}/{APPENDIX_FIXTURE}"),
        msg: e.to_string(),
    })?;
    let separation: SeparationCertificate =
        serde_json::from_str(separation_json).map_err(|e| CertError::Fixture {
            path: format!("{origin}/{SEPARATION_FIXTURE}"),
            msg: e.to_string(),
        })?;
    let choi = PolyMatrix::from_rows(
        3,
        CHOI_TEXT.iter().map(|row| row.iter().map(|s| parse3(s)).collect()).collect(),
    )?;
    Ok(Fixtures {
        p: parse3(P_TEXT),
        h11: parse3(H11_TEXT),
        h11_vector: H11_VECTOR.iter().map(|&v| int(v)).collect(),
        c: separation.c.clone(),
        z_sep: separation.z.clone(),
        s: separation.subspace.clone(),
        separation,
        appendix_cert,
        motzkin: parse2(MOTZKIN_TEXT),
        motzkin_form: parse3(MOTZKIN_FORM_TEXT),
        choi,
    })
}

/// Fixtures compiled into the library.
pub fn reference_fixtures() -> Fixtures {
    build(
        include_str!("../../fixtures/appendix_certificate.json"),
        include_str!("../../fixtures/h11_separation.json"),
        "builtin",
    )
    .expect("built-in fixtures are valid")
}

/// Fixtures read from `dir`, which must hold both certificate files.
pub fn load_fixtures(dir: &Path) -> Result<Fixtures, CertError> {
    let read = |name: &str| {
        let path = dir.join(name);
        std::fs::read_to_string(&path).map_err(|e| CertError::Fixture {
            path: path.display().to_string(),
            msg: e.to_string(),
        })
    };
    build(&read(APPENDIX_FIXTURE)?, &read(SEPARATION_FIXTURE)?, &dir.display().to_string())
}
