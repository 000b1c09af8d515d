//! Certificates for polynomial matrices: valid-Hessian checks, principal
//! minors, sos-matrix and sos-convexity tests, and exact verification of
//! dual-functional separations.

mod fixtures;
mod hessian;
mod minors;
mod separation;
mod sosmatrix;

use thiserror::Error;

use crate::grambasis::GramError;
use crate::polycore::PolyError;

pub use fixtures::{load_fixtures, reference_fixtures, Fixtures, APPENDIX_FIXTURE, SEPARATION_FIXTURE};
pub use hessian::{is_valid_hessian, HessianCheck, HessianViolation};
pub use minors::{cauchy_binet_det, principal_minors, subsets};
pub use separation::{
    moment_matrix, separation_from_moments, verify_separation, SeparationCertificate, SeparationReport,
};
pub use sosmatrix::{
    decide_sos, is_sos_convex, is_sos_matrix, ConvexityClass, DecideOptions, SosConvexityReport, SosDecision,
    SosVerdict,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Gram(#[from] GramError),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("fixture {path}: {msg}")]
    Fixture { path: String, msg: String },
}
