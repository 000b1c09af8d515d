//! Counterexample search: separating hyperplanes from projections or SOS
//! duals, the search SDP over candidate coefficients, and rounding of
//! candidates to exactly certified integer forms.

mod hyperplane;
mod program;
mod search;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convexcert::CertError;
use crate::grambasis::GramError;
use crate::polycore::{default_names, parse_polynomial, Polynomial};

pub use hyperplane::{full_blocks, hyperplane_from_infeasibility, hyperplane_from_projection, Hyperplane};
pub use program::{build_search_program, check_candidate, CandidateCheck, SearchProgram};
pub use search::{
    certify_candidate, postprocess_rationalize, search_counterexample, solve_search_program, Certification, Certified,
    SearchResult, SearchSolve, SearchStatus, SolveStatus,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscoverError {
    #[error("invalid search configuration: {0}")]
    Config(String),
    #[error("form is already SOS; no separating hyperplane exists")]
    AlreadySos,
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("degenerate candidate: {0}")]
    Degenerate(String),
    #[error("no rounded candidate re-certifies within the search budget")]
    Exhausted,
    #[error(transparent)]
    Gram(#[from] GramError),
    #[error(transparent)]
    Cert(#[from] CertError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// A form whose Hessian is PSD (certified with a multiplier) while a
    /// diagonal Hessian entry is pushed outside the SOS cone.
    #[default]
    ConvexNotSosConvex,
    /// A form that is nonnegative (certified with a multiplier) but not SOS.
    PsdNotSos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MuSource {
    #[default]
    Projection,
    Infeasibility,
}

/// Motzkin form with `x1` and `x3` exchanged.
const CONVEX_MU_FORM: &str = "x1^6 + x2^4*x3^2 + x2^2*x3^4 - 3*x1^2*x2^2*x3^2";
const MOTZKIN_FORM: &str = "x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2*x3^2 + x3^6";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub mode: SearchMode,
    pub nvars: usize,
    /// Degree of the searched form.
    pub degree: u32,
    /// Exponent of the `(sum x_i^2)^r` multiplier in the PSD constraint.
    pub multiplier_r: u32,
    /// Largest exponent tried when the search at `multiplier_r` fails.
    pub max_multiplier_r: u32,
    /// Explicit functional over the monomials of the separated polynomial
    /// (graded-lex, largest first); overrides `mu_form`.
    pub dual_mu: Option<Vec<f64>>,
    /// Non-SOS form whose separating hyperplane becomes `mu`.
    pub mu_form: Option<String>,
    pub mu_source: MuSource,
    /// `<mu, H_ii> <= -margin` stands in for the strict inequality.
    pub strictness_margin: f64,
    /// 1-based index `i` of the separated diagonal Hessian entry `H_ii`.
    pub target_minor: Vec<usize>,
    /// Bound on the total trace of the Gram matrices.
    pub trace_bound: f64,
    /// Try diagonal rescalings of the separated variable before rounding.
    pub scale_search: bool,
    pub scalings: Vec<f64>,
    /// Largest absolute integer coefficient after rounding.
    pub magnitudes: Vec<f64>,
    pub tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            mode: SearchMode::ConvexNotSosConvex,
            nvars: 3,
            degree: 8,
            multiplier_r: 1,
            max_multiplier_r: 2,
            dual_mu: None,
            mu_form: None,
            mu_source: MuSource::Projection,
            strictness_margin: 1.0,
            target_minor: vec![1],
            trace_bound: 1e6,
            scale_search: true,
            scalings: vec![1.0, 1.25, 1.5, 2.0, 2.5, 3.0],
            magnitudes: vec![100.0, 1e3, 1e4, 1e5],
            tol: 1e-8,
        }
    }
}

impl SearchConfig {
    /// Trivariate sextic search for a nonnegative form that is not SOS.
    pub fn psd_not_sos() -> Self {
        Self {
            mode: SearchMode::PsdNotSos,
            degree: 6,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), DiscoverError> {
        let bad = |m: String| Err(DiscoverError::Config(m));
        if self.nvars == 0 {
            return bad("nvars must be positive".into());
        }
        let min_degree = match self.mode {
            SearchMode::ConvexNotSosConvex => 4,
            SearchMode::PsdNotSos => 2,
        };
        if !self.degree.is_multiple_of(2) || self.degree < min_degree {
            return bad(format!("degree must be even and at least {min_degree}"));
        }
        if !(self.strictness_margin > 0.0) {
            return bad("strictness_margin must be positive".into());
        }
        if !(self.trace_bound > 0.0) {
            return bad("trace_bound must be positive".into());
        }
        if self.target_minor.len() != 1 || self.target_minor[0] == 0 || self.target_minor[0] > self.nvars {
            return bad(format!(
                "target_minor must be a single index in 1..={} (a diagonal Hessian entry)",
                self.nvars
            ));
        }
        if self.magnitudes.is_empty() || self.magnitudes.iter().any(|m| !(*m >= 1.0)) {
            return bad("magnitudes must be nonempty and at least 1".into());
        }
        if self.scalings.iter().any(|s| !(*s > 0.0)) {
            return bad("scalings must be positive".into());
        }
        Ok(())
    }

    /// Index of the variable of the separated Hessian entry.
    pub fn minor_var(&self) -> usize {
        self.target_minor[0] - 1
    }

    /// Degree of the polynomial `mu` acts on.
    pub fn mu_degree(&self) -> u32 {
        match self.mode {
            SearchMode::ConvexNotSosConvex => self.degree - 2,
            SearchMode::PsdNotSos => self.degree,
        }
    }

    /// The form whose separating hyperplane is used when `dual_mu` is unset.
    pub fn mu_source_form(&self) -> Result<Polynomial, DiscoverError> {
        let text = match (&self.mu_form, self.mode) {
            (Some(t), _) => t.as_str(),
            (None, _) if self.nvars != 3 || self.mu_degree() != 6 => {
                return Err(DiscoverError::Config(
                    "no default hyperplane source outside trivariate sextics; set mu_form or dual_mu".into(),
                ))
            }
            (None, SearchMode::ConvexNotSosConvex) => CONVEX_MU_FORM,
            (None, SearchMode::PsdNotSos) => MOTZKIN_FORM,
        };
        let form = parse_polynomial(text, &default_names(self.nvars))
            .map_err(|e| DiscoverError::Config(format!("mu_form: {e}")))?;
        if form.degree() != Some(self.mu_degree()) || !form.is_form() {
            return Err(DiscoverError::Config(format!("mu_form must be a form of degree {}", self.mu_degree())));
        }
        Ok(form)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_defaults() {
        let cfg: SearchConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, SearchConfig::default());
        cfg.validate().unwrap();
        let js = serde_json::to_string(&SearchConfig::psd_not_sos()).unwrap();
        let back: SearchConfig = serde_json::from_str(&js).unwrap();
        assert_eq!(back.mode, SearchMode::PsdNotSos);
        assert!(serde_json::from_str::<SearchConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn invalid_configs() {
        let odd = SearchConfig {
            degree: 7,
            ..SearchConfig::default()
        };
        assert!(odd.validate().is_err());
        let minor = SearchConfig {
            target_minor: vec![1, 2],
            ..SearchConfig::default()
        };
        assert!(minor.validate().is_err());
    }
}
