use std::fmt;

use num_traits::Zero;
use sdpsolve::{solve, SdpSettings, SdpStatus};

use crate::convexcert::{
    decide_sos, is_sos_convex, ConvexityClass, DecideOptions, SosConvexityReport, SosDecision,
};
use crate::grambasis::{monomial_basis, Multiplier};
use crate::polycore::rational::int;
use crate::polycore::{default_names, Monomial, Polynomial};
use crate::sosprog::SosOptions;

use super::hyperplane::{hyperplane_from_infeasibility, hyperplane_from_projection, Hyperplane};
use super::program::{build_search_program, check_candidate, SearchProgram};
use super::{DiscoverError, MuSource, SearchConfig, SearchMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStatus {
    Certified,
    /// The search SDP has no solution with a PSD Gram matrix.
    Infeasible,
    /// A numeric candidate exists but no rounding of it certifies exactly.
    Exhausted,
    SolverFailure,
}

#[derive(Debug, Clone)]
pub enum Certification {
    Convexity(SosConvexityReport),
    PsdNotSos { psd: SosDecision, not_sos: SosDecision },
}

impl Certification {
    pub fn is_success(&self) -> bool {
        match self {
            Certification::Convexity(rep) => rep.class() == ConvexityClass::ConvexNotSosConvex,
            Certification::PsdNotSos { psd, not_sos } => psd.is_certified_sos() && not_sos.is_certified_not_sos(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Certified {
    pub polynomial: Polynomial,
    /// Factor substituted for the separated variable before rounding.
    pub scaling: f64,
    /// Largest absolute coefficient targeted by the rounding; `None` when the
    /// candidate was already integral.
    pub magnitude: Option<f64>,
    pub certification: Certification,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub status: SearchStatus,
    /// Multiplier exponent of the last program solved.
    pub multiplier_r: u32,
    pub mu_used: Hyperplane,
    /// Numeric solution of the search SDP, as `(monomial, coefficient)`.
    pub candidate: Option<Vec<(Monomial, f64)>>,
    /// Smallest Gram eigenvalue bound of the search SDP (trace normalized).
    pub t: Option<f64>,
    pub certified: Option<Certified>,
    pub diagnostics: Vec<String>,
}

impl fmt::Display for SearchResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "status: {:?}", self.status)?;
        writeln!(f, "multiplier exponent r = {}", self.multiplier_r)?;
        if let Some(t) = self.t {
            writeln!(f, "search t: {t:.6e}")?;
        }
        if let Some(c) = &self.certified {
            let names = default_names(c.polynomial.nvars());
            writeln!(f, "polynomial: {}", c.polynomial.format_with(&names))?;
            match c.magnitude {
                Some(m) => writeln!(f, "rounding: scaling {} magnitude {m:e}", c.scaling)?,
                None => writeln!(f, "rounding: integral as solved")?,
            }
            match &c.certification {
                Certification::Convexity(rep) => {
                    writeln!(f, "class: {:?}", rep.class())?;
                    if let Some(r) = rep.convex_r() {
                        writeln!(f, "convexity certified with r = {r}")?;
                    }
                }
                Certification::PsdNotSos { psd, .. } => {
                    writeln!(f, "nonnegativity certified with r = {}", psd.multiplier.r)?;
                    writeln!(f, "not SOS: exact separation verified")?;
                }
            }
        }
        for d in &self.diagnostics {
            writeln!(f, "note: {d}")?;
        }
        Ok(())
    }
}

fn decide_options(cfg: &SearchConfig) -> DecideOptions {
    DecideOptions {
        sos: SosOptions::with_tol(cfg.tol),
        r_cap: cfg.multiplier_r.max(1),
        ..DecideOptions::default()
    }
}

/// Exact classification of a candidate form for the configured mode.
pub fn certify_candidate(p: &Polynomial, cfg: &SearchConfig) -> Result<Certification, DiscoverError> {
    let opts = decide_options(cfg);
    Ok(match cfg.mode {
        SearchMode::ConvexNotSosConvex => Certification::Convexity(is_sos_convex(p, &opts)?),
        SearchMode::PsdNotSos => {
            let not_sos = decide_sos(p, Multiplier::none(), &opts)?;
            let psd = if not_sos.is_certified_sos() {
                not_sos.clone()
            } else {
                decide_sos(p, Multiplier::power(cfg.multiplier_r.max(1)), &opts)?
            };
            Certification::PsdNotSos { psd, not_sos }
        }
    })
}

fn integral(coeffs: &[(Monomial, f64)], nvars: usize) -> Option<Polynomial> {
    let mut p = Polynomial::zero(nvars);
    for (m, c) in coeffs {
        let r = c.round();
        if (c - r).abs() > 1e-9 * c.abs().max(1.0) {
            return None;
        }
        if r != 0.0 {
            p.add_term(m.clone(), int(r as i64));
        }
    }
    Some(p)
}

/// Rounds a numeric candidate to integer coefficients, trying rescalings of
/// the separated variable and several coefficient magnitudes, and returns
/// the first rounding that certifies exactly.
pub fn postprocess_rationalize(
    candidate: &[(Monomial, f64)],
    cfg: &SearchConfig,
) -> Result<Certified, DiscoverError> {
    let nvars = cfg.nvars;
    let max = candidate.iter().map(|(_, c)| c.abs()).fold(0.0, f64::max);
    if !(max > 0.0) || !max.is_finite() {
        return Err(DiscoverError::Degenerate("candidate has no nonzero coefficients".into()));
    }
    // Numeric Gram feasibility over the full search blocks is necessary for
    // the exact certificate, and far cheaper.
    let program = build_search_program(cfg, &Hyperplane::zero(nvars, cfg.mu_degree()))?;
    let plausible = |p: &Polynomial| -> Result<bool, DiscoverError> { Ok(check_candidate(cfg, &program, p)?.gram_ok) };
    if let Some(p) = integral(candidate, nvars).filter(|p| !p.is_zero()) {
        let certification = certify_candidate(&p, cfg)?;
        if certification.is_success() {
            return Ok(Certified {
                polynomial: p,
                scaling: 1.0,
                magnitude: None,
                certification,
            });
        }
    }
    let scalings = if cfg.scale_search && !cfg.scalings.is_empty() {
        cfg.scalings.clone()
    } else {
        vec![1.0]
    };
    let i = cfg.minor_var();
    for &s in &scalings {
        let scaled: Vec<(Monomial, f64)> = candidate
            .iter()
            .map(|(m, c)| (m.clone(), c * s.powi(m.exps()[i] as i32)))
            .collect();
        let smax = scaled.iter().map(|(_, c)| c.abs()).fold(0.0, f64::max);
        for &mag in &cfg.magnitudes {
            let f = mag / smax;
            let rounded: Vec<(Monomial, f64)> = scaled.iter().map(|(m, c)| (m.clone(), (c * f).round())).collect();
            let Some(p) = integral(&rounded, nvars).filter(|p| !p.is_zero()) else {
                continue;
            };
            if !plausible(&p)? {
                continue;
            }
            let certification = certify_candidate(&p, cfg)?;
            if certification.is_success() {
                return Ok(Certified {
                    polynomial: p,
                    scaling: s,
                    magnitude: Some(mag),
                    certification,
                });
            }
        }
    }
    Err(DiscoverError::Exhausted)
}

fn resolve_mu(cfg: &SearchConfig) -> Result<Hyperplane, DiscoverError> {
    if let Some(values) = &cfg.dual_mu {
        let monomials = monomial_basis(cfg.nvars, cfg.mu_degree(), true);
        if values.len() != monomials.len() {
            return Err(DiscoverError::Config(format!(
                "dual_mu has {} entries, forms of degree {} in {} variables have {}",
                values.len(),
                cfg.mu_degree(),
                cfg.nvars,
                monomials.len()
            )));
        }
        return Ok(Hyperplane {
            monomials,
            values: values.clone(),
        });
    }
    let form = cfg.mu_source_form()?;
    match cfg.mu_source {
        MuSource::Projection => hyperplane_from_projection(&form, &SdpSettings::default()),
        MuSource::Infeasibility => hyperplane_from_infeasibility(&form, &SosOptions::default()),
    }
}

/// Runs the search SDP for the configured hyperplane and rounds its solution
/// to an exactly certified integer form. Multiplier exponents from
/// `multiplier_r` up to `max_multiplier_r` are tried in turn; `r = 0` is run
/// as given.
pub fn search_counterexample(cfg: &SearchConfig) -> Result<SearchResult, DiscoverError> {
    cfg.validate()?;
    let mu = resolve_mu(cfg)?;
    let last = if cfg.multiplier_r == 0 {
        0
    } else {
        cfg.max_multiplier_r.max(cfg.multiplier_r)
    };
    let mut notes = Vec::new();
    let mut out = None;
    for r in cfg.multiplier_r..=last {
        let cfg_r = SearchConfig {
            multiplier_r: r,
            ..cfg.clone()
        };
        let mut res = search_with(&cfg_r, &mu)?;
        for d in res.diagnostics.drain(..) {
            notes.push(format!("r = {r}: {d}"));
        }
        let done = res.status == SearchStatus::Certified;
        out = Some(res);
        if done {
            break;
        }
    }
    let mut out = out.expect("at least one multiplier exponent is tried");
    out.diagnostics = notes;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Solved,
    Infeasible,
    SolverFailure,
}

/// Numeric outcome of one search SDP.
#[derive(Debug, Clone)]
pub struct SearchSolve {
    pub status: SolveStatus,
    pub t: Option<f64>,
    pub candidate: Option<Vec<(Monomial, f64)>>,
    pub diagnostics: Vec<String>,
}

/// Solves the search SDP without any rounding.
pub fn solve_search_program(cfg: &SearchConfig, program: &SearchProgram) -> Result<SearchSolve, DiscoverError> {
    let mut out = SearchSolve {
        status: SolveStatus::SolverFailure,
        t: None,
        candidate: None,
        diagnostics: Vec::new(),
    };
    if program.margin_params.iter().all(|v| *v == 0.0) {
        out.status = SolveStatus::Infeasible;
        out.diagnostics.push(format!(
            "mu vanishes on every admissible coefficient; the margin constraint reads 0 <= -{}",
            cfg.strictness_margin
        ));
        return Ok(out);
    }
    let sol = solve(&program.problem, &SdpSettings::default()).map_err(|e| DiscoverError::Solver(e.to_string()))?;
    match sol.status {
        SdpStatus::Optimal => {}
        SdpStatus::PrimalInfeasible => {
            out.status = SolveStatus::Infeasible;
            out.diagnostics.push("search SDP is primal infeasible".into());
            return Ok(out);
        }
        s => {
            out.diagnostics.push(format!(
                "search SDP stopped with status {s:?}{}",
                sol.diagnostics.as_deref().map(|d| format!(": {d}")).unwrap_or_default()
            ));
            return Ok(out);
        }
    }
    let t = sol.free[program.t_var()];
    out.t = Some(t);
    if t < -cfg.tol {
        out.status = SolveStatus::Infeasible;
        out.diagnostics.push(format!("no PSD Gram matrix satisfies the margin (t = {t:.3e})"));
        return Ok(out);
    }
    let free: Vec<f64> = sol.free.iter().copied().collect();
    out.candidate = Some(
        program
            .coeff_monomials
            .iter()
            .cloned()
            .zip(program.coefficients(&free))
            .filter(|(_, c)| !c.is_zero())
            .collect(),
    );
    out.status = SolveStatus::Solved;
    Ok(out)
}

fn search_with(cfg: &SearchConfig, mu: &Hyperplane) -> Result<SearchResult, DiscoverError> {
    let program = build_search_program(cfg, mu)?;
    let solved = solve_search_program(cfg, &program)?;
    let mut out = SearchResult {
        status: match solved.status {
            SolveStatus::Infeasible => SearchStatus::Infeasible,
            _ => SearchStatus::SolverFailure,
        },
        multiplier_r: cfg.multiplier_r,
        mu_used: mu.clone(),
        candidate: solved.candidate,
        t: solved.t,
        certified: None,
        diagnostics: solved.diagnostics,
    };
    let Some(candidate) = out.candidate.clone() else {
        return Ok(out);
    };
    match postprocess_rationalize(&candidate, cfg) {
        Ok(c) => {
            if c.scaling != 1.0 {
                out.diagnostics.push(format!(
                    "diagonal coordinate scaling x{} -> {} x{} applied before rounding",
                    cfg.minor_var() + 1,
                    c.scaling,
                    cfg.minor_var() + 1
                ));
            }
            out.status = SearchStatus::Certified;
            out.certified = Some(c);
        }
        Err(DiscoverError::Exhausted) => {
            out.status = SearchStatus::Exhausted;
            out.diagnostics.push("no rounded candidate certified".into());
        }
        Err(e) => return Err(e),
    }
    Ok(out)
}
