use std::collections::BTreeMap;

use num_traits::{One, Zero};
use sdpsolve::{Constraint, SdpProblem};

use crate::grambasis::{gram_system, GramError, monomial_basis, parity_split, MonomialBasis, Multiplier};
use crate::polycore::rational::to_f64;
use crate::polycore::{Monomial, Polynomial, Rational};
use crate::sosprog::{sos_feasibility, SosOptions, SosResult};

use super::hyperplane::Hyperplane;
use super::{DiscoverError, SearchConfig, SearchMode};

/// The search SDP. The unknown form is `p = sum_k coeff_k(w) m_k` with
/// `coeff = param * w`, restricted to the coefficients compatible with the
/// parity blocks. Free variables are `w` followed by `t`.
///
/// Constraints: `mult * G(p) = sum z'(X + tI)z` where `G(p)` is `y'H(p)y`
/// (convexity mode) or `p` itself; `<mu, S(p)> + s = -margin` where `S(p)`
/// is the separated polynomial; and `sum tr X + N t + s' = N`, a scaled form
/// of the trace bound. The objective maximizes `t`.
#[derive(Debug, Clone)]
pub struct SearchProgram {
    pub problem: SdpProblem,
    pub coeff_monomials: Vec<Monomial>,
    /// `coeff_monomials.len() x n_params` exact parameterization.
    pub param: Vec<Vec<Rational>>,
    pub blocks: Vec<MonomialBasis>,
    pub rows: Vec<Monomial>,
    /// `<mu, S(m_k)>` for every coefficient monomial.
    pub margin_coeffs: Vec<f64>,
    /// Margin row over the parameters; all zero means the margin constraint
    /// reads `0 <= -margin`.
    pub margin_params: Vec<f64>,
    /// Multiplies the SDP solution to undo the trace normalization.
    pub unscale: f64,
}

impl SearchProgram {
    pub fn n_params(&self) -> usize {
        self.param.first().map_or(0, |r| r.len())
    }

    pub fn t_var(&self) -> usize {
        self.n_params()
    }

    /// Coefficients of `p` from the free-variable values of a solution.
    pub fn coefficients(&self, free: &[f64]) -> Vec<f64> {
        self.param
            .iter()
            .map(|row| row.iter().zip(free).map(|(n, w)| to_f64(n) * w).sum::<f64>() * self.unscale)
            .collect()
    }
}

/// The polynomial that must be SOS after multiplying, for one coefficient.
fn gram_target(cfg: &SearchConfig, m: &Monomial) -> Result<Polynomial, DiscoverError> {
    let n = cfg.nvars;
    let p = Polynomial::term(m.clone(), Rational::one());
    Ok(match cfg.mode {
        SearchMode::ConvexNotSosConvex => {
            let yhy = p.hessian().quadratic_form_in_y(n).map_err(crate::convexcert::CertError::from)?;
            Multiplier {
                r: cfg.multiplier_r,
                vars: Some(n),
                affine: false,
            }
            .apply(&yhy)
        }
        SearchMode::PsdNotSos => Multiplier::power(cfg.multiplier_r).apply(&p),
    })
}

/// The polynomial `mu` is paired with, for one coefficient.
fn separated(cfg: &SearchConfig, m: &Monomial) -> Result<Polynomial, DiscoverError> {
    let p = Polynomial::term(m.clone(), Rational::one());
    Ok(match cfg.mode {
        SearchMode::ConvexNotSosConvex => {
            let i = cfg.minor_var();
            p.differentiate(i)
                .and_then(|d| d.differentiate(i))
                .map_err(crate::convexcert::CertError::from)?
        }
        SearchMode::PsdNotSos => p,
    })
}

fn search_blocks(cfg: &SearchConfig) -> Vec<MonomialBasis> {
    let n = cfg.nvars;
    match cfg.mode {
        SearchMode::ConvexNotSosConvex => {
            let xdeg = (cfg.degree - 2) / 2 + cfg.multiplier_r;
            let mut ms = Vec::new();
            for b in monomial_basis(n, xdeg, true).iter() {
                for j in 0..n {
                    let mut e = b.exps().to_vec();
                    e.extend((0..n).map(|k| u32::from(k == j)));
                    ms.push(Monomial::new(e));
                }
            }
            let basis = MonomialBasis::new(2 * n, ms).sorted();
            let groups: Vec<Vec<usize>> = (0..n).map(|i| vec![i, i + n]).collect();
            parity_split(&basis, &groups).expect("pairs partition the variables")
        }
        SearchMode::PsdNotSos => {
            let basis = monomial_basis(n, cfg.degree / 2 + cfg.multiplier_r, true);
            let groups: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
            parity_split(&basis, &groups).expect("singletons partition the variables")
        }
    }
}

/// Basis of `{x : R x = 0}` as the columns of a `ncols x k` matrix.
fn nullspace(mut r: Vec<Vec<Rational>>, ncols: usize) -> Vec<Vec<Rational>> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(p) = (row..r.len()).find(|&i| !r[i][col].is_zero()) else {
            continue;
        };
        r.swap(row, p);
        let inv = Rational::one() / &r[row][col];
        for j in col..ncols {
            r[row][j] = &r[row][j] * &inv;
        }
        for i in 0..r.len() {
            if i != row && !r[i][col].is_zero() {
                let f = r[i][col].clone();
                for j in col..ncols {
                    if !r[row][j].is_zero() {
                        let t = &f * &r[row][j];
                        r[i][j] -= t;
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let mut out = vec![vec![Rational::zero(); free.len()]; ncols];
    for (k, &f) in free.iter().enumerate() {
        out[f][k] = Rational::one();
        for (i, &pc) in pivots.iter().enumerate() {
            out[pc][k] = -r[i][f].clone();
        }
    }
    out
}

pub fn build_search_program(cfg: &SearchConfig, mu: &Hyperplane) -> Result<SearchProgram, DiscoverError> {
    cfg.validate()?;
    if mu.monomials.nvars != cfg.nvars || mu.monomials.iter().any(|m| m.degree() != cfg.mu_degree()) {
        return Err(DiscoverError::Config(format!(
            "mu must live on forms of degree {} in {} variables",
            cfg.mu_degree(),
            cfg.nvars
        )));
    }
    let coeff_monomials: Vec<Monomial> = monomial_basis(cfg.nvars, cfg.degree, true).monomials;
    let targets = coeff_monomials
        .iter()
        .map(|m| gram_target(cfg, m))
        .collect::<Result<Vec<_>, _>>()?;
    let margin_coeffs = coeff_monomials
        .iter()
        .map(|m| separated(cfg, m).map(|s| mu.pairing(&s)))
        .collect::<Result<Vec<_>, _>>()?;

    let blocks = search_blocks(cfg);
    let nv = blocks[0].nvars;
    let sys = gram_system(&Polynomial::zero(nv), &blocks)?;
    let row_of: BTreeMap<&Monomial, usize> = sys.rows.iter().enumerate().map(|(i, m)| (m, i)).collect();

    // Coefficient combinations hitting monomials no Gram block produces must
    // vanish; parameterize the remaining coefficients exactly.
    let k = coeff_monomials.len();
    let mut orphan: BTreeMap<Monomial, Vec<Rational>> = BTreeMap::new();
    for (ki, t) in targets.iter().enumerate() {
        for (m, c) in t.terms() {
            if !row_of.contains_key(m) {
                orphan.entry(m.clone()).or_insert_with(|| vec![Rational::zero(); k])[ki] = c.clone();
            }
        }
    }
    let param = nullspace(orphan.into_values().collect(), k);
    let q = param.first().map_or(0, |r| r.len());
    if q == 0 {
        return Err(DiscoverError::Config("no coefficients are compatible with the Gram blocks".into()));
    }

    // Row coefficients of each parameter: sum_k T_k(m) N_kj.
    let mut row_params: Vec<Vec<f64>> = vec![vec![0.0; q]; sys.n_rows()];
    for (ki, t) in targets.iter().enumerate() {
        for (m, c) in t.terms() {
            if let Some(&r) = row_of.get(m) {
                for j in 0..q {
                    if !param[ki][j].is_zero() {
                        row_params[r][j] += to_f64(&(c * &param[ki][j]));
                    }
                }
            }
        }
    }

    let total: usize = sys.block_sizes.iter().sum();
    let n_total = total as f64;
    let unscale = cfg.trace_bound / n_total;
    let mut dims = sys.block_sizes.clone();
    let margin_slack = dims.len();
    dims.push(1);
    let trace_slack = dims.len();
    dims.push(1);
    let mut prob = SdpProblem::new(dims).with_free_vars(q + 1);
    prob.free_objective[q] = -1.0;
    for (r, row) in sys.entries.iter().enumerate() {
        let mut con = Constraint::new(0.0);
        let mut tcoef = 0.0;
        for (c, a) in row {
            let col = sys.columns[*c];
            let a = to_f64(a);
            con = con.entry(col.block, col.i, col.j, if col.i == col.j { a } else { a / 2.0 });
            if col.i == col.j {
                tcoef += a;
            }
        }
        if tcoef != 0.0 {
            con = con.free_var(q, tcoef);
        }
        for (j, v) in row_params[r].iter().enumerate() {
            if *v != 0.0 {
                con = con.free_var(j, -v);
            }
        }
        prob.add_constraint(con);
    }
    let margin_params: Vec<f64> = (0..q)
        .map(|j| (0..k).map(|ki| margin_coeffs[ki] * to_f64(&param[ki][j])).sum())
        .collect();
    // Scaled to right-hand side -1 so solver residuals stay relative to it.
    let mscale = unscale / cfg.strictness_margin;
    let mut margin = Constraint::new(-1.0).entry(margin_slack, 0, 0, 1.0);
    for (j, &v) in margin_params.iter().enumerate() {
        if v != 0.0 {
            margin = margin.free_var(j, v * mscale);
        }
    }
    prob.add_constraint(margin);
    let mut trace = Constraint::new(n_total).entry(trace_slack, 0, 0, 1.0).free_var(q, n_total);
    for (b, &n) in sys.block_sizes.iter().enumerate() {
        for i in 0..n {
            trace = trace.entry(b, i, i, 1.0);
        }
    }
    prob.add_constraint(trace);

    Ok(SearchProgram {
        problem: prob,
        coeff_monomials,
        param,
        blocks,
        rows: sys.rows,
        margin_coeffs,
        margin_params,
        unscale,
    })
}

/// Constraint check of a given form against the search program.
#[derive(Debug, Clone)]
pub struct CandidateCheck {
    /// `<mu, S(p)>`.
    pub margin_value: f64,
    pub margin_ok: bool,
    /// Max-t program for `mult * G(p)` over the search blocks; `None` when a
    /// monomial of `mult * G(p)` lies outside the blocks.
    pub gram: Option<SosResult>,
    pub gram_ok: bool,
}

impl CandidateCheck {
    pub fn feasible(&self) -> bool {
        self.margin_ok && self.gram_ok
    }
}

pub fn check_candidate(
    cfg: &SearchConfig,
    program: &SearchProgram,
    p: &Polynomial,
) -> Result<CandidateCheck, DiscoverError> {
    if p.nvars() != cfg.nvars || !p.monomials().all(|m| m.degree() == cfg.degree) {
        return Err(DiscoverError::Config(format!(
            "candidate must be a form of degree {} in {} variables",
            cfg.degree, cfg.nvars
        )));
    }
    let mut margin_value = 0.0;
    let mut g = Polynomial::zero(program.blocks[0].nvars);
    for (ki, m) in program.coeff_monomials.iter().enumerate() {
        let c = p.coeff(m);
        if c.is_zero() {
            continue;
        }
        margin_value += program.margin_coeffs[ki] * to_f64(&c);
        g = &g + &gram_target(cfg, m)?.scale(&c);
    }
    let gram = match sos_feasibility(&g, &program.blocks, &SosOptions::with_tol(cfg.tol)) {
        Ok(res) => Some(res),
        Err(GramError::Unreachable(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let gram_ok = gram.as_ref().is_some_and(|r| r.is_sos == Some(true));
    Ok(CandidateCheck {
        margin_value,
        margin_ok: margin_value <= -cfg.strictness_margin,
        gram,
        gram_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::rational::int;

    #[test]
    fn nullspace_of_selector() {
        // x0 = 0 and x1 + x2 = 0 leave a 2-dimensional space in R^4.
        let r = vec![
            vec![int(1), int(0), int(0), int(0)],
            vec![int(0), int(1), int(1), int(0)],
        ];
        let n = nullspace(r.clone(), 4);
        assert_eq!(n[0].len(), 2);
        for j in 0..2 {
            for row in &r {
                let dot: Rational = (0..4).map(|i| &row[i] * &n[i][j]).sum();
                assert!(dot.is_zero());
            }
        }
    }

    #[test]
    fn default_block_pattern() {
        let cfg = SearchConfig::default();
        let mut sizes: Vec<usize> = search_blocks(&cfg).iter().map(|b| b.len()).collect();
        sizes.sort();
        assert_eq!(sizes, vec![9, 12, 12, 12]);
    }
}
