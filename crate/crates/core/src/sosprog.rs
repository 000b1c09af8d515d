//! Numeric SOS programs: the max-t Gram feasibility problem and the
//! Euclidean projection onto the SOS cone, both solved with `sdpsolve`.

use nalgebra::DMatrix;
use sdpsolve::{solve, Constraint, SdpProblem};
pub use sdpsolve::{SdpSettings, SdpStatus};

use crate::grambasis::{
    gram_system, rationalize_gram, GramBlock, GramCertificate, GramError, LinearSystem, MonomialBasis, Multiplier,
    RationalizeOptions,
};
use crate::polycore::rational::{round_to_denominator, to_f64};
use crate::polycore::{Monomial, Polynomial};

#[derive(Debug, Clone, PartialEq)]
pub struct SosOptions {
    /// Verdict threshold on the normalized optimum `t`.
    pub tol: f64,
    pub solver: SdpSettings,
}

impl Default for SosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            solver: SdpSettings::default(),
        }
    }
}

impl SosOptions {
    /// Verdict threshold `tol` with the default solver accuracy; the
    /// threshold is a margin on the optimum, not a solver setting.
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            solver: SdpSettings::default(),
        }
    }
}

/// Outcome of `max t  s.t.  target = sum z'Qz,  Q - tI PSD`.
#[derive(Debug, Clone)]
pub struct SosResult {
    pub blocks: Vec<MonomialBasis>,
    pub system: LinearSystem,
    pub status: SdpStatus,
    /// Optimum for the target divided by its largest absolute coefficient.
    pub t_normalized: f64,
    /// Optimum in the target's own units.
    pub t: f64,
    /// Largest absolute coefficient of the target.
    pub scale: f64,
    /// Gram blocks `Q = X + tI` in the target's units.
    pub gram: Vec<DMatrix<f64>>,
    /// Dual moment functional over `system.rows`: its moment matrices are
    /// PSD with total trace one, and its pairing with the normalized target
    /// equals `t_normalized`.
    pub moments: Vec<f64>,
    /// `Some(true)` iff the solver converged with `t_normalized >= -tol`.
    pub is_sos: Option<bool>,
    pub iterations: usize,
    pub diagnostics: Option<String>,
}

impl SosResult {
    /// Dual vector scaled to unit Euclidean norm.
    pub fn dual_unit(&self) -> Vec<f64> {
        let n = self.moments.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n == 0.0 {
            return self.moments.clone();
        }
        self.moments.iter().map(|v| v / n).collect()
    }

    /// `<moments, target>` over the system rows (normalized target units).
    pub fn pairing(&self, target: &Polynomial) -> f64 {
        self.system
            .rows
            .iter()
            .zip(&self.moments)
            .map(|(m, v)| v * to_f64(&target.coeff(m)))
            .sum::<f64>()
            / self.scale
    }
}

fn max_abs_coeff(p: &Polynomial) -> f64 {
    p.terms().map(|(_, c)| to_f64(c).abs()).fold(0.0, f64::max)
}

/// SDP for the Gram system with `Q_k = X_k + t I`: block `k` of the SDP is
/// `X_k`, free variable 0 is `t`, and the objective is `min -t`. Right-hand
/// sides are divided by `scale`.
pub fn gram_sdp(system: &LinearSystem, scale: f64) -> SdpProblem {
    let mut prob = SdpProblem::new(system.block_sizes.clone()).with_free_vars(1);
    prob.free_objective[0] = -1.0;
    for (row, rhs) in system.entries.iter().zip(&system.rhs) {
        let mut con = Constraint::new(to_f64(rhs) / scale);
        let mut tcoef = 0.0;
        for (c, a) in row {
            let col = system.columns[*c];
            let a = to_f64(a);
            // Off-diagonal columns carry coefficient 2, which the SDP entry
            // convention already counts.
            let v = if col.i == col.j { a } else { a / 2.0 };
            con = con.entry(col.block, col.i, col.j, v);
            if col.i == col.j {
                tcoef += a;
            }
        }
        if tcoef != 0.0 {
            con = con.free_var(0, tcoef);
        }
        prob.add_constraint(con);
    }
    prob
}

/// Maximizes the smallest Gram eigenvalue for `target` over `blocks`.
pub fn sos_feasibility(
    target: &Polynomial,
    blocks: &[MonomialBasis],
    opts: &SosOptions,
) -> Result<SosResult, GramError> {
    let system = gram_system(target, blocks)?;
    let scale = match max_abs_coeff(target) {
        s if s > 0.0 => s,
        _ => 1.0,
    };
    let prob = gram_sdp(&system, scale);
    let sol = solve(&prob, &opts.solver).map_err(|e| GramError::Shape(e.to_string()))?;
    let t_norm = sol.free.get(0).copied().unwrap_or(f64::NAN);
    let gram: Vec<DMatrix<f64>> = sol
        .x
        .iter()
        .map(|x| (x + DMatrix::identity(x.nrows(), x.ncols()) * t_norm) * scale)
        .collect();
    let moments: Vec<f64> = sol.y.iter().map(|v| -v).collect();
    let is_sos = match sol.status {
        SdpStatus::Optimal => Some(t_norm >= -opts.tol),
        _ => None,
    };
    Ok(SosResult {
        blocks: blocks.to_vec(),
        system,
        status: sol.status,
        t_normalized: t_norm,
        t: t_norm * scale,
        scale,
        gram,
        moments,
        is_sos,
        iterations: sol.iterations,
        diagnostics: sol.diagnostics,
    })
}

/// Rounds the numeric Gram matrices of `res` to an exact certificate for
/// `multiplier * target`, which must be the polynomial `res` was solved for.
pub fn certificate_from_result(
    res: &SosResult,
    target: &Polynomial,
    multiplier: Multiplier,
    opts: &RationalizeOptions,
) -> Result<GramCertificate, GramError> {
    let q = rationalize_gram(&res.gram, &res.system, opts)?;
    Ok(GramCertificate {
        target: target.clone(),
        multiplier,
        blocks: res
            .blocks
            .iter()
            .zip(q)
            .map(|(b, q)| GramBlock { basis: b.clone(), q })
            .collect(),
    })
}

#[derive(Debug, Clone)]
pub struct ProjectionResult {
    /// Monomials spanned by the Gram blocks together with the target support.
    pub monomials: Vec<Monomial>,
    pub target_coeffs: Vec<f64>,
    pub projection_coeffs: Vec<f64>,
    /// Projection with coefficients rounded to denominator `10^9`.
    pub projection: Polynomial,
    /// `||target - projection||_2` over the coefficients.
    pub distance: f64,
    /// `(projection - target) / distance`, or the raw difference when the
    /// distance is zero. Nonnegative on SOS forms, negative on the target.
    pub hyperplane: Vec<f64>,
    pub status: SdpStatus,
    pub gram: Vec<DMatrix<f64>>,
}

/// Closest SOS polynomial over `blocks` to `target` in the coefficient 2-norm.
///
/// The residual `r = target - sum z'Qz` enters through an arrow block
/// `[[s I, r], [r', s]] PSD`, i.e. `||r|| <= s`, and `s` is minimized.
pub fn project_onto_sos(
    target: &Polynomial,
    blocks: &[MonomialBasis],
    solver: &SdpSettings,
) -> Result<ProjectionResult, GramError> {
    let system = gram_system(target, blocks)?;
    let scale = match max_abs_coeff(target) {
        s if s > 0.0 => s,
        _ => 1.0,
    };
    let n = system.n_rows();
    let mut dims = system.block_sizes.clone();
    let arrow = dims.len();
    dims.push(n + 1);
    let mut prob = SdpProblem::new(dims);
    prob.set_objective_entry(arrow, n, n, 1.0);
    for (r, (row, rhs)) in system.entries.iter().zip(&system.rhs).enumerate() {
        let mut con = Constraint::new(to_f64(rhs) / scale);
        for (c, a) in row {
            let col = system.columns[*c];
            let a = to_f64(a);
            con = con.entry(col.block, col.i, col.j, if col.i == col.j { a } else { a / 2.0 });
        }
        // + Z[r][n] = r_r, counted twice by the entry convention.
        con = con.entry(arrow, r, n, 0.5);
        prob.add_constraint(con);
    }
    for i in 0..n {
        prob.add_constraint(Constraint::new(0.0).entry(arrow, i, i, 1.0).entry(arrow, n, n, -1.0));
        for j in i + 1..n {
            prob.add_constraint(Constraint::new(0.0).entry(arrow, i, j, 1.0));
        }
    }
    let sol = solve(&prob, solver).map_err(|e| GramError::Shape(e.to_string()))?;
    let target_coeffs: Vec<f64> = system.rows.iter().map(|m| to_f64(&target.coeff(m))).collect();
    let resid: Vec<f64> = (0..n).map(|i| sol.x[arrow][(i, n)] * scale).collect();
    let projection_coeffs: Vec<f64> = target_coeffs.iter().zip(&resid).map(|(t, r)| t - r).collect();
    let distance = resid.iter().map(|r| r * r).sum::<f64>().sqrt();
    let hyperplane: Vec<f64> = if distance > 0.0 {
        resid.iter().map(|r| -r / distance).collect()
    } else {
        resid.iter().map(|r| -r).collect()
    };
    let den = num_bigint::BigInt::from(1_000_000_000u64);
    let projection = Polynomial::from_terms(
        target.nvars(),
        system
            .rows
            .iter()
            .zip(&projection_coeffs)
            .map(|(m, v)| (m.clone(), round_to_denominator(*v, &den))),
    );
    let gram = sol.x[..arrow].iter().map(|x| x * scale).collect();
    Ok(ProjectionResult {
        monomials: system.rows.clone(),
        target_coeffs,
        projection_coeffs,
        projection,
        distance,
        hyperplane,
        status: sol.status,
        gram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grambasis::{default_blocks, verify_certificate};
    use crate::polycore::{default_names, parse_polynomial};

    fn poly(s: &str, n: usize) -> Polynomial {
        parse_polynomial(s, &default_names(n)).unwrap()
    }

    #[test]
    fn sum_of_two_squares_is_sos() {
        let p = poly("x1^2 + x2^2", 2);
        let blocks = default_blocks(&p);
        let res = sos_feasibility(&p, &blocks, &SosOptions::default()).unwrap();
        assert_eq!(res.is_sos, Some(true));
        assert!((res.t - 1.0).abs() < 1e-6, "t = {}", res.t);
        let cert = certificate_from_result(&res, &p, Multiplier::none(), &RationalizeOptions::default()).unwrap();
        assert!(verify_certificate(&cert).pass);
    }

    #[test]
    fn indefinite_quadratic_is_not_sos() {
        let p = poly("x1^2 - x2^2", 2);
        let blocks = vec![MonomialBasis::from_exponents(2, &[&[1, 0], &[0, 1]])];
        let res = sos_feasibility(&p, &blocks, &SosOptions::default()).unwrap();
        assert_eq!(res.is_sos, Some(false));
        assert!(res.pairing(&p) < 0.0);
    }

    #[test]
    fn projection_of_sos_is_itself() {
        let p = poly("x1^6 + x2^6 + x3^6", 3);
        let blocks = default_blocks(&p);
        let pr = project_onto_sos(&p, &blocks, &SdpSettings::default()).unwrap();
        assert_eq!(pr.status, SdpStatus::Optimal);
        assert!(pr.distance < 1e-6, "distance {}", pr.distance);
    }
}
