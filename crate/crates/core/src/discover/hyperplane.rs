use std::collections::BTreeMap;

use sdpsolve::{SdpSettings, SdpStatus};

use crate::grambasis::{invariant_groups, monomial_basis, parity_split, MonomialBasis};
use crate::polycore::rational::to_f64;
use crate::polycore::{Monomial, Polynomial};
use crate::sosprog::{project_onto_sos, sos_feasibility, SosOptions};

use super::DiscoverError;

/// A linear functional on forms of one degree, as values on the monomial
/// basis of that degree (graded-lex, largest first).
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    pub monomials: MonomialBasis,
    pub values: Vec<f64>,
}

impl Hyperplane {
    /// Functional from values on a subset of monomials (zero elsewhere).
    pub fn from_sparse(nvars: usize, degree: u32, entries: &[(Monomial, f64)]) -> Self {
        let monomials = monomial_basis(nvars, degree, true);
        let map: BTreeMap<&Monomial, f64> = entries.iter().map(|(m, v)| (m, *v)).collect();
        let values = monomials.iter().map(|m| map.get(m).copied().unwrap_or(0.0)).collect();
        Self { monomials, values }
    }

    pub fn zero(nvars: usize, degree: u32) -> Self {
        Self::from_sparse(nvars, degree, &[])
    }

    pub fn value(&self, m: &Monomial) -> f64 {
        self.monomials.position(m).map_or(0.0, |i| self.values[i])
    }

    pub fn pairing(&self, p: &Polynomial) -> f64 {
        p.terms().map(|(m, c)| self.value(m) * to_f64(c)).sum()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        Self {
            monomials: self.monomials.clone(),
            values: self.values.iter().map(|v| v / n).collect(),
        }
    }
}

/// Full half-degree basis, parity split when the form allows it. Unlike the
/// Newton-filtered basis, squares over it span the whole SOS cone, so duals
/// computed over it separate from every SOS form.
pub fn full_blocks(form: &Polynomial) -> Result<Vec<MonomialBasis>, DiscoverError> {
    let Some(d) = form.degree().filter(|d| d % 2 == 0 && form.is_form()) else {
        return Err(DiscoverError::Config("hyperplane source must be a nonzero form of even degree".into()));
    };
    let basis = monomial_basis(form.nvars(), d / 2, true);
    Ok(match invariant_groups(form) {
        Some(groups) => parity_split(&basis, &groups).map_err(|e| DiscoverError::Config(e.to_string()))?,
        None => vec![basis],
    })
}

/// Supporting functional of the SOS cone at the Euclidean projection of
/// `form`: `(projection - form) / ||projection - form||`. It is nonnegative
/// on SOS forms and negative on `form`.
pub fn hyperplane_from_projection(form: &Polynomial, solver: &SdpSettings) -> Result<Hyperplane, DiscoverError> {
    let blocks = full_blocks(form)?;
    let pr = project_onto_sos(form, &blocks, solver)?;
    if pr.status != SdpStatus::Optimal {
        return Err(DiscoverError::Solver(format!("projection stopped with status {:?}", pr.status)));
    }
    if pr.distance <= 1e-6 * form.coeff_norm() {
        return Err(DiscoverError::AlreadySos);
    }
    let entries: Vec<(Monomial, f64)> = pr.monomials.iter().cloned().zip(pr.hyperplane.iter().copied()).collect();
    Ok(Hyperplane::from_sparse(form.nvars(), form.degree().unwrap_or(0), &entries))
}

/// Unit-norm dual moment functional of the max-t program for `form`.
pub fn hyperplane_from_infeasibility(form: &Polynomial, opts: &SosOptions) -> Result<Hyperplane, DiscoverError> {
    let blocks = full_blocks(form)?;
    let res = sos_feasibility(form, &blocks, opts)?;
    match res.is_sos {
        Some(true) => Err(DiscoverError::AlreadySos),
        None => Err(DiscoverError::Solver(format!("SOS program stopped with status {:?}", res.status))),
        Some(false) => {
            let entries: Vec<(Monomial, f64)> =
                res.system.rows.iter().cloned().zip(res.dual_unit()).collect();
            Ok(Hyperplane::from_sparse(form.nvars(), form.degree().unwrap_or(0), &entries))
        }
    }
}
