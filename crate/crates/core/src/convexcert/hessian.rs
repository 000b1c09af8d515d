use crate::polycore::{PolyMatrix, Polynomial};

use super::CertError;

/// `d P[i][j] / d x_k != d P[i][k] / d x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianViolation {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub d_ij_k: Polynomial,
    pub d_ik_j: Polynomial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HessianCheck {
    pub violations: Vec<HessianViolation>,
}

impl HessianCheck {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// Looks up the violation for the (0-based) triple, if present.
    pub fn find(&self, i: usize, j: usize, k: usize) -> Option<&HessianViolation> {
        self.violations.iter().find(|v| (v.i, v.j, v.k) == (i, j, k))
    }
}

/// A symmetric `n x n` matrix in `n` variables is the Hessian of some
/// polynomial iff all third partials commute, i.e. `d_k P_ij = d_j P_ik`.
/// Every failing triple `(i, j, k)` with `j < k` is reported.
pub fn is_valid_hessian(p: &PolyMatrix) -> Result<HessianCheck, CertError> {
    let n = p.rows();
    if !p.is_square() || !p.is_symmetric() {
        return Err(CertError::Shape("Hessian candidate must be square and symmetric".into()));
    }
    if n != p.nvars() {
        return Err(CertError::Shape(format!(
            "{n}x{n} matrix in {} variables cannot be a Hessian",
            p.nvars()
        )));
    }
    let mut violations = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in j + 1..n {
                let a = p.get(i, j).differentiate(k)?;
                let b = p.get(i, k).differentiate(j)?;
                if a != b {
                    violations.push(HessianViolation {
                        i,
                        j,
                        k,
                        d_ij_k: a,
                        d_ik_j: b,
                    });
                }
            }
        }
    }
    Ok(HessianCheck { violations })
}
