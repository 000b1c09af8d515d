use num_traits::{One, Signed, Zero};

use super::GramError;
use crate::polycore::Rational;

pub type RationalMatrix = Vec<Vec<Rational>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsdVerdict {
    PositiveDefinite,
    PositiveSemidefinite,
    /// Elimination stopped at this step with a negative pivot or a zero
    /// pivot whose remaining row is nonzero.
    Indefinite { step: usize },
}

impl PsdVerdict {
    pub fn is_psd(&self) -> bool {
        !matches!(self, PsdVerdict::Indefinite { .. })
    }
}

/// Exact `P' Q P = L D L'` with the largest remaining diagonal as pivot.
/// `perm[k]` is the original index eliminated at step `k`. For indefinite
/// input the factors cover only the steps completed before stopping.
#[derive(Debug, Clone, PartialEq)]
pub struct LdlResult {
    pub perm: Vec<usize>,
    pub l: RationalMatrix,
    pub d: Vec<Rational>,
    pub rank: usize,
    pub verdict: PsdVerdict,
}

pub fn rational_psd_check(q: &RationalMatrix) -> Result<LdlResult, GramError> {
    let n = q.len();
    if q.iter().any(|row| row.len() != n) {
        return Err(GramError::Shape("matrix is not square".into()));
    }
    for i in 0..n {
        for j in 0..i {
            if q[i][j] != q[j][i] {
                return Err(GramError::Asymmetric);
            }
        }
    }
    let mut a = q.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut l = vec![vec![Rational::zero(); n]; n];
    let mut d = vec![Rational::zero(); n];
    let mut rank = 0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&x, &y| a[x][x].cmp(&a[y][y]).then(y.cmp(&x)))
            .expect("nonempty range");
        if a[p][p].is_negative() {
            return Ok(LdlResult {
                perm,
                l,
                d,
                rank,
                verdict: PsdVerdict::Indefinite { step: k },
            });
        }
        if a[p][p].is_zero() {
            // All remaining diagonals are <= 0 here; PSD forces the rest to vanish.
            let rest_zero = (k..n).all(|i| (k..n).all(|j| a[i][j].is_zero()));
            for i in k..n {
                l[i][i] = Rational::one();
            }
            let verdict = if rest_zero {
                PsdVerdict::PositiveSemidefinite
            } else {
                PsdVerdict::Indefinite { step: k }
            };
            return Ok(LdlResult {
                perm,
                l,
                d,
                rank,
                verdict,
            });
        }
        if p != k {
            a.swap(p, k);
            for row in a.iter_mut() {
                row.swap(p, k);
            }
            perm.swap(p, k);
            l.swap(p, k);
        }
        let piv = a[k][k].clone();
        d[k] = piv.clone();
        l[k][k] = Rational::one();
        rank += 1;
        for i in k + 1..n {
            l[i][k] = &a[i][k] / &piv;
        }
        for i in k + 1..n {
            if l[i][k].is_zero() {
                continue;
            }
            for j in k + 1..=i {
                let delta = &l[i][k] * &a[k][j];
                a[i][j] -= delta;
                if i != j {
                    a[j][i] = a[i][j].clone();
                }
            }
        }
        for i in k + 1..n {
            a[i][k] = Rational::zero();
            a[k][i] = Rational::zero();
        }
    }
    Ok(LdlResult {
        perm,
        l,
        d,
        rank,
        verdict: PsdVerdict::PositiveDefinite,
    })
}
