//! Monomial bases for Gram-matrix representations, the induced linear
//! systems, exact PSD checks and rational certificates.

mod certificate;
mod ldl;
mod lp;
mod rationalize;
mod system;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polycore::{Monomial, Polynomial};

pub use certificate::{
    expand_gram, extract_sos_decomposition, verify_certificate, BlockReport, GramBlock, GramCertificate, Multiplier,
    VerificationReport, WeightedSquare,
};
pub use ldl::{rational_psd_check, LdlResult, PsdVerdict, RationalMatrix};
pub use lp::hull_contains;
pub use rationalize::{rationalize_gram, RationalizeOptions};
pub use system::{gram_system, GramColumn, LinearSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GramError {
    #[error("target monomial {0:?} is not a product of basis monomials")]
    Unreachable(Vec<u32>),
    #[error("variable groups do not partition the {0} variables")]
    BadPartition(usize),
    #[error("matrix is not symmetric")]
    Asymmetric,
    #[error("block {block} is not positive semidefinite")]
    NotPsd { block: usize },
    #[error("linear system is inconsistent")]
    Inconsistent,
    #[error("rationalization failed: {0}")]
    Rationalize(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Ordered list of distinct monomials; order is preserved as given.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialBasis {
    pub nvars: usize,
    pub monomials: Vec<Monomial>,
}

impl MonomialBasis {
    pub fn new(nvars: usize, monomials: Vec<Monomial>) -> Self {
        debug_assert!(monomials.iter().all(|m| m.nvars() == nvars));
        Self { nvars, monomials }
    }

    pub fn from_exponents(nvars: usize, exps: &[&[u32]]) -> Self {
        Self::new(nvars, exps.iter().map(|e| Monomial::new(e.to_vec())).collect())
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Monomial> {
        self.monomials.iter()
    }

    pub fn position(&self, m: &Monomial) -> Option<usize> {
        self.monomials.iter().position(|x| x == m)
    }

    /// Sorts into canonical order (degree ascending, lex-largest first).
    pub fn sorted(mut self) -> Self {
        self.monomials.sort_by(|a, b| a.basis_cmp(b));
        self
    }

    pub fn has_duplicates(&self) -> bool {
        let set: HashSet<&Monomial> = self.monomials.iter().collect();
        set.len() != self.monomials.len()
    }
}

/// All monomials of degree `<= max_deg` (exactly `max_deg` when
/// `homogeneous`), in canonical order.
pub fn monomial_basis(nvars: usize, max_deg: u32, homogeneous: bool) -> MonomialBasis {
    let mut out = Vec::new();
    let lo = if homogeneous { max_deg } else { 0 };
    for d in lo..=max_deg {
        let mut cur = vec![0u32; nvars];
        compositions(nvars, d, 0, &mut cur, &mut out);
    }
    MonomialBasis::new(nvars, out).sorted()
}

fn compositions(nvars: usize, remaining: u32, k: usize, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
    if nvars == 0 {
        if remaining == 0 {
            out.push(Monomial::new(Vec::new()));
        }
        return;
    }
    if k == nvars - 1 {
        cur[k] = remaining;
        out.push(Monomial::new(cur.clone()));
        return;
    }
    for e in (0..=remaining).rev() {
        cur[k] = e;
        compositions(nvars, remaining - e, k + 1, cur, out);
    }
    cur[k] = 0;
}

/// Keeps the monomials `m` with `2m` in the Newton polytope of `target`.
pub fn newton_filter(target: &Polynomial, basis: &MonomialBasis) -> MonomialBasis {
    let support: Vec<Vec<i64>> = target
        .monomials()
        .map(|m| m.exps().iter().map(|&e| e as i64).collect())
        .collect();
    let kept = basis
        .iter()
        .filter(|m| {
            let doubled: Vec<i64> = m.exps().iter().map(|&e| 2 * e as i64).collect();
            lp::hull_contains(&doubled, &support)
        })
        .cloned()
        .collect();
    MonomialBasis::new(basis.nvars, kept)
}

/// Candidate basis for `target`: half-degree monomials (homogeneous when the
/// target is a form) filtered by the Newton polytope.
pub fn half_newton_basis(target: &Polynomial) -> MonomialBasis {
    let Some(deg) = target.degree() else {
        return MonomialBasis::new(target.nvars(), Vec::new());
    };
    let half = deg / 2;
    let full = monomial_basis(target.nvars(), half, target.is_form());
    newton_filter(target, &full)
}

/// Buckets `basis` by the parity of the combined degree in each group.
/// Blocks come out ordered by number of odd groups, then with the odd
/// groups as early as possible.
pub fn parity_split(basis: &MonomialBasis, groups: &[Vec<usize>]) -> Result<Vec<MonomialBasis>, GramError> {
    let mut seen = vec![false; basis.nvars];
    for g in groups {
        for &i in g {
            if i >= basis.nvars || seen[i] {
                return Err(GramError::BadPartition(basis.nvars));
            }
            seen[i] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(GramError::BadPartition(basis.nvars));
    }
    let mut buckets: BTreeMap<(usize, std::cmp::Reverse<Vec<u8>>), Vec<Monomial>> = BTreeMap::new();
    for m in basis.iter() {
        let sig = m.signature(groups);
        let odd = sig.iter().filter(|&&b| b == 1).count();
        buckets.entry((odd, std::cmp::Reverse(sig))).or_default().push(m.clone());
    }
    Ok(buckets
        .into_values()
        .map(|ms| MonomialBasis::new(basis.nvars, ms))
        .collect())
}

/// Whether every monomial of `target` has even degree in each group.
pub fn is_parity_invariant(target: &Polynomial, groups: &[Vec<usize>]) -> bool {
    target.monomials().all(|m| m.signature(groups).iter().all(|&b| b == 0))
}

/// Finest grouping under which `target` is parity invariant: single
/// variables, then pairs `{i, i + n/2}` (matching `x_i` with `y_i`), else
/// `None`.
pub fn invariant_groups(target: &Polynomial) -> Option<Vec<Vec<usize>>> {
    let n = target.nvars();
    let singles: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    if is_parity_invariant(target, &singles) {
        return Some(singles);
    }
    if n.is_multiple_of(2) {
        let pairs: Vec<Vec<usize>> = (0..n / 2).map(|i| vec![i, i + n / 2]).collect();
        if is_parity_invariant(target, &pairs) {
            return Some(pairs);
        }
    }
    None
}

/// Repeatedly drops basis monomials `m` whose square `m^2` is not in the
/// target and cannot arise as a product of two distinct monomials in the
/// same block: the diagonal Gram entry of such an `m` is forced to zero,
/// which forces its whole row to zero in any PSD solution.
pub fn prune_forced_zero(target: &Polynomial, blocks: &[MonomialBasis]) -> Vec<MonomialBasis> {
    let support: BTreeSet<&Monomial> = target.monomials().collect();
    let mut blocks: Vec<MonomialBasis> = blocks.to_vec();
    loop {
        let mut changed = false;
        for b in blocks.iter_mut() {
            let mut cross: BTreeMap<Monomial, usize> = BTreeMap::new();
            for i in 0..b.len() {
                for j in i + 1..b.len() {
                    *cross.entry(b.monomials[i].mul(&b.monomials[j])).or_default() += 1;
                }
            }
            let keep: Vec<Monomial> = b
                .iter()
                .filter(|m| {
                    let sq = m.pow(2);
                    support.contains(&sq) || cross.contains_key(&sq)
                })
                .cloned()
                .collect();
            if keep.len() != b.len() {
                b.monomials = keep;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    blocks.retain(|b| !b.is_empty());
    blocks
}

/// Newton-filtered, parity-split and pruned blocks for `target`.
pub fn default_blocks(target: &Polynomial) -> Vec<MonomialBasis> {
    let basis = half_newton_basis(target);
    let blocks = match invariant_groups(target) {
        Some(groups) => parity_split(&basis, &groups).expect("groups partition the variables"),
        None => vec![basis],
    };
    prune_forced_zero(target, &blocks)
}
