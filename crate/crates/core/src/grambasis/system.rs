use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::{GramError, MonomialBasis};
use crate::polycore::rational::int;
use crate::polycore::{Monomial, Polynomial, Rational};

/// Upper-triangle Gram entry `Q_block[i][j]`, `i <= j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GramColumn {
    pub block: usize,
    pub i: usize,
    pub j: usize,
}

/// Coefficient-matching equations `sum_blocks z'Qz = target`: one row per
/// monomial, one column per upper-triangle Gram entry. Off-diagonal columns
/// carry coefficient 2.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub rows: Vec<Monomial>,
    pub columns: Vec<GramColumn>,
    pub block_sizes: Vec<usize>,
    /// Sparse rows as `(column, coefficient)`.
    pub entries: Vec<Vec<(usize, Rational)>>,
    pub rhs: Vec<Rational>,
}

impl LinearSystem {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    /// Column index of `Q_block[i][j]` (either triangle).
    pub fn column_index(&self, block: usize, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let offset: usize = self.block_sizes[..block].iter().map(|n| n * (n + 1) / 2).sum();
        let n = self.block_sizes[block];
        offset + i * n - i * (i + 1) / 2 + j
    }

    /// Packs symmetric block matrices into a column vector.
    pub fn pack<T: Clone>(&self, blocks: &[Vec<Vec<T>>]) -> Vec<T> {
        self.columns.iter().map(|c| blocks[c.block][c.i][c.j].clone()).collect()
    }

    pub fn unpack(&self, x: &[Rational]) -> Vec<Vec<Vec<Rational>>> {
        let mut out: Vec<Vec<Vec<Rational>>> = self
            .block_sizes
            .iter()
            .map(|&n| vec![vec![Rational::zero(); n]; n])
            .collect();
        for (c, v) in self.columns.iter().zip(x) {
            out[c.block][c.i][c.j] = v.clone();
            out[c.block][c.j][c.i] = v.clone();
        }
        out
    }

    /// `A x - b` row by row.
    pub fn residual(&self, x: &[Rational]) -> Vec<Rational> {
        self.entries
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| {
                let mut acc = -b.clone();
                for (c, a) in row {
                    acc += a * &x[*c];
                }
                acc
            })
            .collect()
    }
}

/// Builds the Gram coefficient-matching system for `target` over `blocks`.
pub fn gram_system(target: &Polynomial, blocks: &[MonomialBasis]) -> Result<LinearSystem, GramError> {
    let mut columns = Vec::new();
    let mut by_monomial: BTreeMap<Monomial, Vec<(usize, Rational)>> = BTreeMap::new();
    for (b, basis) in blocks.iter().enumerate() {
        if basis.nvars != target.nvars() {
            return Err(GramError::Shape(format!(
                "block {b} has {} variables, target has {}",
                basis.nvars,
                target.nvars()
            )));
        }
        let n = basis.len();
        for i in 0..n {
            for j in i..n {
                let col = columns.len();
                columns.push(GramColumn { block: b, i, j });
                let m = basis.monomials[i].mul(&basis.monomials[j]);
                let coeff = if i == j { Rational::one() } else { int(2) };
                by_monomial.entry(m).or_default().push((col, coeff));
            }
        }
    }
    for m in target.monomials() {
        if !by_monomial.contains_key(m) {
            return Err(GramError::Unreachable(m.exps().to_vec()));
        }
    }
    let mut rows = Vec::with_capacity(by_monomial.len());
    let mut entries = Vec::with_capacity(by_monomial.len());
    let mut rhs = Vec::with_capacity(by_monomial.len());
    // Largest monomial first, matching printed order.
    for (m, row) in by_monomial.into_iter().rev() {
        rhs.push(target.coeff(&m));
        rows.push(m);
        entries.push(row);
    }
    Ok(LinearSystem {
        rows,
        columns,
        block_sizes: blocks.iter().map(|b| b.len()).collect(),
        entries,
        rhs,
    })
}
