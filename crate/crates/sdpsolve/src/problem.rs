//! Problem data for block-diagonal semidefinite programs.
//!
//! Primal form solved by [`crate::solve`]:
//!
//! ```text
//! min   sum_k <C_k, X_k> + c_f' u
//! s.t.  sum_k <A_ik, X_k> + f_i' u = b_i      i = 1..m
//!       X_k PSD,  u free
//! ```
//!
//! with dual
//!
//! ```text
//! max   b' y
//! s.t.  C_k - sum_i y_i A_ik = S_k PSD,   F' y = c_f
//! ```
//!
//! A 1x1 block is an ordinary nonnegative scalar, so linear inequalities are
//! expressed by adding a slack block of dimension one.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("block index {block} out of range ({nblocks} blocks)")]
    BlockOutOfRange { block: usize, nblocks: usize },
    #[error("entry ({row}, {col}) out of range for block {block} of dimension {dim}")]
    EntryOutOfRange {
        block: usize,
        row: usize,
        col: usize,
        dim: usize,
    },
    #[error("free variable {index} out of range ({nfree} free variables)")]
    FreeOutOfRange { index: usize, nfree: usize },
    #[error("objective block {block} has shape {rows}x{cols}, expected {dim}x{dim}")]
    ObjectiveShape {
        block: usize,
        rows: usize,
        cols: usize,
        dim: usize,
    },
    #[error("objective block {0} is not symmetric")]
    AsymmetricObjective(usize),
    #[error("free objective has length {got}, expected {expected}")]
    FreeObjectiveLength { got: usize, expected: usize },
}

/// One entry of a symmetric constraint matrix. `(row, col)` and `(col, row)`
/// both carry `value`, so an off-diagonal entry contributes `2 * value * X[row][col]`
/// to the inner product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

impl BlockEntry {
    pub fn new(block: usize, row: usize, col: usize, value: f64) -> Self {
        let (row, col) = if row <= col { (row, col) } else { (col, row) };
        Self {
            block,
            row,
            col,
            value,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Constraint {
    pub entries: Vec<BlockEntry>,
    /// Coefficients on the free variables, as `(index, value)`.
    pub free: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(rhs: f64) -> Self {
        Self {
            entries: Vec::new(),
            free: Vec::new(),
            rhs,
        }
    }

    pub fn entry(mut self, block: usize, row: usize, col: usize, value: f64) -> Self {
        self.entries.push(BlockEntry::new(block, row, col, value));
        self
    }

    pub fn free_var(mut self, index: usize, value: f64) -> Self {
        self.free.push((index, value));
        self
    }

    /// Inner product `sum_k <A_k, X_k> + f' u`.
    pub fn evaluate(&self, x: &[DMatrix<f64>], u: &[f64]) -> f64 {
        let mut acc = 0.0;
        for e in &self.entries {
            let v = x[e.block][(e.row, e.col)];
            acc += if e.row == e.col { e.value * v } else { 2.0 * e.value * v };
        }
        for &(j, f) in &self.free {
            acc += f * u[j];
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub block_dims: Vec<usize>,
    pub objective: Vec<DMatrix<f64>>,
    pub constraints: Vec<Constraint>,
    pub free_objective: Vec<f64>,
}

impl SdpProblem {
    pub fn new(block_dims: Vec<usize>) -> Self {
        let objective = block_dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        Self {
            block_dims,
            objective,
            constraints: Vec::new(),
            free_objective: Vec::new(),
        }
    }

    pub fn with_free_vars(mut self, n: usize) -> Self {
        self.free_objective = vec![0.0; n];
        self
    }

    pub fn n_free(&self) -> usize {
        self.free_objective.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Sum of block dimensions; the barrier parameter is normalized by this.
    pub fn total_dim(&self) -> usize {
        self.block_dims.iter().sum()
    }

    pub fn add_block(&mut self, dim: usize) -> usize {
        self.block_dims.push(dim);
        self.objective.push(DMatrix::zeros(dim, dim));
        self.block_dims.len() - 1
    }

    pub fn add_free_vars(&mut self, n: usize) -> usize {
        let first = self.free_objective.len();
        self.free_objective.extend(std::iter::repeat_n(0.0, n));
        first
    }

    pub fn add_constraint(&mut self, c: Constraint) -> usize {
        self.constraints.push(c);
        self.constraints.len() - 1
    }

    /// Adds `value` at `(row, col)` and `(col, row)` of objective block `block`.
    pub fn set_objective_entry(&mut self, block: usize, row: usize, col: usize, value: f64) {
        self.objective[block][(row, col)] = value;
        self.objective[block][(col, row)] = value;
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        let nblocks = self.block_dims.len();
        for (k, (c, &dim)) in self.objective.iter().zip(&self.block_dims).enumerate() {
            if c.nrows() != dim || c.ncols() != dim {
                return Err(ProblemError::ObjectiveShape {
                    block: k,
                    rows: c.nrows(),
                    cols: c.ncols(),
                    dim,
                });
            }
            for i in 0..dim {
                for j in 0..i {
                    if (c[(i, j)] - c[(j, i)]).abs() > 1e-14 * (1.0 + c[(i, j)].abs()) {
                        return Err(ProblemError::AsymmetricObjective(k));
                    }
                }
            }
        }
        if self.objective.len() != nblocks {
            return Err(ProblemError::BlockOutOfRange {
                block: self.objective.len(),
                nblocks,
            });
        }
        let nfree = self.n_free();
        for con in &self.constraints {
            for e in &con.entries {
                if e.block >= nblocks {
                    return Err(ProblemError::BlockOutOfRange {
                        block: e.block,
                        nblocks,
                    });
                }
                let dim = self.block_dims[e.block];
                if e.row >= dim || e.col >= dim {
                    return Err(ProblemError::EntryOutOfRange {
                        block: e.block,
                        row: e.row,
                        col: e.col,
                        dim,
                    });
                }
            }
            for &(j, _) in &con.free {
                if j >= nfree {
                    return Err(ProblemError::FreeOutOfRange { index: j, nfree });
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[DMatrix<f64>], u: &[f64]) -> f64 {
        let mut v: f64 = self
            .objective
            .iter()
            .zip(x)
            .map(|(c, x)| c.component_mul(x).sum())
            .sum();
        v += self.free_objective.iter().zip(u).map(|(a, b)| a * b).sum::<f64>();
        v
    }

    /// Sparse text export for cross-checking with external solvers.
    ///
    /// ```text
    /// <m constraints> <nblocks> <nfree>
    /// <block dims...>
    /// <rhs...>
    /// 0 <block> <row> <col> <value>        objective entries (1-based, upper triangle)
    /// <i> <block> <row> <col> <value>      constraint i entries
    /// f <i> <var> <value>                  free-variable coefficients (i = 0 is the objective)
    /// ```
    pub fn to_sparse_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {}",
            self.constraints.len(),
            self.block_dims.len(),
            self.n_free()
        );
        let dims: Vec<String> = self.block_dims.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(out, "{}", dims.join(" "));
        let rhs: Vec<String> = self.constraints.iter().map(|c| format!("{:e}", c.rhs)).collect();
        let _ = writeln!(out, "{}", rhs.join(" "));
        for (k, c) in self.objective.iter().enumerate() {
            for i in 0..c.nrows() {
                for j in i..c.ncols() {
                    if c[(i, j)] != 0.0 {
                        let _ = writeln!(out, "0 {} {} {} {:e}", k + 1, i + 1, j + 1, c[(i, j)]);
                    }
                }
            }
        }
        for (j, &v) in self.free_objective.iter().enumerate() {
            if v != 0.0 {
                let _ = writeln!(out, "f 0 {} {:e}", j + 1, v);
            }
        }
        for (i, con) in self.constraints.iter().enumerate() {
            for e in &con.entries {
                let _ = writeln!(
                    out,
                    "{} {} {} {} {:e}",
                    i + 1,
                    e.block + 1,
                    e.row + 1,
                    e.col + 1,
                    e.value
                );
            }
            for &(j, v) in &con.free {
                let _ = writeln!(out, "f {} {} {:e}", i + 1, j + 1, v);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entry_is_stored_upper() {
        let e = BlockEntry::new(0, 3, 1, 2.0);
        assert_eq!((e.row, e.col), (1, 3));
    }

    #[test]
    fn off_diagonal_counts_twice() {
        let c = Constraint::new(0.0).entry(0, 0, 1, 1.0).entry(0, 1, 1, 1.0);
        let x = vec![DMatrix::from_row_slice(2, 2, &[5.0, 3.0, 3.0, 7.0])];
        assert_eq!(c.evaluate(&x, &[]), 13.0);
    }

    #[test]
    fn validate_rejects_bad_entries() {
        let mut p = SdpProblem::new(vec![2]);
        p.add_constraint(Constraint::new(1.0).entry(0, 2, 0, 1.0));
        assert!(matches!(
            p.validate(),
            Err(ProblemError::EntryOutOfRange { .. })
        ));
        let mut p = SdpProblem::new(vec![2]);
        p.add_constraint(Constraint::new(1.0).free_var(0, 1.0));
        assert!(matches!(p.validate(), Err(ProblemError::FreeOutOfRange { .. })));
    }

    #[test]
    fn sparse_text_lists_entries() {
        let mut p = SdpProblem::new(vec![1]);
        p.set_objective_entry(0, 0, 0, 1.0);
        p.add_constraint(Constraint::new(1.0).entry(0, 0, 0, 1.0));
        let txt = p.to_sparse_text();
        assert!(txt.starts_with("1 1 0\n1\n"));
        assert!(txt.contains("1 1 1 1 1e0"));
    }
}
