//! Rounding of numeric Gram matrices to exact solutions of the Gram system:
//! round to a bounded denominator, then project orthogonally (Frobenius
//! metric) onto the affine solution set with exact arithmetic.
//!
//! When the numeric solution has a clear kernel (targets with real zeros),
//! the kernel is rounded to small rationals and `Q v = 0` is imposed as
//! extra equations, so the projection stays on the face of the PSD cone
//! that contains the numeric solution.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::ldl::{rational_psd_check, RationalMatrix};
use super::system::LinearSystem;
use super::GramError;
use crate::polycore::rational::{int, round_to_denominator};
use crate::polycore::Rational;

#[derive(Debug, Clone, PartialEq)]
pub struct RationalizeOptions {
    /// First denominator tried; doubled until `max_denominator`.
    pub denominator_bound: u64,
    pub max_denominator: u64,
    /// Eigenvalues below `kernel_tol * max(1, lambda_max)` count as kernel.
    pub kernel_tol: f64,
    /// Largest denominator accepted when rounding kernel vectors.
    pub kernel_max_denominator: i64,
}

impl Default for RationalizeOptions {
    fn default() -> Self {
        Self {
            denominator_bound: 1_000_000,
            max_denominator: 1_000_000_000_000,
            kernel_tol: 1e-6,
            kernel_max_denominator: 1000,
        }
    }
}

/// Exact Gram matrices solving `system` that pass the rational PSD check.
pub fn rationalize_gram(
    q_float: &[DMatrix<f64>],
    system: &LinearSystem,
    opts: &RationalizeOptions,
) -> Result<Vec<RationalMatrix>, GramError> {
    if q_float.len() != system.block_sizes.len()
        || q_float.iter().zip(&system.block_sizes).any(|(q, &n)| q.nrows() != n || q.ncols() != n)
    {
        return Err(GramError::Shape("numeric Gram blocks do not match the system".into()));
    }
    let facial = kernel_rows(q_float, system, opts);
    let mut attempts: Vec<Option<&Vec<Vec<(usize, Rational)>>>> = vec![None];
    if let Some(rows) = &facial {
        attempts.insert(0, Some(rows));
    }
    let mut last_err = GramError::Rationalize("no attempt made".into());
    for extra in attempts {
        let mut denom = opts.denominator_bound.max(1);
        loop {
            match attempt(q_float, system, extra, denom) {
                Ok(q) => return Ok(q),
                Err(e) => last_err = e,
            }
            if matches!(last_err, GramError::Inconsistent) || denom >= opts.max_denominator {
                break;
            }
            denom = denom.saturating_mul(2).min(opts.max_denominator);
        }
    }
    Err(last_err)
}

fn attempt(
    q_float: &[DMatrix<f64>],
    system: &LinearSystem,
    extra: Option<&Vec<Vec<(usize, Rational)>>>,
    denom: u64,
) -> Result<Vec<RationalMatrix>, GramError> {
    let d = BigInt::from(denom);
    let x0: Vec<Rational> = system
        .columns
        .iter()
        .map(|c| round_to_denominator(q_float[c.block][(c.i, c.j)], &d))
        .collect();
    let x = match extra {
        None => project_disjoint(system, &x0)?,
        Some(rows) => project_general(system, rows, &x0)?,
    };
    let blocks = system.unpack(&x);
    for (k, q) in blocks.iter().enumerate() {
        let ldl = rational_psd_check(q)?;
        if !ldl.verdict.is_psd() {
            return Err(GramError::NotPsd { block: k });
        }
    }
    Ok(blocks)
}

/// Frobenius weight of a column: off-diagonal entries appear twice in `Q`.
fn weight(system: &LinearSystem, col: usize) -> Rational {
    let c = system.columns[col];
    if c.i == c.j {
        Rational::one()
    } else {
        int(2)
    }
}

/// Projection when every column appears in exactly one row, so the normal
/// matrix is diagonal.
fn project_disjoint(system: &LinearSystem, x0: &[Rational]) -> Result<Vec<Rational>, GramError> {
    let res = system.residual(x0);
    let mut x = x0.to_vec();
    for (r, row) in system.entries.iter().enumerate() {
        if res[r].is_zero() {
            continue;
        }
        let g: Rational = row.iter().map(|(c, a)| a * a / weight(system, *c)).sum();
        if g.is_zero() {
            return Err(GramError::Inconsistent);
        }
        let lam = &res[r] / g;
        for (c, a) in row {
            let delta = a * &lam / weight(system, *c);
            x[*c] -= delta;
        }
    }
    Ok(x)
}

/// Projection onto `{A x = b, E x = 0}` via exact normal equations.
fn project_general(
    system: &LinearSystem,
    extra: &[Vec<(usize, Rational)>],
    x0: &[Rational],
) -> Result<Vec<Rational>, GramError> {
    let mut rows: Vec<&Vec<(usize, Rational)>> = system.entries.iter().collect();
    rows.extend(extra.iter());
    let mut res = system.residual(x0);
    for row in extra {
        res.push(row.iter().map(|(c, a)| a * &x0[*c]).sum());
    }
    let m = rows.len();
    let ncols = system.n_cols();
    // Dense copies of the rows scaled by W^{-1} for the Gram products.
    let winv: Vec<Rational> = (0..ncols).map(|c| Rational::one() / weight(system, c)).collect();
    let mut dense: Vec<Vec<Rational>> = vec![vec![Rational::zero(); ncols]; m];
    for (r, row) in rows.iter().enumerate() {
        for (c, a) in row.iter() {
            dense[r][*c] += a;
        }
    }
    let mut g = vec![vec![Rational::zero(); m]; m];
    for i in 0..m {
        for j in i..m {
            let mut acc = Rational::zero();
            for (c, a) in rows[i].iter() {
                let b = &dense[j][*c];
                if !b.is_zero() {
                    acc += a * b * &winv[*c];
                }
            }
            g[i][j] = acc.clone();
            g[j][i] = acc;
        }
    }
    let lam = solve_consistent(g, res)?;
    let mut x = x0.to_vec();
    for (r, row) in rows.iter().enumerate() {
        if lam[r].is_zero() {
            continue;
        }
        for (c, a) in row.iter() {
            x[*c] -= a * &lam[r] * &winv[*c];
        }
    }
    Ok(x)
}

/// One solution of a possibly singular consistent system `G y = r`.
fn solve_consistent(mut g: Vec<Vec<Rational>>, mut r: Vec<Rational>) -> Result<Vec<Rational>, GramError> {
    let m = r.len();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row = 0;
    for col in 0..m {
        let Some(p) = (row..m).find(|&i| !g[i][col].is_zero()) else {
            continue;
        };
        g.swap(row, p);
        r.swap(row, p);
        let inv = Rational::one() / &g[row][col];
        for j in col..m {
            g[row][j] = &g[row][j] * &inv;
        }
        r[row] = &r[row] * &inv;
        for i in 0..m {
            if i != row && !g[i][col].is_zero() {
                let f = g[i][col].clone();
                for j in col..m {
                    if !g[row][j].is_zero() {
                        let t = &f * &g[row][j];
                        g[i][j] -= t;
                    }
                }
                let t = &f * &r[row];
                r[i] -= t;
            }
        }
        pivots.push((row, col));
        row += 1;
        if row == m {
            break;
        }
    }
    if r[row..].iter().any(|v| !v.is_zero()) {
        return Err(GramError::Inconsistent);
    }
    let mut y = vec![Rational::zero(); m];
    for (i, c) in pivots {
        y[c] = r[i].clone();
    }
    Ok(y)
}

/// Equations `Q v = 0` for rounded kernel vectors of each numeric block, or
/// `None` when no block has a recognizable rational kernel.
fn kernel_rows(
    q_float: &[DMatrix<f64>],
    system: &LinearSystem,
    opts: &RationalizeOptions,
) -> Option<Vec<Vec<(usize, Rational)>>> {
    let mut rows = Vec::new();
    for (b, q) in q_float.iter().enumerate() {
        let n = q.nrows();
        if n == 0 {
            continue;
        }
        let eig = q.clone().symmetric_eigen();
        let lmax = eig.eigenvalues.max().max(1.0);
        let ker: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] < opts.kernel_tol * lmax).collect();
        if ker.is_empty() || ker.len() == n {
            continue;
        }
        let k = DMatrix::from_fn(ker.len(), n, |r, c| eig.eigenvectors[(c, ker[r])]);
        let Some(vs) = rational_rref(&k, opts.kernel_max_denominator) else {
            continue;
        };
        for v in vs {
            let vf: Vec<f64> = v.iter().map(crate::polycore::rational::to_f64).collect();
            let qv = q * nalgebra::DVector::from_vec(vf.clone());
            let vn = vf.iter().map(|x| x * x).sum::<f64>().sqrt();
            if qv.norm() > 1e3 * opts.kernel_tol * lmax * vn {
                continue;
            }
            for i in 0..n {
                let mut row: Vec<(usize, Rational)> = Vec::new();
                for (j, vj) in v.iter().enumerate() {
                    if !vj.is_zero() {
                        row.push((system.column_index(b, i, j), vj.clone()));
                    }
                }
                if !row.is_empty() {
                    rows.push(row);
                }
            }
        }
    }
    (!rows.is_empty()).then_some(rows)
}

/// Reduced row echelon form of the row space of `k`, with entries rounded
/// to fractions of bounded denominator. `None` if rounding is not close.
fn rational_rref(k: &DMatrix<f64>, max_den: i64) -> Option<Vec<Vec<Rational>>> {
    let mut a = k.clone();
    let (rows, cols) = a.shape();
    let mut r = 0;
    let mut pivot_cols = Vec::new();
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (p, val) = (r..rows)
            .map(|i| (i, a[(i, c)].abs()))
            .fold((r, -1.0), |best, x| if x.1 > best.1 { x } else { best });
        if val < 1e-8 {
            continue;
        }
        a.swap_rows(r, p);
        let piv = a[(r, c)];
        for j in 0..cols {
            a[(r, j)] /= piv;
        }
        for i in 0..rows {
            if i != r {
                let f = a[(i, c)];
                if f != 0.0 {
                    for j in 0..cols {
                        a[(i, j)] -= f * a[(r, j)];
                    }
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let mut out = Vec::with_capacity(r);
    for i in 0..r {
        let mut v = Vec::with_capacity(cols);
        for j in 0..cols {
            let x = a[(i, j)];
            v.push(simplest_rational(x, KERNEL_ROUNDING, max_den)?);
        }
        out.push(v);
    }
    Some(out)
}

/// Numeric kernel vectors of interior-point solutions are only accurate to
/// about the square root of the solver tolerance.
const KERNEL_ROUNDING: f64 = 1e-4;

/// First continued-fraction convergent of `x` within `tol`, if its
/// denominator stays at most `max_den`.
fn simplest_rational(x: f64, tol: f64, max_den: i64) -> Option<Rational> {
    let neg = x < 0.0;
    let mut y = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    for _ in 0..64 {
        let a = y.floor();
        if a > 1e12 {
            return None;
        }
        let a = a as i64;
        let p2 = a.checked_mul(p1)?.checked_add(p0)?;
        let q2 = a.checked_mul(q1)?.checked_add(q0)?;
        if q2 > max_den {
            return None;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        if (p1 as f64 / q1 as f64 - x.abs()).abs() <= tol {
            let r = Rational::new(BigInt::from(p1), BigInt::from(q1));
            return Some(if neg { -r } else { r });
        }
        let frac = y - a as f64;
        if frac <= 0.0 {
            return None;
        }
        y = 1.0 / frac;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grambasis::{gram_system, MonomialBasis};
    use crate::polycore::rational::rat;
    use crate::polycore::Polynomial;

    #[test]
    fn snaps_rank_one_square() {
        let t = Polynomial::from_int_terms(2, &[(&[2, 0], 1), (&[1, 1], 2), (&[0, 2], 1)]);
        let basis = MonomialBasis::from_exponents(2, &[&[1, 0], &[0, 1]]);
        let sys = gram_system(&t, &[basis]).unwrap();
        let qf = DMatrix::from_row_slice(2, 2, &[1.0 + 3e-10, 1.0 - 2e-10, 1.0 - 2e-10, 1.0 - 4e-10]);
        let q = rationalize_gram(&[qf], &sys, &RationalizeOptions::default()).unwrap();
        assert_eq!(q[0], vec![vec![int(1), int(1)], vec![int(1), int(1)]]);
    }

    #[test]
    fn projection_lands_on_affine_set() {
        let t = Polynomial::from_int_terms(1, &[(&[4], 2), (&[2], 1), (&[0], 3)]);
        let basis = MonomialBasis::from_exponents(1, &[&[0], &[1], &[2]]);
        let sys = gram_system(&t, &[basis]).unwrap();
        let qf = DMatrix::from_row_slice(3, 3, &[3.0, 0.0, -0.4, 0.0, 1.8, 0.0, -0.4, 0.0, 2.0]);
        let q = rationalize_gram(&[qf], &sys, &RationalizeOptions::default()).unwrap();
        let x = sys.pack(&q);
        assert!(sys.residual(&x).iter().all(|r| r.is_zero()));
        assert_eq!(q[0][0][2], rat(-2, 5));
    }

    #[test]
    fn simplest_within_tolerance() {
        assert_eq!(simplest_rational(-1.0000111, 1e-4, 1000), Some(int(-1)));
        assert_eq!(simplest_rational(0.33334, 1e-4, 1000), Some(rat(1, 3)));
        assert_eq!(simplest_rational(0.0, 1e-4, 1000), Some(int(0)));
        assert_eq!(simplest_rational(0.123456789, 1e-9, 1000), None);
    }

    #[test]
    fn singular_consistent_solve() {
        let g = vec![vec![int(1), int(1)], vec![int(1), int(1)]];
        let y = solve_consistent(g.clone(), vec![int(2), int(2)]).unwrap();
        assert_eq!(&y[0] + &y[1], int(2));
        assert_eq!(solve_consistent(g, vec![int(2), int(3)]), Err(GramError::Inconsistent));
    }
}
