//! Exact convex-hull membership by phase-one simplex with Bland's rule.

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, Zero};

trait Field: Clone + Zero + One + PartialOrd + Signed + CheckedAdd + CheckedSub + CheckedMul + CheckedDiv {
    fn from_i64(v: i64) -> Self;
}

impl Field for Ratio<i128> {
    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(v as i128)
    }
}

impl Field for Ratio<BigInt> {
    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(BigInt::from(v))
    }
}

/// Whether `point` lies in the convex hull of `points` (all integer vectors
/// of the same length).
pub fn hull_contains(point: &[i64], points: &[Vec<i64>]) -> bool {
    if points.is_empty() {
        return false;
    }
    if points.iter().any(|p| p.as_slice() == point) {
        return true;
    }
    for k in 0..point.len() {
        let lo = points.iter().map(|p| p[k]).min().unwrap();
        let hi = points.iter().map(|p| p[k]).max().unwrap();
        if point[k] < lo || point[k] > hi {
            return false;
        }
    }
    match phase_one::<Ratio<i128>>(point, points) {
        Some(v) => v,
        None => phase_one::<Ratio<BigInt>>(point, points).expect("big rationals do not overflow"),
    }
}

/// Minimizes the sum of artificials for `sum l_j p_j = point`, `sum l_j = 1`,
/// `l >= 0`. Returns `None` on arithmetic overflow.
fn phase_one<T: Field>(point: &[i64], points: &[Vec<i64>]) -> Option<bool> {
    let d = point.len();
    let m = d + 1;
    let n = points.len();
    let ncols = n + m;
    // Rows: coordinates then the convexity row; all right-hand sides >= 0.
    let mut tab: Vec<Vec<T>> = Vec::with_capacity(m);
    let mut rhs: Vec<T> = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = vec![T::zero(); ncols];
        for (j, p) in points.iter().enumerate() {
            row[j] = if i < d { T::from_i64(p[i]) } else { T::one() };
        }
        row[n + i] = T::one();
        tab.push(row);
        rhs.push(if i < d { T::from_i64(point[i]) } else { T::one() });
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    // Reduced costs of the phase-one objective.
    let mut cost = vec![T::zero(); ncols];
    let mut obj = T::zero();
    for i in 0..m {
        for j in 0..n {
            cost[j] = cost[j].checked_sub(&tab[i][j])?;
        }
        obj = obj.checked_add(&rhs[i])?;
    }
    loop {
        let Some(enter) = (0..ncols).find(|&j| cost[j].is_negative()) else {
            return Some(obj.is_zero());
        };
        let mut leave: Option<(usize, T)> = None;
        for i in 0..m {
            if tab[i][enter].is_positive() {
                let ratio = rhs[i].checked_div(&tab[i][enter])?;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // Phase one is bounded below by zero, so a leaving row always exists.
        let (r, _) = leave?;
        let piv = tab[r][enter].clone();
        for j in 0..ncols {
            tab[r][j] = tab[r][j].checked_div(&piv)?;
        }
        rhs[r] = rhs[r].checked_div(&piv)?;
        for i in 0..m {
            if i == r || tab[i][enter].is_zero() {
                continue;
            }
            let f = tab[i][enter].clone();
            for j in 0..ncols {
                if !tab[r][j].is_zero() {
                    let t = f.checked_mul(&tab[r][j])?;
                    tab[i][j] = tab[i][j].checked_sub(&t)?;
                }
            }
            rhs[i] = rhs[i].checked_sub(&f.checked_mul(&rhs[r])?)?;
        }
        let f = cost[enter].clone();
        for j in 0..ncols {
            if !tab[r][j].is_zero() {
                cost[j] = cost[j].checked_sub(&f.checked_mul(&tab[r][j])?)?;
            }
        }
        obj = obj.checked_add(&f.checked_mul(&rhs[r])?)?;
        basis[r] = enter;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Vec<i64>> {
        vec![vec![0, 0], vec![2, 0], vec![0, 2], vec![2, 2]]
    }

    #[test]
    fn interior_and_boundary() {
        assert!(hull_contains(&[1, 1], &square()));
        assert!(hull_contains(&[2, 1], &square()));
        assert!(!hull_contains(&[3, 1], &square()));
    }

    #[test]
    fn outside_but_within_bounding_box() {
        let tri = vec![vec![0, 0], vec![4, 0], vec![0, 4]];
        assert!(hull_contains(&[2, 2], &tri));
        assert!(!hull_contains(&[3, 3], &tri));
    }

    #[test]
    fn big_rational_path_agrees() {
        let tri = vec![vec![0, 0], vec![4, 0], vec![0, 4]];
        assert_eq!(phase_one::<Ratio<BigInt>>(&[1, 2], &tri), Some(true));
        assert_eq!(phase_one::<Ratio<BigInt>>(&[3, 2], &tri), Some(false));
    }
}
