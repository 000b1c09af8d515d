use crate::polycore::{PolyMatrix, Polynomial};

use super::CertError;

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// Principal minors by order, then lexicographic index set. With
/// `order = None` all `2^m - 1` of them are returned.
pub fn principal_minors(p: &PolyMatrix, order: Option<usize>) -> Result<Vec<(Vec<usize>, Polynomial)>, CertError> {
    if !p.is_square() {
        return Err(CertError::Shape("principal minors need a square matrix".into()));
    }
    let m = p.rows();
    let orders: Vec<usize> = match order {
        Some(k) if k == 0 || k > m => return Err(CertError::Shape(format!("minor order {k} for a {m}x{m} matrix"))),
        Some(k) => vec![k],
        None => (1..=m).collect(),
    };
    let mut out = Vec::new();
    for k in orders {
        for s in subsets(m, k) {
            let det = p.submatrix(&s, &s).determinant()?;
            out.push((s, det));
        }
    }
    Ok(out)
}

/// `det(M'M)` for an `s x m` matrix `M`, as the sum of `det(M_S)^2` over
/// the `m`-row subsets `S` (zero when `s < m`).
pub fn cauchy_binet_det(m: &PolyMatrix) -> Result<Polynomial, CertError> {
    let cols: Vec<usize> = (0..m.cols()).collect();
    let mut acc = Polynomial::zero(m.nvars());
    for rows in subsets(m.rows(), m.cols()) {
        let d = m.submatrix(&rows, &cols).determinant()?;
        acc = &acc + &(&d * &d);
    }
    Ok(acc)
}
