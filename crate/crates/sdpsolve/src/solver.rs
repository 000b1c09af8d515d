//! Infeasible primal-dual path-following interior-point method with
//! Nesterov-Todd scaling and Mehrotra predictor-corrector steps.
//!
//! The Schur complement `M_ij = <A_i, W A_j W>` is formed densely and the
//! saddle-point system with free variables is solved by LU.

use nalgebra::{DMatrix, DVector};

use crate::problem::{ProblemError, SdpProblem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpSettings {
    /// Relative tolerance on primal/dual residuals and duality gap.
    pub tol: f64,
    pub max_iter: usize,
    /// A dual (primal) objective beyond this bound along an improving
    /// direction is reported as primal (dual) infeasibility.
    pub infeasibility_bound: f64,
}

impl Default for SdpSettings {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 200,
            infeasibility_bound: 1e8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIter,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub x: Vec<DMatrix<f64>>,
    /// Dual multipliers, one per constraint of the original problem. On
    /// `PrimalInfeasible` this is a ray normalized to `b'y = 1`.
    pub y: DVector<f64>,
    pub s: Vec<DMatrix<f64>>,
    pub free: DVector<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// Relative duality gap `|p - d| / (1 + |p| + |d|)`.
    pub gap: f64,
    /// `||b - A(X) - F u|| / (1 + ||b||)`.
    pub primal_residual: f64,
    /// `||C - A*(y) - S, c_f - F'y|| / (1 + ||C|| + ||c_f||)`.
    pub dual_residual: f64,
    /// `sum <X_k, S_k> / total_dim`.
    pub complementarity: f64,
    pub iterations: usize,
    pub diagnostics: Option<String>,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }

    /// Largest of the three relative accuracy measures.
    pub fn accuracy(&self) -> f64 {
        self.gap.max(self.primal_residual).max(self.dual_residual)
    }
}

/// Constraint data reorganized per block for the active (non-redundant) rows.
struct Operator {
    /// For each block, `(local row index, entries (r, c, v))`.
    per_block: Vec<Vec<(usize, Vec<(usize, usize, f64)>)>>,
    free: DMatrix<f64>,
    b: DVector<f64>,
    dims: Vec<usize>,
}

impl Operator {
    fn new(prob: &SdpProblem, active: &[usize]) -> Self {
        let nb = prob.block_dims.len();
        let m = active.len();
        let nf = prob.n_free();
        let mut per_block: Vec<Vec<(usize, Vec<(usize, usize, f64)>)>> = vec![Vec::new(); nb];
        let mut free = DMatrix::zeros(m, nf);
        let mut b = DVector::zeros(m);
        for (li, &ci) in active.iter().enumerate() {
            let con = &prob.constraints[ci];
            b[li] = con.rhs;
            let mut by_block: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); nb];
            for e in &con.entries {
                by_block[e.block].push((e.row, e.col, e.value));
            }
            for (k, entries) in by_block.into_iter().enumerate() {
                if !entries.is_empty() {
                    per_block[k].push((li, merge_entries(entries)));
                }
            }
            for &(j, v) in &con.free {
                free[(li, j)] += v;
            }
        }
        Self {
            per_block,
            free,
            b,
            dims: prob.block_dims.clone(),
        }
    }

    fn m(&self) -> usize {
        self.b.len()
    }

    /// `A(X)` without the free-variable part.
    fn apply(&self, x: &[DMatrix<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.m());
        for (k, rows) in self.per_block.iter().enumerate() {
            for (li, entries) in rows {
                out[*li] += inner_sparse(entries, &x[k]);
            }
        }
        out
    }

    /// `A*(y)` per block.
    fn adjoint(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = self.dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (k, rows) in self.per_block.iter().enumerate() {
            for (li, entries) in rows {
                let yi = y[*li];
                if yi == 0.0 {
                    continue;
                }
                for &(r, c, v) in entries {
                    out[k][(r, c)] += yi * v;
                    if r != c {
                        out[k][(c, r)] += yi * v;
                    }
                }
            }
        }
        out
    }

    /// Schur complement `M_ij = <A_i, W A_j W>`.
    fn schur(&self, scal: &[Scaling]) -> DMatrix<f64> {
        let m = self.m();
        let mut mat = DMatrix::zeros(m, m);
        for (k, rows) in self.per_block.iter().enumerate() {
            let w = &scal[k].w;
            let n = w.nrows();
            let mut buf = DMatrix::zeros(n, n);
            for (jpos, (lj, ej)) in rows.iter().enumerate() {
                buf.fill(0.0);
                for &(r, c, v) in ej {
                    let wr = w.column(r);
                    let wc = w.column(c);
                    if r == c {
                        buf.ger(v, &wr, &wr, 1.0);
                    } else {
                        buf.ger(v, &wr, &wc, 1.0);
                        buf.ger(v, &wc, &wr, 1.0);
                    }
                }
                for (li, ei) in rows.iter().take(jpos + 1) {
                    let val = inner_sparse(ei, &buf);
                    mat[(*li, *lj)] += val;
                    if li != lj {
                        mat[(*lj, *li)] += val;
                    }
                }
            }
        }
        mat
    }
}

fn merge_entries(mut entries: Vec<(usize, usize, f64)>) -> Vec<(usize, usize, f64)> {
    entries.sort_by_key(|e| (e.0, e.1));
    let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
    for (r, c, v) in entries {
        match out.last_mut() {
            Some(last) if last.0 == r && last.1 == c => last.2 += v,
            _ => out.push((r, c, v)),
        }
    }
    out.retain(|e| e.2 != 0.0);
    out
}

fn inner_sparse(entries: &[(usize, usize, f64)], x: &DMatrix<f64>) -> f64 {
    entries
        .iter()
        .map(|&(r, c, v)| if r == c { v * x[(r, c)] } else { 2.0 * v * x[(r, c)] })
        .sum()
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// NT scaling of one block: `W = G G'`, `G^{-1} X G^{-T} = G' S G = diag(d)`.
struct Scaling {
    g: DMatrix<f64>,
    g_inv: DMatrix<f64>,
    d: DVector<f64>,
    w: DMatrix<f64>,
}

fn nt_scaling(x: &DMatrix<f64>, s: &DMatrix<f64>) -> Option<Scaling> {
    let lx = x.clone().cholesky()?.l();
    let ls = s.clone().cholesky()?.l();
    let prod = ls.transpose() * &lx;
    let svd = prod.svd(true, true);
    let v = svd.v_t?.transpose();
    let d = svd.singular_values;
    if d.iter().any(|&di| !(di > 0.0) || !di.is_finite()) {
        return None;
    }
    let n = d.len();
    let mut g = &lx * &v;
    for j in 0..n {
        let f = 1.0 / d[j].sqrt();
        g.column_mut(j).scale_mut(f);
    }
    // G^{-1} = D^{1/2} V' L^{-1}
    let lx_inv = lx.solve_lower_triangular(&DMatrix::identity(n, n))?;
    let mut g_inv = v.transpose() * lx_inv;
    for i in 0..n {
        let f = d[i].sqrt();
        g_inv.row_mut(i).scale_mut(f);
    }
    let w = &g * g.transpose();
    Some(Scaling { g, g_inv, d, w })
}

/// Largest `alpha` with `x + alpha * dx` PSD (infinity when unbounded).
fn max_step(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> Option<f64> {
    let n = x.nrows();
    let l = x.clone().cholesky()?.l();
    let linv = l.solve_lower_triangular(&DMatrix::identity(n, n))?;
    let mut m = &linv * dx * linv.transpose();
    symmetrize(&mut m);
    let lam_min = m.symmetric_eigenvalues().min();
    Some(if lam_min >= 0.0 { f64::INFINITY } else { -1.0 / lam_min })
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    dy: DVector<f64>,
    du: DVector<f64>,
    ds: Vec<DMatrix<f64>>,
}

struct Kkt {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Kkt {
    fn factor(op: &Operator, scal: &[Scaling]) -> Option<Self> {
        let m = op.m();
        let nf = op.free.ncols();
        let schur = op.schur(scal);
        let mut k = DMatrix::zeros(m + nf, m + nf);
        k.view_mut((0, 0), (m, m)).copy_from(&schur);
        if nf > 0 {
            k.view_mut((0, m), (m, nf)).copy_from(&op.free);
            k.view_mut((m, 0), (nf, m)).copy_from(&op.free.transpose());
        }
        // Tiny diagonal shift keeps LU usable when M is close to singular.
        let scale = (0..m).map(|i| schur[(i, i)].abs()).fold(0.0_f64, f64::max).max(1.0);
        for i in 0..m {
            k[(i, i)] += 1e-15 * scale;
        }
        let lu = k.lu();
        if !lu.is_invertible() {
            return None;
        }
        Some(Self { lu })
    }
}

struct State {
    x: Vec<DMatrix<f64>>,
    s: Vec<DMatrix<f64>>,
    y: DVector<f64>,
    u: DVector<f64>,
}

/// Solves the block SDP described in [`crate::problem`].
pub fn solve(prob: &SdpProblem, settings: &SdpSettings) -> Result<SdpSolution, ProblemError> {
    prob.validate()?;
    let m_all = prob.n_constraints();
    let nf = prob.n_free();

    let presolve = presolve(prob);
    let op = Operator::new(prob, &presolve.active);
    let dims = prob.block_dims.clone();
    let n_tot = prob.total_dim().max(1) as f64;

    let expand_y = |y: &DVector<f64>| -> DVector<f64> {
        let mut full = DVector::zeros(m_all);
        for (li, &ci) in presolve.active.iter().enumerate() {
            full[ci] = y[li];
        }
        full
    };

    if let Some(ray) = presolve.inconsistent_ray {
        return Ok(SdpSolution {
            status: SdpStatus::PrimalInfeasible,
            x: dims.iter().map(|&n| DMatrix::zeros(n, n)).collect(),
            y: ray,
            s: dims.iter().map(|&n| DMatrix::zeros(n, n)).collect(),
            free: DVector::zeros(nf),
            primal_objective: f64::INFINITY,
            dual_objective: f64::INFINITY,
            gap: f64::INFINITY,
            primal_residual: f64::INFINITY,
            dual_residual: 0.0,
            complementarity: 0.0,
            iterations: 0,
            diagnostics: Some("inconsistent linear equality constraints".into()),
        });
    }

    let c = &prob.objective;
    let cf = DVector::from_vec(prob.free_objective.clone());
    let norm_b = 1.0 + op.b.norm();
    let norm_c = 1.0 + c.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt() + cf.norm();

    // Fixed identity-scaled starting point.
    let nmax = dims.iter().copied().max().unwrap_or(1) as f64;
    let mut row_norms = vec![0.0_f64; op.m()];
    for (k, rows) in op.per_block.iter().enumerate() {
        let _ = k;
        for (li, entries) in rows {
            row_norms[*li] += entries
                .iter()
                .map(|&(r, cc, v)| if r == cc { v * v } else { 2.0 * v * v })
                .sum::<f64>();
        }
    }
    for li in 0..op.m() {
        row_norms[li] = (row_norms[li] + op.free.row(li).norm_squared()).sqrt();
    }
    let mut xi = 10.0_f64.max(nmax.sqrt());
    let mut eta = 10.0_f64.max(nmax.sqrt());
    for li in 0..op.m() {
        xi = xi.max((1.0 + op.b[li].abs()) / (1.0 + row_norms[li]));
        eta = eta.max(row_norms[li]);
    }
    eta = eta.max(norm_c - 1.0);
    let mut st = State {
        x: dims.iter().map(|&n| DMatrix::identity(n, n) * xi).collect(),
        s: dims.iter().map(|&n| DMatrix::identity(n, n) * eta).collect(),
        y: DVector::zeros(op.m()),
        u: DVector::zeros(nf),
    };

    let mut diagnostics = None;
    let mut iter = 0;
    let mut prev_steps = (1.0_f64, 1.0_f64);
    loop {
        // Residuals and objectives.
        let ax = op.apply(&st.x) + &op.free * &st.u;
        let rp = &op.b - &ax;
        let aty = op.adjoint(&st.y);
        let rd: Vec<DMatrix<f64>> = (0..dims.len()).map(|k| &c[k] - &aty[k] - &st.s[k]).collect();
        let rf = &cf - op.free.transpose() * &st.y;
        let pobj = prob.objective_value(&st.x, st.u.as_slice());
        let dobj = op.b.dot(&st.y);
        let xs: f64 = st.x.iter().zip(&st.s).map(|(x, s)| inner(x, s)).sum();
        let mu = xs / n_tot;
        let pres = rp.norm() / norm_b;
        let dres =
            (rd.iter().map(|m| m.norm_squared()).sum::<f64>() + rf.norm_squared()).sqrt() / norm_c;
        let denom = 1.0 + pobj.abs() + dobj.abs();
        let gap = (pobj - dobj).abs() / denom;
        let rel_compl = xs / denom;

        let finish = |status: SdpStatus, st: &State, y: DVector<f64>, diag: Option<String>| SdpSolution {
            status,
            x: st.x.clone(),
            y,
            s: st.s.clone(),
            free: st.u.clone(),
            primal_objective: pobj,
            dual_objective: dobj,
            gap,
            primal_residual: pres,
            dual_residual: dres,
            complementarity: mu,
            iterations: iter,
            diagnostics: diag,
        };

        if pres <= settings.tol && dres <= settings.tol && gap <= settings.tol && rel_compl <= settings.tol {
            return Ok(finish(SdpStatus::Optimal, &st, expand_y(&st.y), None));
        }
        if dobj > settings.infeasibility_bound && pres > settings.tol {
            let ray = expand_y(&(&st.y / dobj));
            return Ok(finish(
                SdpStatus::PrimalInfeasible,
                &st,
                ray,
                Some(format!("dual objective {dobj:.3e} exceeded bound")),
            ));
        }
        if -pobj > settings.infeasibility_bound && dres > settings.tol {
            return Ok(finish(
                SdpStatus::DualInfeasible,
                &st,
                expand_y(&st.y),
                Some(format!("primal objective {pobj:.3e} exceeded bound")),
            ));
        }
        if iter >= settings.max_iter || diagnostics.is_some() {
            let diag = diagnostics.take().or_else(|| Some("iteration limit reached".into()));
            return Ok(finish(SdpStatus::MaxIter, &st, expand_y(&st.y), diag));
        }

        // NT scaling.
        let scal: Option<Vec<Scaling>> = st.x.iter().zip(&st.s).map(|(x, s)| nt_scaling(x, s)).collect();
        let Some(scal) = scal else {
            diagnostics = Some(format!("numerical breakdown in scaling at iteration {iter}"));
            continue;
        };
        let Some(kkt) = Kkt::factor(&op, &scal) else {
            diagnostics = Some(format!("singular Schur complement at iteration {iter}"));
            continue;
        };

        // Predictor.
        let rc_aff: Vec<DMatrix<f64>> = scal
            .iter()
            .map(|sc| DMatrix::from_diagonal(&sc.d.map(|di| -di * di)))
            .collect();
        let Some(aff) = direction(&op, &scal, &kkt, &rp, &rd, &rf, &rc_aff) else {
            diagnostics = Some(format!("failed to solve predictor system at iteration {iter}"));
            continue;
        };
        let (ap_aff, ad_aff) = match step_lengths(&st, &aff) {
            Some(a) => a,
            None => {
                diagnostics = Some(format!("step length failure at iteration {iter}"));
                continue;
            }
        };
        let ap_aff = ap_aff.min(1.0);
        let ad_aff = ad_aff.min(1.0);
        let mut xs_aff = 0.0;
        for k in 0..dims.len() {
            let xk = &st.x[k] + &aff.dx[k] * ap_aff;
            let sk = &st.s[k] + &aff.ds[k] * ad_aff;
            xs_aff += inner(&xk, &sk);
        }
        let mu_aff = xs_aff / n_tot;
        let sigma = if mu > 0.0 { (mu_aff / mu).max(0.0).powi(3).min(1.0) } else { 0.0 };

        // Corrector.
        let rc: Vec<DMatrix<f64>> = scal
            .iter()
            .enumerate()
            .map(|(k, sc)| {
                let dxt = &sc.g_inv * &aff.dx[k] * sc.g_inv.transpose();
                let dst = sc.g.transpose() * &aff.ds[k] * &sc.g;
                let prod = &dxt * &dst;
                let mut r = -(&prod + prod.transpose()) * 0.5;
                for i in 0..sc.d.len() {
                    r[(i, i)] += sigma * mu - sc.d[i] * sc.d[i];
                }
                r
            })
            .collect();
        let Some(dir) = direction(&op, &scal, &kkt, &rp, &rd, &rf, &rc) else {
            diagnostics = Some(format!("failed to solve corrector system at iteration {iter}"));
            continue;
        };
        let Some((ap_max, ad_max)) = step_lengths(&st, &dir) else {
            diagnostics = Some(format!("step length failure at iteration {iter}"));
            continue;
        };
        let gamma = 0.9 + 0.09 * prev_steps.0.min(prev_steps.1);
        let ap = (gamma * ap_max).min(1.0);
        let ad = (gamma * ad_max).min(1.0);
        prev_steps = (ap, ad);

        for k in 0..dims.len() {
            st.x[k] += &dir.dx[k] * ap;
            symmetrize(&mut st.x[k]);
            st.s[k] += &dir.ds[k] * ad;
            symmetrize(&mut st.s[k]);
        }
        st.u += &dir.du * ap;
        st.y += &dir.dy * ad;
        iter += 1;

        if ap < 1e-10 && ad < 1e-10 {
            diagnostics = Some(format!("step lengths underflowed at iteration {iter}"));
        }
    }
}

fn direction(
    op: &Operator,
    scal: &[Scaling],
    kkt: &Kkt,
    rp: &DVector<f64>,
    rd: &[DMatrix<f64>],
    rf: &DVector<f64>,
    rc: &[DMatrix<f64>],
) -> Option<Direction> {
    let nb = scal.len();
    let m = op.m();
    let nf = op.free.ncols();
    let mut gtg = Vec::with_capacity(nb);
    let mut wrw = Vec::with_capacity(nb);
    for k in 0..nb {
        let sc = &scal[k];
        let n = sc.d.len();
        let mut t = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                t[(i, j)] = 2.0 * rc[k][(i, j)] / (sc.d[i] + sc.d[j]);
            }
        }
        gtg.push(&sc.g * t * sc.g.transpose());
        wrw.push(&sc.w * &rd[k] * &sc.w);
    }
    let h = rp - op.apply(&gtg) + op.apply(&wrw);
    let mut rhs = DVector::zeros(m + nf);
    rhs.rows_mut(0, m).copy_from(&h);
    if nf > 0 {
        rhs.rows_mut(m, nf).copy_from(rf);
    }
    // nalgebra's LU cannot solve an empty system.
    let sol = if m + nf == 0 { rhs } else { kkt.lu.solve(&rhs)? };
    if sol.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let dy = sol.rows(0, m).into_owned();
    let du = sol.rows(m, nf).into_owned();
    let aty = op.adjoint(&dy);
    let mut ds = Vec::with_capacity(nb);
    let mut dx = Vec::with_capacity(nb);
    for k in 0..nb {
        let dsk = &rd[k] - &aty[k];
        let mut dxk = &gtg[k] - &scal[k].w * &dsk * &scal[k].w;
        symmetrize(&mut dxk);
        ds.push(dsk);
        dx.push(dxk);
    }
    Some(Direction { dx, dy, du, ds })
}

fn step_lengths(st: &State, dir: &Direction) -> Option<(f64, f64)> {
    let mut ap = f64::INFINITY;
    let mut ad = f64::INFINITY;
    for k in 0..st.x.len() {
        ap = ap.min(max_step(&st.x[k], &dir.dx[k])?);
        ad = ad.min(max_step(&st.s[k], &dir.ds[k])?);
    }
    Some((ap, ad))
}

struct Presolve {
    active: Vec<usize>,
    inconsistent_ray: Option<DVector<f64>>,
}

/// Drops linearly dependent constraint rows (modified Gram-Schmidt on the
/// vectorized constraint data), tracking right-hand sides so that an
/// inconsistent dependent row yields an infeasibility ray.
fn presolve(prob: &SdpProblem) -> Presolve {
    let dims = &prob.block_dims;
    let mut offsets = Vec::with_capacity(dims.len());
    let mut len = 0usize;
    for &n in dims {
        offsets.push(len);
        len += n * (n + 1) / 2;
    }
    let free_off = len;
    len += prob.n_free();
    let m = prob.n_constraints();
    let sqrt2 = std::f64::consts::SQRT_2;

    let row_vec = |i: usize| -> DVector<f64> {
        let mut v = DVector::zeros(len);
        for e in &prob.constraints[i].entries {
            let n = dims[e.block];
            let (r, c) = (e.row, e.col);
            // Upper-triangle packed index.
            let idx = offsets[e.block] + r * n - r * (r + 1) / 2 + c;
            v[idx] += if r == c { e.value } else { sqrt2 * e.value };
        }
        for &(j, f) in &prob.constraints[i].free {
            v[free_off + j] += f;
        }
        v
    };

    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut basis_rhs: Vec<f64> = Vec::new();
    // Each basis vector as a combination of original rows.
    let mut basis_comb: Vec<DVector<f64>> = Vec::new();
    let mut active = Vec::new();
    for i in 0..m {
        let a = row_vec(i);
        let a_norm = a.norm();
        let mut r = a.clone();
        let mut rb = prob.constraints[i].rhs;
        let mut comb = DVector::zeros(m);
        comb[i] = 1.0;
        for _pass in 0..2 {
            for (j, q) in basis.iter().enumerate() {
                let coef = r.dot(q);
                if coef != 0.0 {
                    r.axpy(-coef, q, 1.0);
                    rb -= coef * basis_rhs[j];
                    comb.axpy(-coef, &basis_comb[j], 1.0);
                }
            }
        }
        let r_norm = r.norm();
        if a_norm > 0.0 && r_norm > 1e-10 * a_norm {
            basis.push(r / r_norm);
            basis_rhs.push(rb / r_norm);
            basis_comb.push(comb / r_norm);
            active.push(i);
        } else {
            let scale = 1.0 + prob.constraints[i].rhs.abs();
            if rb.abs() > 1e-8 * scale {
                return Presolve {
                    active,
                    inconsistent_ray: Some(comb / rb),
                };
            }
        }
    }
    Presolve {
        active,
        inconsistent_ray: None,
    }
}
