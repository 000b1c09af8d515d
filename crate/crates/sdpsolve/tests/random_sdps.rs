use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdpsolve::{solve, Constraint, SdpProblem, SdpSettings, SdpStatus};

fn random_pd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    &b * b.transpose() + DMatrix::identity(n, n) * 0.1
}

/// Problem with strictly feasible primal point `X0` and dual point `(y0, S0)`.
fn random_problem(seed: u64) -> SdpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nblocks = rng.gen_range(1..=3);
    let dims: Vec<usize> = (0..nblocks).map(|_| rng.gen_range(1..=5)).collect();
    let nfree = rng.gen_range(0..=2);
    let mut p = SdpProblem::new(dims.clone()).with_free_vars(nfree);
    let x0: Vec<DMatrix<f64>> = dims.iter().map(|&n| random_pd(&mut rng, n)).collect();
    let s0: Vec<DMatrix<f64>> = dims.iter().map(|&n| random_pd(&mut rng, n)).collect();
    let u0: Vec<f64> = (0..nfree).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let total: usize = dims.iter().map(|n| n * (n + 1) / 2).sum();
    let m = rng.gen_range(1..=total.min(12)) + nfree;
    let y0 = DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
    for _ in 0..m {
        let mut c = Constraint::new(0.0);
        for (k, &n) in dims.iter().enumerate() {
            for r in 0..n {
                for col in r..n {
                    if rng.gen_bool(0.5) {
                        c = c.entry(k, r, col, rng.gen_range(-1.0..1.0));
                    }
                }
            }
        }
        for j in 0..nfree {
            c = c.free_var(j, rng.gen_range(-1.0..1.0));
        }
        c.rhs = c.evaluate(&x0, &u0);
        p.add_constraint(c);
    }
    // C = A*(y0) + S0,  c_f = F' y0.
    p.objective.clone_from_slice(&s0);
    for (i, con) in p.constraints.clone().iter().enumerate() {
        for e in &con.entries {
            p.objective[e.block][(e.row, e.col)] += y0[i] * e.value;
            if e.row != e.col {
                p.objective[e.block][(e.col, e.row)] += y0[i] * e.value;
            }
        }
        for &(j, f) in &con.free {
            p.free_objective[j] += y0[i] * f;
        }
    }
    p
}

#[test]
fn random_feasible_problems_converge() {
    let settings = SdpSettings::default();
    for seed in 0..50 {
        let p = random_problem(seed);
        let sol = solve(&p, &settings).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal, "seed {seed}: {:?}", sol.diagnostics);
        assert!(sol.gap <= 1e-8, "seed {seed}: gap {}", sol.gap);
        assert!(sol.primal_residual <= 1e-8, "seed {seed}");
        assert!(sol.dual_residual <= 1e-8, "seed {seed}");
        for x in &sol.x {
            assert!(x.symmetric_eigenvalues().min() > -1e-8);
        }
    }
}

#[test]
fn repeated_solves_are_bitwise_identical() {
    let settings = SdpSettings::default();
    for seed in 0..5 {
        let p = random_problem(seed);
        let a = solve(&p, &settings).unwrap();
        let b = solve(&p, &settings).unwrap();
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.y, b.y);
        assert_eq!(a.x, b.x);
    }
}

#[test]
fn unbounded_primal_is_dual_infeasible() {
    // min -x0 s.t. x0 - x1 = 0 (both scalars >= 0): unbounded below.
    let mut p = SdpProblem::new(vec![1, 1]);
    p.set_objective_entry(0, 0, 0, -1.0);
    p.add_constraint(Constraint::new(0.0).entry(0, 0, 0, 1.0).entry(1, 0, 0, -1.0));
    let sol = solve(&p, &SdpSettings::default()).unwrap();
    assert_eq!(sol.status, SdpStatus::DualInfeasible);
}

#[test]
fn psd_infeasibility_ray() {
    // [[x, 1], [1, x]] >= 0 with x = 0.5 is infeasible (off-diagonal entries count twice).
    let mut p = SdpProblem::new(vec![2]);
    p.add_constraint(Constraint::new(0.5).entry(0, 0, 0, 1.0));
    p.add_constraint(Constraint::new(0.5).entry(0, 1, 1, 1.0));
    p.add_constraint(Constraint::new(2.0).entry(0, 0, 1, 1.0));
    let sol = solve(&p, &SdpSettings::default()).unwrap();
    assert_eq!(sol.status, SdpStatus::PrimalInfeasible);
    // A*(y) must be negative semidefinite with b'y = 1.
    let y = &sol.y;
    let aty = DMatrix::from_row_slice(2, 2, &[y[0], y[2], y[2], y[1]]);
    assert!(aty.symmetric_eigenvalues().max() < 1e-6);
    assert!((0.5 * y[0] + 0.5 * y[1] + 2.0 * y[2] - 1.0).abs() < 1e-9);
}

#[test]
fn problem_without_effective_constraints() {
    // The only constraint is 0 = 0 and gets dropped, leaving an empty KKT system.
    let mut p = SdpProblem::new(vec![2]);
    p.objective[0] = DMatrix::identity(2, 2);
    p.add_constraint(Constraint::new(0.0));
    let sol = solve(&p, &SdpSettings::default()).unwrap();
    assert_eq!(sol.status, SdpStatus::Optimal, "{:?}", sol.diagnostics);
    assert!(sol.primal_objective.abs() < 1e-8);
}
