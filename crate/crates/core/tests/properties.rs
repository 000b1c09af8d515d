use nalgebra::DMatrix;
use proptest::prelude::*;
use soscore::grambasis::{rational_psd_check, PsdVerdict, RationalMatrix};
use soscore::polycore::rational::{int, rat, to_f64};
use soscore::polycore::{default_names, parse_polynomial, Monomial, Polynomial, Rational};

const N: usize = 3;

fn rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| rat(n, d))
}

fn monomial(max_exp: u32) -> impl Strategy<Value = Monomial> {
    proptest::collection::vec(0..=max_exp, N).prop_map(Monomial::new)
}

fn polynomial() -> impl Strategy<Value = Polynomial> {
    proptest::collection::vec((monomial(3), rational()), 0..6).prop_map(|terms| Polynomial::from_terms(N, terms))
}

fn form(deg: u32) -> impl Strategy<Value = Polynomial> {
    proptest::collection::vec((proptest::collection::vec(0..=deg, N - 1), rational()), 1..6).prop_map(move |terms| {
        let mut p = Polynomial::zero(N);
        for (mut e, c) in terms {
            let used: u32 = e.iter().sum();
            if used > deg {
                continue;
            }
            e.push(deg - used);
            p.add_term(Monomial::new(e), c);
        }
        p
    })
}

fn point() -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::vec(rational(), N)
}

proptest! {
    #[test]
    fn ring_axioms(p in polynomial(), q in polynomial(), r in polynomial()) {
        prop_assert_eq!(&p + &q, &q + &p);
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert_eq!(&(&p + &q) + &r, &p + &(&q + &r));
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert!((&p - &p).is_zero());
        prop_assert_eq!(&p * &Polynomial::one(N), p.clone());
        prop_assert_eq!(&p + &(-&p), Polynomial::zero(N));
    }

    #[test]
    fn mixed_partials_commute(p in polynomial(), i in 0..N, j in 0..N) {
        let a = p.differentiate(i).unwrap().differentiate(j).unwrap();
        let b = p.differentiate(j).unwrap().differentiate(i).unwrap();
        prop_assert_eq!(a, b);
        let h = p.hessian();
        prop_assert!(h.is_symmetric());
    }

    #[test]
    fn euler_identity(p in (1u32..6).prop_flat_map(form)) {
        prop_assume!(!p.is_zero());
        let deg = p.degree().unwrap();
        let mut lhs = Polynomial::zero(N);
        for i in 0..N {
            lhs = &lhs + &(&Polynomial::var(N, i) * &p.differentiate(i).unwrap());
        }
        prop_assert_eq!(lhs, p.scale(&int(deg as i64)));
    }

    #[test]
    fn homogenize_round_trip(p in polynomial()) {
        prop_assume!(!p.is_zero());
        let h = p.homogenize().unwrap();
        prop_assert!(h.is_form());
        prop_assert_eq!(h.degree(), p.degree());
        prop_assert_eq!(h.dehomogenize(N, &int(1)).unwrap(), p);
    }

    #[test]
    fn evaluation_is_a_ring_homomorphism(p in polynomial(), q in polynomial(), x in point()) {
        let pv = p.evaluate(&x).unwrap();
        let qv = q.evaluate(&x).unwrap();
        prop_assert_eq!((&p + &q).evaluate(&x).unwrap(), &pv + &qv);
        prop_assert_eq!((&p * &q).evaluate(&x).unwrap(), &pv * &qv);
    }

    #[test]
    fn parse_format_round_trip(p in polynomial()) {
        let names = default_names(N);
        let text = p.format_with(&names);
        prop_assert_eq!(parse_polynomial(&text, &names).unwrap(), p);
    }

    #[test]
    fn ldl_agrees_with_eigenvalues(
        n in 1usize..6,
        entries in proptest::collection::vec(-4i64..=4, 36),
        shift in -3i64..=3,
    ) {
        let q: RationalMatrix = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let v = entries[i.min(j) * 6 + i.max(j)];
                        if i == j { int(v + shift) } else { int(v) }
                    })
                    .collect()
            })
            .collect();
        let f = DMatrix::from_fn(n, n, |i, j| to_f64(&q[i][j]));
        let eig = f.symmetric_eigenvalues();
        let lo = eig.min();
        let res = rational_psd_check(&q).unwrap();
        // A nonzero eigenvalue of a small integer matrix is far above 1e-9
        // (|det| >= 1 over a bounded spectrum), so the float oracle is decisive.
        if lo < -1e-9 {
            prop_assert!(!res.verdict.is_psd());
        } else if lo > 1e-9 {
            prop_assert_eq!(res.verdict, PsdVerdict::PositiveDefinite);
            prop_assert_eq!(res.rank, n);
        } else {
            prop_assert_eq!(res.verdict, PsdVerdict::PositiveSemidefinite);
        }
    }

    #[test]
    fn gram_products_are_psd(n in 1usize..5, k in 1usize..4, entries in proptest::collection::vec(-3i64..=3, 20)) {
        // B B' has rank at most k.
        let b = |i: usize, j: usize| int(entries[i * 4 + j]);
        let q: RationalMatrix = (0..n)
            .map(|i| (0..n).map(|j| (0..k).map(|l| b(i, l) * b(j, l)).sum()).collect())
            .collect();
        let res = rational_psd_check(&q).unwrap();
        prop_assert!(res.verdict.is_psd());
        prop_assert!(res.rank <= k.min(n));
    }
}
