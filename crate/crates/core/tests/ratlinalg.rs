use buckingham_core::rational::{int, ratio, to_f64};
use buckingham_core::{min_norm_solve, RatMatrix, Rational};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn matrix() -> impl Strategy<Value = RatMatrix> {
    (1usize..=5, 1usize..=6).prop_flat_map(|(m, n)| {
        prop::collection::vec(prop::collection::vec(-3i64..=3, n), m)
            .prop_map(|rows| RatMatrix::from_i64_rows(&rows).unwrap())
    })
}

fn matrix_and_rhs() -> impl Strategy<Value = (RatMatrix, Vec<Rational>)> {
    matrix().prop_flat_map(|a| {
        let m = a.rows();
        (Just(a), prop::collection::vec((-6i64..=6, 1i64..=3).prop_map(|(p, q)| ratio(p, q)), m))
    })
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #[test]
    fn exact_pinv_satisfies_penrose(a in matrix()) {
        let p = a.pinv();
        let ap = a.mul(&p).unwrap();
        let pa = p.mul(&a).unwrap();
        prop_assert_eq!(ap.mul(&a).unwrap(), a.clone());
        prop_assert_eq!(pa.mul(&p).unwrap(), p.clone());
        prop_assert_eq!(ap.transpose(), ap);
        prop_assert_eq!(pa.transpose(), pa);
    }

    #[test]
    fn real_pinv_matches_exact(a in matrix()) {
        let exact = a.pinv().to_real();
        let real = a.to_real().pinv(None).unwrap();
        prop_assert!(real.max_abs_diff(&exact) <= 1e-9 * (1.0 + exact.inf_norm()));
    }

    #[test]
    fn kernel_is_canonical(a in matrix()) {
        let ker = a.kernel_basis();
        prop_assert_eq!(ker.len(), a.cols() - a.rank());
        for v in &ker {
            prop_assert!(a.mul_vec(v).unwrap().iter().all(Zero::is_zero));
            prop_assert!(v.iter().all(|x| x.is_integer()));
            let first = v.iter().find(|x| !x.is_zero()).unwrap();
            prop_assert!(first.is_positive());
            let g = v.iter().fold(num_bigint::BigInt::zero(), |g, x| num_integer::Integer::gcd(&g, x.numer()));
            prop_assert!(g.is_one());
        }
        if !ker.is_empty() {
            let k = RatMatrix::from_columns(a.cols(), &ker).unwrap();
            prop_assert_eq!(k.rank(), ker.len());
        }
    }

    #[test]
    fn min_norm_solution_is_orthogonal_and_minimal((a, b) in matrix_and_rhs()) {
        let sol = min_norm_solve(&a, &b).unwrap();
        let y = &sol.y;
        // A y is the orthogonal projection of b onto range(A)
        let r: Vec<Rational> = a.mul_vec(y).unwrap().iter().zip(&b).map(|(p, q)| p - q).collect();
        for j in 0..a.cols() {
            prop_assert!(dot(&a.column(j), &r).is_zero());
        }
        let ker = a.kernel_basis();
        for z in &ker {
            prop_assert!(dot(y, z).is_zero());
            let shifted: Vec<Rational> = y.iter().zip(z).map(|(p, q)| p + q).collect();
            prop_assert!(dot(&shifted, &shifted) > dot(y, y));
        }
        let delta = r.iter().map(|x| x.abs()).max().unwrap_or_else(Rational::zero);
        prop_assert_eq!(sol.is_exact(), delta.is_zero());
        prop_assert!((sol.residual_f64() - to_f64(&delta)).abs() <= 1e-12);
    }

    #[test]
    fn consistent_systems_are_solved_exactly(a in matrix(), seed in prop::collection::vec(-4i64..=4, 6)) {
        let x: Vec<Rational> = (0..a.cols()).map(|j| int(seed[j])).collect();
        let b = a.mul_vec(&x).unwrap();
        let sol = min_norm_solve(&a, &b).unwrap();
        prop_assert!(sol.is_exact());
        prop_assert_eq!(a.mul_vec(&sol.y).unwrap(), b);
        prop_assert!(dot(&sol.y, &sol.y) <= dot(&x, &x));
    }
}
