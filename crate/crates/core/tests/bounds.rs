mod common;

use buckingham_core::bounds::epsilon_for_tau;
use buckingham_core::rational::to_f64;
use buckingham_core::{
    bound_theorem1, bound_theorem2, estimate_epsilon, make_perturbed, verify_bound, RealMatrix,
};
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn args() -> impl Strategy<Value = (f64, f64, f64, usize, usize, f64, f64, f64)> {
    (0.0f64..0.5, 0.0f64..0.1, 1.01f64..4.0, 1usize..=4, 1usize..=6, 0.0f64..3.0, 1.0f64..5.0, 0.0f64..2.0)
}

proptest! {
    #[test]
    fn bounds_are_monotone((eps, delta, k, m, n, d, mm, xd) in args(), bump in 0.001f64..0.5) {
        let t1 = |e: f64, dl: f64, k: f64| bound_theorem1(e, dl, k, m, d).unwrap();
        let t2 = |e: f64, dl: f64, k: f64| bound_theorem2(e, dl, k, m, n, d, mm, xd).unwrap();
        let base1 = t1(eps, delta, k);
        let base2 = t2(eps, delta, k);
        prop_assert!(base1 >= eps - 1e-15 && base2 >= base1 - 1e-15);
        prop_assert!(t1(eps + bump, delta, k) >= base1);
        prop_assert!(t1(eps, delta + bump, k) >= base1);
        prop_assert!(t1(eps, delta, k + bump) >= base1);
        prop_assert!(t2(eps + bump, delta, k) >= base2);
        prop_assert!(t2(eps, delta + bump, k) >= base2);
        prop_assert!(t2(eps, delta, k + bump) >= base2);
    }

    #[test]
    fn classical_limit((_, _, k, m, n, d, mm, xd) in args()) {
        prop_assert_eq!(bound_theorem1(0.0, 0.0, k, m, d).unwrap(), 0.0);
        prop_assert_eq!(bound_theorem2(0.0, 0.0, k, m, n, d, mm, xd).unwrap(), 0.0);
    }

    #[test]
    fn invalid_arguments_are_rejected(k in -2.0f64..=1.0) {
        prop_assert!(bound_theorem1(0.1, 0.0, k, 1, 1.0).is_err());
        prop_assert!(bound_theorem1(-0.1, 0.0, 2.0, 1, 1.0).is_err());
        prop_assert!(bound_theorem1(0.1, -0.1, 2.0, 1, 1.0).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn no_violations_on_random_problems(seed in any::<u64>(), ki in 0usize..3) {
        let k = [1.5, 2.0, 3.0][ki];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rp = random_problem(&mut rng, RankKind::Any);
        let dec = rp.problem.decompose().unwrap();
        let tau = rng.random_range(0.0..0.2);
        let y0: Vec<f64> = rp.y0.iter().map(to_f64).collect();
        let f = make_perturbed(y0, tau, seed).unwrap();
        let mut e: Vec<f64> = (0..dec.n()).map(|_| rng.random_range(-0.02..=0.02)).collect();
        let rows: Vec<Vec<f64>> = rp.a.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
        let shift = RealMatrix::from_rows(&rows).unwrap().mul_vec(&e).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if shift > 0.02 {
            e.iter_mut().for_each(|x| *x *= 0.02 / shift);
        }
        let y: Vec<f64> = dec.y.iter().zip(&e).map(|(a, b)| a + b).collect();
        let dec = dec.with_exponents(y).unwrap();
        prop_assert!(dec.delta <= 0.02 + 1e-12);
        let r = verify_bound(&dec, &f, k, epsilon_for_tau(tau), 200, seed).unwrap();
        prop_assert_eq!(r.violations, 0, "{:?}", r);
    }

    #[test]
    fn estimate_is_monotone_in_samples(seed in any::<u64>(), tau in 0.0f64..0.3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rp = random_problem(&mut rng, RankKind::Any);
        let y0: Vec<f64> = rp.y0.iter().map(to_f64).collect();
        let f = make_perturbed(y0, tau, seed).unwrap();
        let a = rp.problem.build_matrix();
        let beta = rp.problem.beta();
        let mut last = 0.0;
        for samples in [1, 10, 65, 200, 500] {
            let est = estimate_epsilon(&f, &a, &beta, 2.0, 2.0, samples, seed).unwrap();
            prop_assert!(est.eps_hat >= last);
            prop_assert!(est.eps_hat <= epsilon_for_tau(tau) * (1.0 + 1e-12) + 1e-15);
            last = est.eps_hat;
        }
    }
}
