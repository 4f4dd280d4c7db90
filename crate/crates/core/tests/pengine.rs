mod common;

use buckingham_core::rational::to_f64;
use buckingham_core::{estimate_epsilon, ScalarFn};
use common::*;
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pi_groups_are_dimensionless_and_span_the_kernel(seed in any::<u64>()) {
        let rp = random_problem(&mut ChaCha8Rng::seed_from_u64(seed), RankKind::Any);
        let dec = rp.problem.decompose().unwrap();
        prop_assert_eq!(dec.k, dec.n() - dec.rank);
        prop_assert_eq!(dec.x.rows(), dec.k);
        for s in 0..dec.k {
            prop_assert!(dec.a.mul_vec(dec.x.row(s)).unwrap().iter().all(Zero::is_zero));
            prop_assert_eq!(&dec.pi_groups[s].exponents[..], dec.x.row(s));
        }
        if dec.k > 0 {
            prop_assert_eq!(dec.x.rank(), dec.k);
        }
    }

    #[test]
    fn consistent_targets_are_matched_exactly(seed in any::<u64>()) {
        let rp = random_problem(&mut ChaCha8Rng::seed_from_u64(seed), RankKind::Any);
        let dec = rp.problem.decompose().unwrap();
        prop_assert!(dec.is_exact());
        prop_assert_eq!(dec.delta, 0.0);
        let y = dec.y_exact.clone().unwrap();
        prop_assert_eq!(dec.a.mul_vec(&y).unwrap(), dec.beta.clone());
    }

    #[test]
    fn pi_values_are_scale_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rp = random_problem(&mut rng, RankKind::Deficient);
        let dec = rp.problem.decompose().unwrap();
        let v = log_uniform(&mut rng, 3.0, dec.n());
        let c = log_uniform(&mut rng, 3.0, dec.m());
        let ar = dec.a.to_real();
        let logc: Vec<f64> = c.iter().map(|x| x.ln()).collect();
        let scaled: Vec<f64> = (0..dec.n())
            .map(|j| v[j] * (0..dec.m()).map(|r| ar.get(r, j) * logc[r]).sum::<f64>().exp())
            .collect();
        let before = dec.log_pi_values(&v).unwrap();
        let after = dec.log_pi_values(&scaled).unwrap();
        for (a, b) in before.iter().zip(&after) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }

    /// Any `G0(π(v)) v^y` commutes with rescaling, so its sampled defect vanishes.
    #[test]
    fn templates_are_consistent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rp = random_problem(&mut rng, RankKind::Deficient);
        let dec = rp.problem.decompose().unwrap();
        let coef: Vec<f64> = (0..dec.k).map(|_| rng.random_range(-0.5..0.5)).collect();
        let xs: Vec<Vec<f64>> = (0..dec.k).map(|s| dec.x.row(s).iter().map(to_f64).collect()).collect();
        let y = dec.y.clone();
        let f = ScalarFn::infallible(dec.n(), move |v| {
            let t: f64 = xs
                .iter()
                .zip(&coef)
                .map(|(x, a)| a * x.iter().zip(v).map(|(e, vj)| e * vj.ln()).sum::<f64>())
                .sum();
            let logv: f64 = y.iter().zip(v).map(|(e, vj)| e * vj.ln()).sum();
            (1.5 + t.tanh()) * logv.exp()
        });
        let est = estimate_epsilon(&f, &dec.a, &dec.beta, 2.0, 2.0, 300, seed).unwrap();
        prop_assert!(est.eps_hat <= 1e-10, "eps_hat {}", est.eps_hat);
    }

    /// A perturbed law whose exponents are not a solution of `A y = β` is
    /// detected: its defect exceeds any sampling noise.
    #[test]
    fn inconsistent_laws_have_positive_defect(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rp = random_problem(&mut rng, RankKind::Any);
        let dec = rp.problem.decompose().unwrap();
        let ar = dec.a.to_real();
        let j = (0..dec.n()).find(|&j| (0..dec.m()).any(|i| ar.get(i, j) != 0.0));
        prop_assume!(j.is_some());
        let mut y = dec.y.clone();
        y[j.unwrap()] += 0.5;
        let f = ScalarFn::monomial(y);
        let est = estimate_epsilon(&f, &dec.a, &dec.beta, 2.0, 2.0, 300, seed).unwrap();
        prop_assert!(est.eps_hat > 1e-3, "eps_hat {}", est.eps_hat);
    }
}
