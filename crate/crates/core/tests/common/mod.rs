#![allow(dead_code)]

use buckingham_core::rational::{int, ratio};
use buckingham_core::{Basis, Dimension, DimensionProblem, RatMatrix, Rational, Variable};
use rand::Rng;

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankKind {
    Any,
    Full,
    Deficient,
}

/// A random problem together with an exact solution `y0` of `A y0 = β`.
pub struct RandomProblem {
    pub problem: DimensionProblem,
    pub a: Vec<Vec<i64>>,
    pub y0: Vec<Rational>,
}

pub fn basis(m: usize) -> Basis {
    Basis::new((0..m).map(|i| format!("b{i}"))).unwrap()
}

pub fn int_matrix<R: Rng>(rng: &mut R, m: usize, n: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    (0..m).map(|_| (0..n).map(|_| rng.random_range(lo..=hi)).collect()).collect()
}

/// `m ≤ 4`, `n ≤ 6`, entries in `−3..3`, `β = A y0` for a random half-integer `y0`.
pub fn random_problem<R: Rng>(rng: &mut R, kind: RankKind) -> RandomProblem {
    loop {
        let m = rng.random_range(1..=4);
        let n = match kind {
            RankKind::Full => rng.random_range(1..=m),
            _ => rng.random_range(1..=6),
        };
        let a = int_matrix(rng, m, n, -3, 3);
        let rm = RatMatrix::from_i64_rows(&a).unwrap();
        let r = rm.rank();
        let ok = match kind {
            RankKind::Any => true,
            RankKind::Full => r == n,
            RankKind::Deficient => r < n,
        };
        if !ok {
            continue;
        }
        let y0: Vec<Rational> = (0..n).map(|_| ratio(rng.random_range(-4..=4), 2)).collect();
        let beta = rm.mul_vec(&y0).unwrap();
        let b = basis(m);
        let vars = (0..n)
            .map(|j| {
                let col = (0..m).map(|i| int(a[i][j])).collect();
                Variable::new(format!("p{}", j + 1), Dimension::new(&b, col).unwrap())
            })
            .collect();
        let target = Variable::new("q", Dimension::new(&b, beta).unwrap());
        return RandomProblem { problem: DimensionProblem::new(vars, target).unwrap(), a, y0 };
    }
}

pub fn log_uniform<R: Rng>(rng: &mut R, k: f64, len: usize) -> Vec<f64> {
    let l = k.ln();
    (0..len).map(|_| rng.random_range(-l..=l).exp()).collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// `Π v_j^{e_j}`, by direct powers rather than the library's log-space form.
pub fn power_product(v: &[f64], e: &[f64]) -> f64 {
    v.iter().zip(e).map(|(x, p)| x.powf(*p)).product()
}
