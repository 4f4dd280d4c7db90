//! Scaling-defect estimation, the two error bounds, and perturbed test laws.
//!
//! For a law `F` of `n` positive arguments and a dimension matrix `A`, the
//! scaling defect is the smallest `ε` with
//! `|F(v ∘ c^A) − F(v) c^β| ≤ ε |F(v)| c^β` for all `v` and `c`. It is only
//! ever estimated from below here, by sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decompose::PiDecomposition;
use crate::error::{Error, Result};
use crate::func::{monomial, ScalarFn};
use crate::linalg::RatMatrix;
use crate::rational::{to_f64, Rational};

/// Every this many samples, `estimate_epsilon` evaluates at `v = (1, …, 1)`
/// instead of a random point, so isolated defects at the unit point are seen.
pub const ANCHOR_PERIOD: usize = 64;

/// Tolerance used by `verify_bound` in place of bounds smaller than this.
pub const MIN_TOLERANCE: f64 = 1e-9;

/// Log-uniform sampling on `[1/k, k]^len`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplingBox {
    pub radius: f64,
}

impl SamplingBox {
    pub fn new(radius: f64) -> Result<Self> {
        if radius.is_finite() && radius > 1.0 {
            Ok(Self { radius })
        } else {
            Err(Error::InvalidArgument(format!("box radius {radius} must be > 1")))
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R, len: usize) -> Vec<f64> {
        let l = self.radius.ln();
        (0..len).map(|_| rng.random_range(-l..=l).exp()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonEstimate {
    /// Largest sampled defect; `f64::INFINITY` when `F(v) = 0` but
    /// `F(v ∘ c^A) ≠ 0` somewhere.
    pub eps_hat: f64,
    pub samples: usize,
    pub k_v: f64,
    pub l_c: f64,
    /// `(v, c)` attaining `eps_hat`.
    pub worst_case: Option<(Vec<f64>, Vec<f64>)>,
}

/// Samples `v ∈ [1/k_v, k_v]^n` and `c ∈ [1/l_c, l_c]^m` log-uniformly and
/// returns the largest relative defect seen. The sequence of samples depends
/// only on `seed`, so a larger `samples` extends a smaller run and the
/// estimate never decreases.
pub fn estimate_epsilon(
    f: &ScalarFn,
    a: &RatMatrix,
    beta: &[Rational],
    k_v: f64,
    l_c: f64,
    samples: usize,
    seed: u64,
) -> Result<EpsilonEstimate> {
    let (m, n) = (a.rows(), a.cols());
    if beta.len() != m {
        return Err(Error::LengthMismatch { expected: m, got: beta.len() });
    }
    if f.arity() != n {
        return Err(Error::Arity { expected: n, got: f.arity() });
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be >= 1".into()));
    }
    let vbox = SamplingBox::new(k_v)?;
    let cbox = SamplingBox::new(l_c)?;
    let ar = a.to_real();
    let beta: Vec<f64> = beta.iter().map(to_f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut est = EpsilonEstimate { eps_hat: 0.0, samples, k_v, l_c, worst_case: None };
    for i in 0..samples {
        let v = vbox.sample(&mut rng, n);
        let c = cbox.sample(&mut rng, m);
        let v = if i % ANCHOR_PERIOD == 0 { vec![1.0; n] } else { v };
        let logc: Vec<f64> = c.iter().map(|x| x.ln()).collect();
        let scaled: Vec<f64> =
            (0..n).map(|j| v[j] * (0..m).map(|r| ar.get(r, j) * logc[r]).sum::<f64>().exp()).collect();
        let cb = monomial(&c, &beta);
        let fv = eval_at(f, &v)?;
        let fs = eval_at(f, &scaled)?;
        let ratio = if fv == 0.0 {
            if fs == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (fs - fv * cb).abs() / (fv.abs() * cb)
        };
        if ratio > est.eps_hat || (est.worst_case.is_none() && ratio >= est.eps_hat) {
            est.eps_hat = ratio;
            est.worst_case = Some((v, c));
        }
    }
    Ok(est)
}

fn eval_at(f: &ScalarFn, v: &[f64]) -> Result<f64> {
    let x = f.call(v).map_err(|e| Error::Evaluation { at: v.to_vec(), msg: e.to_string() })?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Evaluation { at: v.to_vec(), msg: format!("non-finite value {x}") })
    }
}

fn check_bound_args(eps: f64, delta: f64, k: f64) -> Result<()> {
    if !(k.is_finite() && k > 1.0) {
        return Err(Error::InvalidArgument(format!("K = {k} must be > 1")));
    }
    for (name, x) in [("epsilon", eps), ("delta", delta)] {
        if !(x.is_finite() && x >= 0.0) {
            return Err(Error::InvalidArgument(format!("{name} = {x} must be >= 0")));
        }
    }
    Ok(())
}

/// `(1+ε) K^{m δ ‖D‖} − 1`.
pub fn bound_theorem1(eps: f64, delta: f64, k: f64, m: usize, d_norm: f64) -> Result<f64> {
    check_bound_args(eps, delta, k)?;
    Ok((1.0 + eps) * k.powf(m as f64 * delta * d_norm) - 1.0)
}

/// `(1+ε) K^{m δ ‖D‖ (n M ‖X†‖ + 1)} − 1`.
#[allow(clippy::too_many_arguments)]
pub fn bound_theorem2(
    eps: f64,
    delta: f64,
    k: f64,
    m: usize,
    n: usize,
    d_norm: f64,
    m_max: f64,
    xdag_norm: f64,
) -> Result<f64> {
    check_bound_args(eps, delta, k)?;
    let spread = n as f64 * m_max * xdag_norm + 1.0;
    Ok((1.0 + eps) * k.powf(m as f64 * delta * d_norm * spread) - 1.0)
}

/// `(1+τ)/(1−τ) − 1`, the defect of any `H(v) v^y` with `H` in `[1−τ, 1+τ]`.
pub fn epsilon_for_tau(tau: f64) -> f64 {
    (1.0 + tau) / (1.0 - tau) - 1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Theorem {
    /// Full column rank: `F(v) ≈ C v^y`.
    FullRank,
    /// Rank deficient: `F(v) ≈ G(π(v)) v^y`.
    RankDeficient,
}

impl Theorem {
    pub fn number(self) -> u8 {
        match self {
            Theorem::FullRank => 1,
            Theorem::RankDeficient => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub theorem: Theorem,
    pub eps: f64,
    pub delta: f64,
    pub k: f64,
    pub m: usize,
    pub n: usize,
    pub d_norm: f64,
    pub m_max: f64,
    pub xdag_norm: f64,
    pub bound: f64,
}

impl PiDecomposition {
    /// Evaluates the bound that applies to this decomposition.
    pub fn bound(&self, eps: f64, k: f64) -> Result<BoundReport> {
        let (theorem, bound) = if self.k == 0 {
            (Theorem::FullRank, bound_theorem1(eps, self.delta, k, self.m(), self.d_norm)?)
        } else {
            let b = bound_theorem2(
                eps,
                self.delta,
                k,
                self.m(),
                self.n(),
                self.d_norm,
                self.m_max,
                self.xdag_norm,
            )?;
            (Theorem::RankDeficient, b)
        };
        Ok(BoundReport {
            theorem,
            eps,
            delta: self.delta,
            k,
            m: self.m(),
            n: self.n(),
            d_norm: self.d_norm,
            m_max: self.m_max,
            xdag_norm: self.xdag_norm,
            bound,
        })
    }

    pub fn estimate_epsilon(
        &self,
        f: &ScalarFn,
        k_v: f64,
        l_c: f64,
        samples: usize,
        seed: u64,
    ) -> Result<EpsilonEstimate> {
        estimate_epsilon(f, &self.a, &self.beta, k_v, l_c, samples, seed)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub bound: BoundReport,
    /// Relative tolerance actually enforced: the bound, or `MIN_TOLERANCE`
    /// when the bound is smaller.
    pub tolerance: f64,
    pub samples: usize,
    pub violations: usize,
    /// Largest `|F(v) − G(π(v)) v^y| / (|F(v)| · tolerance)`.
    pub max_ratio: f64,
    /// Largest `|F(v) − G(π(v)) v^y| / |F(v)|`.
    pub max_relative: f64,
    pub max_lhs: f64,
    pub worst_v: Option<Vec<f64>>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Samples `v ∈ [1/k, k]^n` and checks
/// `|F(v) − G(π(v)) v^y| ≤ |F(v)| · bound` with `G` reconstructed from `F`.
pub fn verify_bound(
    dec: &PiDecomposition,
    f: &ScalarFn,
    k: f64,
    eps: f64,
    trials: usize,
    seed: u64,
) -> Result<VerifyReport> {
    if f.arity() != dec.n() {
        return Err(Error::Arity { expected: dec.n(), got: f.arity() });
    }
    let bound = dec.bound(eps, k)?;
    let tolerance = bound.bound.max(MIN_TOLERANCE);
    let vbox = SamplingBox::new(k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = VerifyReport {
        bound,
        tolerance,
        samples: trials,
        violations: 0,
        max_ratio: 0.0,
        max_relative: 0.0,
        max_lhs: 0.0,
        worst_v: None,
    };
    for _ in 0..trials {
        let v = vbox.sample(&mut rng, dec.n());
        let fv = eval_at(f, &v)?;
        let approx =
            dec.approximation(f, &v).map_err(|e| Error::Evaluation { at: v.clone(), msg: e.to_string() })?;
        let lhs = (fv - approx).abs();
        let allowed = fv.abs() * tolerance;
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / allowed };
        // written so that a NaN residual counts as a violation
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(lhs <= allowed) {
            report.violations += 1;
        }
        if fv != 0.0 {
            report.max_relative = report.max_relative.max(lhs / fv.abs());
        }
        report.max_lhs = report.max_lhs.max(lhs);
        if ratio > report.max_ratio || report.worst_v.is_none() {
            report.max_ratio = report.max_ratio.max(ratio);
            report.worst_v = Some(v);
        }
    }
    Ok(report)
}

/// `F(v) = H(v) v^y` with `H` a seeded pseudo-random field in `[1−τ, 1+τ]`.
/// `H` hashes `v` rounded to six significant digits, so equal inputs give
/// equal outputs.
pub fn make_perturbed(y: Vec<f64>, tau: f64, seed: u64) -> Result<ScalarFn> {
    check_tau(tau)?;
    let n = y.len();
    Ok(ScalarFn::infallible(n, move |v| {
        let h = 1.0 + tau * (2.0 * unit_hash(v, seed) - 1.0);
        h * monomial(v, &y)
    }))
}

/// `F(v) = H(v) v^y` with `H(1, …, 1) = 1−τ` and `H = 1+τ` everywhere else.
pub fn two_valued_perturbation(y: Vec<f64>, tau: f64) -> Result<ScalarFn> {
    check_tau(tau)?;
    let n = y.len();
    Ok(ScalarFn::infallible(n, move |v| {
        let h = if v.iter().all(|&x| x == 1.0) { 1.0 - tau } else { 1.0 + tau };
        h * monomial(v, &y)
    }))
}

fn check_tau(tau: f64) -> Result<()> {
    if (0.0..1.0).contains(&tau) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tau = {tau} must lie in [0, 1)")))
    }
}

/// Maps `(round6(v), seed)` to `[0, 1)`.
fn unit_hash(v: &[f64], seed: u64) -> f64 {
    let mut h = splitmix64(seed ^ 0x6a09_e667_f3bc_c909);
    for &x in v {
        let q: f64 = format!("{x:.5e}").parse().unwrap_or(x);
        h = splitmix64(h ^ q.to_bits());
    }
    (h >> 11) as f64 / (1u64 << 53) as f64
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
