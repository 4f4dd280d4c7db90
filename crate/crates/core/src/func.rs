use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type Inner = dyn Fn(&[f64]) -> Result<f64> + Send + Sync;

/// A shareable scalar function of a fixed number of positive reals.
///
/// Candidate functions `F`, reconstructed `G` and perturbation fields all
/// travel as `ScalarFn`, so they can be composed and evaluated from several
/// threads.
#[derive(Clone)]
pub struct ScalarFn {
    arity: usize,
    f: Arc<Inner>,
}

impl ScalarFn {
    pub fn new<F>(arity: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    {
        Self { arity, f: Arc::new(f) }
    }

    pub fn infallible<F>(arity: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::new(arity, move |v| Ok(f(v)))
    }

    /// `v ↦ v^y`.
    pub fn monomial(exponents: Vec<f64>) -> Self {
        Self::infallible(exponents.len(), move |v| monomial(v, &exponents))
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn call(&self, v: &[f64]) -> Result<f64> {
        if v.len() != self.arity {
            return Err(Error::Arity { expected: self.arity, got: v.len() });
        }
        (self.f)(v)
    }

    /// Pointwise product `v ↦ self(v) · other(v)`.
    pub fn times(&self, other: &ScalarFn) -> Result<ScalarFn> {
        if self.arity != other.arity {
            return Err(Error::Arity { expected: self.arity, got: other.arity });
        }
        let (a, b) = (self.clone(), other.clone());
        Ok(ScalarFn::new(self.arity, move |v| Ok(a.call(v)? * b.call(v)?)))
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFn").field("arity", &self.arity).finish_non_exhaustive()
    }
}

/// `Π v_j^{y_j}`, evaluated in log space.
pub fn monomial(v: &[f64], exponents: &[f64]) -> f64 {
    v.iter().zip(exponents).filter(|(_, &y)| y != 0.0).map(|(&x, &y)| y * x.ln()).sum::<f64>().exp()
}
