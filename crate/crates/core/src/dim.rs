//! Unit-free physical quantities.
//!
//! A quantity is an equivalence class `[x, c, α]` of triples made of a numeric
//! value `x`, a positive scale vector `c` (how the base units are rescaled) and
//! a dimension `α`. Two triples are equivalent when their dimensions agree and
//! `x·c^α = y·d^α`. Every [`Quantity`] is stored through its canonical
//! representative at `c = 𝟙`, so the numeric field is `[p] = [p]_𝟙`.

use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::func::ScalarFn;
use crate::rational::{format_rational, to_f64, Rational};

/// Relative tolerance used for value comparisons of quantities.
pub const VALUE_RTOL: f64 = 1e-12;

/// Largest `|log(c^α)|` accepted before the power is reported as overflowing.
pub const MAX_LOG_SCALE: f64 = 700.0;

pub const SI_BASE: [&str; 7] = ["m", "kg", "s", "A", "K", "mol", "cd"];

/// An ordered list of base units. Dimensions and scale vectors are only
/// comparable when they index the same basis.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Basis(Arc<[String]>);

impl Basis {
    pub fn new<I, S>(units: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let units: Vec<String> = units.into_iter().map(Into::into).collect();
        if units.is_empty() {
            return Err(Error::InvalidArgument("basis must contain at least one unit".into()));
        }
        for (i, u) in units.iter().enumerate() {
            if u.is_empty() || units[..i].contains(u) {
                return Err(Error::InvalidArgument(format!("bad or repeated base unit `{u}`")));
            }
        }
        Ok(Self(units.into()))
    }

    /// The seven SI base units in the order m, kg, s, A, K, mol, cd.
    pub fn si() -> Self {
        Self(SI_BASE.iter().map(|s| s.to_string()).collect())
    }

    /// The (m, kg, s) subset.
    pub fn mks() -> Self {
        Self(SI_BASE[..3].iter().map(|s| s.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn units(&self) -> &[String] {
        &self.0
    }

    pub fn position(&self, unit: &str) -> Option<usize> {
        self.0.iter().position(|u| u == unit)
    }

    pub(crate) fn check_same(&self, other: &Basis) -> Result<()> {
        if Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0 {
            Ok(())
        } else {
            Err(Error::BasisMismatch { left: self.0.join(","), right: other.0.join(",") })
        }
    }
}

impl fmt::Debug for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Basis({})", self.0.join(","))
    }
}

/// Rational exponent vector over a [`Basis`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dimension {
    basis: Basis,
    exponents: Vec<Rational>,
}

impl Dimension {
    pub fn new(basis: &Basis, exponents: Vec<Rational>) -> Result<Self> {
        if exponents.len() != basis.len() {
            return Err(Error::LengthMismatch { expected: basis.len(), got: exponents.len() });
        }
        Ok(Self { basis: basis.clone(), exponents })
    }

    pub fn from_ints(basis: &Basis, exponents: &[i64]) -> Result<Self> {
        Self::new(basis, exponents.iter().map(|&e| crate::rational::int(e)).collect())
    }

    pub fn dimensionless(basis: &Basis) -> Self {
        Self { basis: basis.clone(), exponents: vec![Rational::zero(); basis.len()] }
    }

    /// One-hot dimension of base unit `index`.
    pub fn base(basis: &Basis, index: usize) -> Self {
        let mut d = Self::dimensionless(basis);
        d.exponents[index] = crate::rational::int(1);
        d
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn exponents(&self) -> &[Rational] {
        &self.exponents
    }

    pub fn exponents_f64(&self) -> Vec<f64> {
        self.exponents.iter().map(to_f64).collect()
    }

    pub fn is_dimensionless(&self) -> bool {
        self.exponents.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &Dimension) -> Result<Dimension> {
        self.basis.check_same(&other.basis)?;
        Ok(Self {
            basis: self.basis.clone(),
            exponents: self.exponents.iter().zip(&other.exponents).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Dimension) -> Result<Dimension> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Dimension {
        Self { basis: self.basis.clone(), exponents: self.exponents.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, k: &Rational) -> Dimension {
        Self { basis: self.basis.clone(), exponents: self.exponents.iter().map(|a| a * k).collect() }
    }

    /// Renders as a product of base units, e.g. `m^2.kg.s^-2`; `1` when
    /// dimensionless.
    pub fn symbolic(&self) -> String {
        let parts: Vec<String> = self
            .basis
            .units()
            .iter()
            .zip(&self.exponents)
            .filter(|(_, e)| !e.is_zero())
            .map(|(u, e)| {
                if *e == crate::rational::int(1) {
                    u.clone()
                } else {
                    format!("{u}^{}", format_rational(e))
                }
            })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join(".")
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.exponents.iter().map(format_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl fmt::Debug for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dimension{self}")
    }
}

/// Strictly positive rescaling factors `c = (c_1, …, c_m)` of the base units.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleVector {
    basis: Basis,
    factors: Vec<f64>,
}

impl ScaleVector {
    pub fn new(basis: &Basis, factors: Vec<f64>) -> Result<Self> {
        if factors.len() != basis.len() {
            return Err(Error::LengthMismatch { expected: basis.len(), got: factors.len() });
        }
        if let Some(&bad) = factors.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return Err(Error::NonPositiveScale(bad));
        }
        Ok(Self { basis: basis.clone(), factors })
    }

    /// The unit scale `𝟙`.
    pub fn ones(basis: &Basis) -> Self {
        Self { basis: basis.clone(), factors: vec![1.0; basis.len()] }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn factors(&self) -> &[f64] {
        &self.factors
    }

    /// `c^α = Π c_i^{α_i}`.
    pub fn pow(&self, alpha: &Dimension) -> Result<f64> {
        self.basis.check_same(&alpha.basis)?;
        pow_log(&self.factors, &alpha.exponents_f64())
    }

    /// Componentwise `self / other`.
    pub fn div(&self, other: &ScaleVector) -> Result<ScaleVector> {
        self.basis.check_same(&other.basis)?;
        Ok(Self {
            basis: self.basis.clone(),
            factors: self.factors.iter().zip(&other.factors).map(|(a, b)| a / b).collect(),
        })
    }
}

pub(crate) fn pow_log(factors: &[f64], exponents: &[f64]) -> Result<f64> {
    let log: f64 = factors.iter().zip(exponents).filter(|(_, &a)| a != 0.0).map(|(c, a)| a * c.ln()).sum();
    if log.abs() > MAX_LOG_SCALE {
        return Err(Error::ScaleOverflow(log));
    }
    Ok(log.exp())
}

pub fn values_close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= VALUE_RTOL * a.abs().max(b.abs())
}

/// A physical quantity `[x, 𝟙, α]`.
#[derive(Clone, Debug)]
pub struct Quantity {
    value: f64,
    dimension: Dimension,
}

impl Quantity {
    /// The class `[value, scale, dim]`, normalized to scale `𝟙`.
    pub fn new(value: f64, scale: &ScaleVector, dim: &Dimension) -> Result<Self> {
        let canonical = value * scale.pow(dim)?;
        Ok(Self { value: canonical, dimension: dim.clone() })
    }

    pub fn canonical(value: f64, dim: &Dimension) -> Self {
        Self { value, dimension: dim.clone() }
    }

    /// The neutral element `[1, 𝟙, 0]`.
    pub fn one(basis: &Basis) -> Self {
        Self::canonical(1.0, &Dimension::dimensionless(basis))
    }

    /// `[p] = [p]_𝟙`.
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn dimension(&self) -> &Dimension {
        &self.dimension
    }

    /// `[p]_d = [p]·(𝟙/d)^α`.
    pub fn coordinate_in(&self, scale: &ScaleVector) -> Result<f64> {
        Ok(self.value / scale.pow(&self.dimension)?)
    }

    pub fn mul(&self, other: &Quantity) -> Result<Quantity> {
        Ok(Self { value: self.value * other.value, dimension: self.dimension.add(&other.dimension)? })
    }

    pub fn inv(&self) -> Result<Quantity> {
        if self.value == 0.0 {
            return Err(Error::NotInvertible);
        }
        Ok(Self { value: self.value.recip(), dimension: self.dimension.neg() })
    }

    pub fn add(&self, other: &Quantity) -> Result<Quantity> {
        self.dimension.basis.check_same(&other.dimension.basis)?;
        if self.dimension != other.dimension {
            return Err(Error::DimensionMismatch {
                left: self.dimension.to_string(),
                right: other.dimension.to_string(),
            });
        }
        Ok(Self { value: self.value + other.value, dimension: self.dimension.clone() })
    }

    pub fn neg(&self) -> Quantity {
        Self { value: -self.value, dimension: self.dimension.clone() }
    }

    pub fn is_positive(&self) -> bool {
        self.value > 0.0
    }
}

impl PartialEq for Quantity {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension && values_close(self.value, other.value)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.dimension.symbolic())
    }
}

/// Whether `(x, c, α) ∼ (y, d, β)`.
pub fn equivalent(t1: (f64, &ScaleVector, &Dimension), t2: (f64, &ScaleVector, &Dimension)) -> Result<bool> {
    let (x, c, alpha) = t1;
    let (y, d, beta) = t2;
    c.basis.check_same(&alpha.basis)?;
    d.basis.check_same(&beta.basis)?;
    alpha.basis.check_same(&beta.basis)?;
    if alpha != beta {
        return Ok(false);
    }
    Ok(values_close(x * c.pow(alpha)?, y * d.pow(alpha)?))
}

/// Evaluates `F` on the coordinates `[p_j]_c` of positive inputs and packages
/// the result as `[F(…), c, β]`. When `F` scales exactly like `β` the result
/// does not depend on `c`.
pub fn lift(f: &ScalarFn, inputs: &[Quantity], scale: &ScaleVector, beta: &Dimension) -> Result<Quantity> {
    let coords = inputs
        .iter()
        .map(|p| {
            if !p.is_positive() {
                return Err(Error::Domain(format!("lift input {p} is not positive")));
            }
            p.coordinate_in(scale)
        })
        .collect::<Result<Vec<_>>>()?;
    Quantity::new(f.call(&coords)?, scale, beta)
}
