//! Dimensional analysis with quantitative error bounds.
//!
//! Quantities live in classes `[x, c, α]` of (value, unit scale, dimension)
//! triples. A physical law `F` is dimensionally consistent when it commutes
//! with every change of units; the crate finds the Π groups of a problem,
//! the monomial template `F(v) = G(π(v)) · v^y`, and bounds how far an
//! approximately consistent law can drift from that template.

pub mod bounds;
pub mod decompose;
pub mod dim;
pub mod error;
pub mod expr;
pub mod func;
pub mod linalg;
pub mod problem;
pub mod rational;
pub mod units;

pub use bounds::{
    bound_theorem1, bound_theorem2, estimate_epsilon, make_perturbed, two_valued_perturbation, verify_bound,
    EpsilonEstimate, SamplingBox, Theorem, VerifyReport,
};
pub use decompose::{DimensionProblem, PiDecomposition, Variable};
pub use dim::{equivalent, lift, Basis, Dimension, Quantity, ScaleVector};
pub use error::{Error, Result};
pub use expr::{eval_expr, parse_expr, Expr};
pub use func::ScalarFn;
pub use linalg::{min_norm_solve, MinNormSolution, RatMatrix, RealMatrix};
pub use problem::ProblemFile;
pub use rational::{format_rational, parse_rational, Rational};
pub use units::{lookup, parse_unit, quantity_of, ParsedUnit, Registry};
