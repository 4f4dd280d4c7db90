//! Python bindings: unit parsing, exact linear algebra, Π decompositions,
//! bound evaluation and verification runs.

use buckingham_core::bounds::{epsilon_for_tau, BoundReport};
use buckingham_core::rational::{format_rational, parse_rational};
use buckingham_core::{
    self as core, min_norm_solve, DimensionProblem, PiDecomposition, ProblemFile, RatMatrix, Rational,
    RealMatrix, ScalarFn,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

create_exception!(buckingham, BuckinghamError, PyValueError);
create_exception!(buckingham, EvaluationError, PyArithmeticError);

fn err(e: core::Error) -> PyErr {
    match e {
        core::Error::Evaluation { .. } | core::Error::Domain(_) => EvaluationError::new_err(e.to_string()),
        _ => BuckinghamError::new_err(e.to_string()),
    }
}

/// An exact number given as a Python `int` or a `"p/q"` string.
#[derive(FromPyObject)]
enum RatArg {
    Int(i64),
    Text(String),
}

impl RatArg {
    fn to_rational(&self) -> PyResult<Rational> {
        match self {
            RatArg::Int(i) => Ok(buckingham_core::rational::int(*i)),
            RatArg::Text(s) => parse_rational(s).map_err(err),
        }
    }
}

fn rat_matrix(rows: Vec<Vec<RatArg>>) -> PyResult<RatMatrix> {
    let rows = rows
        .iter()
        .map(|r| r.iter().map(RatArg::to_rational).collect::<PyResult<Vec<_>>>())
        .collect::<PyResult<Vec<_>>>()?;
    RatMatrix::from_rows(rows).map_err(err)
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

fn string_rows(m: &RatMatrix) -> Vec<Vec<String>> {
    m.to_rows().iter().map(|r| strings(r)).collect()
}

#[pyclass(frozen, get_all, module = "buckingham")]
struct Unit {
    expr: String,
    basis: Vec<String>,
    exponents: Vec<String>,
    factor: f64,
    canonical: String,
}

#[pymethods]
impl Unit {
    fn __repr__(&self) -> String {
        format!("Unit({:?}, factor={}, exponents={:?})", self.expr, self.factor, self.exponents)
    }
}

/// Dimension over the SI basis, SI factor and canonical form of a unit expression.
#[pyfunction]
fn parse_unit(expr: &str) -> PyResult<Unit> {
    let p = core::parse_unit(expr).map_err(err)?;
    Ok(Unit {
        expr: expr.to_string(),
        basis: p.dimension.basis().units().to_vec(),
        exponents: strings(p.dimension.exponents()),
        factor: p.factor,
        canonical: p.to_string(),
    })
}

#[pyfunction]
fn rank(rows: Vec<Vec<RatArg>>) -> PyResult<usize> {
    Ok(rat_matrix(rows)?.rank())
}

/// Canonical integer kernel basis, one vector per free column.
#[pyfunction]
fn kernel(rows: Vec<Vec<RatArg>>) -> PyResult<Vec<Vec<String>>> {
    Ok(rat_matrix(rows)?.kernel_basis().iter().map(|v| strings(v)).collect())
}

/// Exact Moore-Penrose pseudoinverse.
#[pyfunction]
fn pinv(rows: Vec<Vec<RatArg>>) -> PyResult<Vec<Vec<String>>> {
    Ok(string_rows(&rat_matrix(rows)?.pinv()))
}

/// Floating-point pseudoinverse by Jacobi SVD.
#[pyfunction]
#[pyo3(signature = (rows, tol=None))]
fn pinv_real(rows: Vec<Vec<f64>>, tol: Option<f64>) -> PyResult<Vec<Vec<f64>>> {
    let p = RealMatrix::from_rows(&rows).map_err(err)?.pinv(tol).map_err(err)?;
    Ok((0..p.rows()).map(|i| p.row(i).to_vec()).collect())
}

/// `(A†b, ‖A A†b − b‖∞)`, both exact.
#[pyfunction]
fn solve_min_norm(rows: Vec<Vec<RatArg>>, b: Vec<RatArg>) -> PyResult<(Vec<String>, String)> {
    let a = rat_matrix(rows)?;
    let b = b.iter().map(RatArg::to_rational).collect::<PyResult<Vec<_>>>()?;
    let sol = min_norm_solve(&a, &b).map_err(err)?;
    Ok((strings(&sol.y), format_rational(&sol.residual)))
}

#[pyfunction]
#[pyo3(name = "bound_theorem1")]
fn py_bound_theorem1(eps: f64, delta: f64, k: f64, m: usize, d_norm: f64) -> PyResult<f64> {
    core::bound_theorem1(eps, delta, k, m, d_norm).map_err(err)
}

#[pyfunction]
#[pyo3(name = "bound_theorem2")]
#[allow(clippy::too_many_arguments)]
fn py_bound_theorem2(
    eps: f64,
    delta: f64,
    k: f64,
    m: usize,
    n: usize,
    d_norm: f64,
    m_max: f64,
    xdag_norm: f64,
) -> PyResult<f64> {
    core::bound_theorem2(eps, delta, k, m, n, d_norm, m_max, xdag_norm).map_err(err)
}

/// `(1+τ)/(1−τ) − 1`.
#[pyfunction]
fn tau_to_epsilon(tau: f64) -> f64 {
    epsilon_for_tau(tau)
}

/// A scalar function of positive reals implemented in Rust.
#[pyclass(frozen, module = "buckingham")]
struct Function {
    f: ScalarFn,
}

#[pymethods]
impl Function {
    #[getter]
    fn arity(&self) -> usize {
        self.f.arity()
    }

    fn __call__(&self, v: Vec<f64>) -> PyResult<f64> {
        self.f.call(&v).map_err(err)
    }
}

/// `H(v) v^y` with `H` a seeded field in `[1−τ, 1+τ]`.
#[pyfunction]
#[pyo3(signature = (y, tau, seed=0))]
fn make_perturbed(y: Vec<f64>, tau: f64, seed: u64) -> PyResult<Function> {
    Ok(Function { f: core::make_perturbed(y, tau, seed).map_err(err)? })
}

/// Accepts a `Function` or any Python callable taking a list of floats.
fn scalar_fn(obj: &Bound<'_, PyAny>, arity: usize) -> PyResult<ScalarFn> {
    if let Ok(func) = obj.cast::<Function>() {
        return Ok(func.get().f.clone());
    }
    if !obj.is_callable() {
        return Err(BuckinghamError::new_err("expected a callable"));
    }
    let callable: Py<PyAny> = obj.clone().unbind();
    Ok(ScalarFn::new(arity, move |v| {
        Python::attach(|py| callable.bind(py).call1((v.to_vec(),))?.extract::<f64>())
            .map_err(|e| core::Error::Evaluation { at: v.to_vec(), msg: e.to_string() })
    }))
}

#[pyclass(frozen, get_all, name = "Bound", module = "buckingham")]
struct BoundInfo {
    theorem: u8,
    eps: f64,
    delta: f64,
    k: f64,
    m: usize,
    n: usize,
    d_norm: f64,
    m_max: f64,
    xdag_norm: f64,
    bound: f64,
}

impl From<&BoundReport> for BoundInfo {
    fn from(b: &BoundReport) -> Self {
        Self {
            theorem: b.theorem.number(),
            eps: b.eps,
            delta: b.delta,
            k: b.k,
            m: b.m,
            n: b.n,
            d_norm: b.d_norm,
            m_max: b.m_max,
            xdag_norm: b.xdag_norm,
            bound: b.bound,
        }
    }
}

#[pymethods]
impl BoundInfo {
    fn __repr__(&self) -> String {
        format!(
            "Bound(theorem={}, eps={}, delta={}, K={}, bound={})",
            self.theorem, self.eps, self.delta, self.k, self.bound
        )
    }
}

#[pyclass(frozen, get_all, module = "buckingham")]
struct Estimate {
    eps_hat: f64,
    samples: usize,
    worst_v: Option<Vec<f64>>,
    worst_c: Option<Vec<f64>>,
}

#[pyclass(frozen, get_all, module = "buckingham")]
struct Verification {
    bound: f64,
    theorem: u8,
    tolerance: f64,
    samples: usize,
    violations: usize,
    max_ratio: f64,
    max_relative: f64,
    worst_v: Option<Vec<f64>>,
    passed: bool,
}

#[pymethods]
impl Verification {
    fn __repr__(&self) -> String {
        format!(
            "Verification(passed={}, violations={}/{}, bound={}, max_ratio={})",
            self.passed, self.violations, self.samples, self.bound, self.max_ratio
        )
    }
}

/// A dimensional analysis problem read from the JSON problem format.
#[pyclass(frozen, module = "buckingham")]
struct Problem {
    file: ProblemFile,
    problem: DimensionProblem,
}

#[pymethods]
impl Problem {
    /// `variables` and `target` are `(name, unit expression)` pairs.
    #[new]
    #[pyo3(signature = (variables, target, function=None, basis=None))]
    fn new(
        variables: Vec<(String, String)>,
        target: (String, String),
        function: Option<String>,
        basis: Option<Vec<String>>,
    ) -> PyResult<Self> {
        let spec = |(name, unit): &(String, String)| serde_json::json!({"name": name, "unit": unit});
        let mut doc = serde_json::json!({
            "variables": variables.iter().map(spec).collect::<Vec<_>>(),
            "target": spec(&target),
        });
        if let Some(f) = function {
            doc["function"] = f.into();
        }
        if let Some(b) = basis {
            doc["basis"] = b.into();
        }
        Self::from_json(&doc.to_string())
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Self::build(ProblemFile::from_json(text).map_err(err)?)
    }

    #[staticmethod]
    fn from_file(path: std::path::PathBuf) -> PyResult<Self> {
        Self::build(ProblemFile::from_path(path).map_err(err)?)
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.problem.names()
    }

    #[getter]
    fn function(&self) -> Option<String> {
        self.file.function.clone()
    }

    fn matrix(&self) -> Vec<Vec<String>> {
        string_rows(&self.problem.build_matrix())
    }

    fn beta(&self) -> Vec<String> {
        strings(&self.problem.beta())
    }

    /// The problem's function compiled to a `Function`.
    fn candidate(&self) -> PyResult<Option<Function>> {
        self.problem.candidate_fn().transpose().map(|f| f.map(|f| Function { f })).map_err(err)
    }

    fn decompose(&self) -> PyResult<Decomposition> {
        let mut dec = self.problem.decompose().map_err(err)?;
        if let Some(y) = self.file.exponent_override().map_err(err)? {
            dec = dec.with_exact_exponents(y).map_err(err)?;
        }
        let f = self.problem.candidate_fn().transpose().map_err(err)?;
        Ok(Decomposition { dec, f })
    }
}

impl Problem {
    fn build(file: ProblemFile) -> PyResult<Self> {
        let problem = file.to_problem().map_err(err)?;
        Ok(Self { file, problem })
    }
}

/// Π groups, exponents `y` and norms of a problem.
#[pyclass(frozen, module = "buckingham")]
struct Decomposition {
    dec: PiDecomposition,
    f: Option<ScalarFn>,
}

#[pymethods]
impl Decomposition {
    #[getter]
    fn names(&self) -> Vec<String> {
        self.dec.names.clone()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.dec.rank
    }

    #[getter]
    fn k(&self) -> usize {
        self.dec.k
    }

    #[getter]
    fn y(&self) -> Vec<f64> {
        self.dec.y.clone()
    }

    /// Exact exponents as `"p/q"` strings, or `None` after a float override.
    #[getter]
    fn y_exact(&self) -> Option<Vec<String>> {
        self.dec.y_exact.as_deref().map(strings)
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.dec.delta
    }

    #[getter]
    fn matrix(&self) -> Vec<Vec<String>> {
        string_rows(&self.dec.a)
    }

    /// `(label, exponents)` for each Π group.
    #[getter]
    fn pi_groups(&self) -> Vec<(String, Vec<String>)> {
        self.dec.pi_groups.iter().map(|p| (p.label.clone(), strings(&p.exponents))).collect()
    }

    #[getter]
    fn template(&self) -> String {
        self.dec.template.clone()
    }

    #[getter]
    fn constant(&self) -> Option<f64> {
        self.dec.constant
    }

    #[getter]
    fn d_norm(&self) -> f64 {
        self.dec.d_norm
    }

    #[getter]
    fn m_max(&self) -> f64 {
        self.dec.m_max
    }

    #[getter]
    fn xdag_norm(&self) -> f64 {
        self.dec.xdag_norm
    }

    /// A copy with floating-point exponents `y`; δ is recomputed.
    fn with_exponents(&self, y: Vec<f64>) -> PyResult<Decomposition> {
        Ok(Decomposition { dec: self.dec.clone().with_exponents(y).map_err(err)?, f: self.f.clone() })
    }

    fn pi_values(&self, v: Vec<f64>) -> PyResult<Vec<f64>> {
        self.dec.pi_values(&v).map_err(err)
    }

    /// `G(π(v)) v^y` with `G` reconstructed from `f` (default: the problem's function).
    #[pyo3(signature = (v, f=None))]
    fn approximation(&self, v: Vec<f64>, f: Option<&Bound<'_, PyAny>>) -> PyResult<f64> {
        let f = self.function(f)?;
        self.dec.approximation(&f, &v).map_err(err)
    }

    #[pyo3(signature = (eps, k=2.0))]
    fn bound(&self, eps: f64, k: f64) -> PyResult<BoundInfo> {
        Ok(BoundInfo::from(&self.dec.bound(eps, k).map_err(err)?))
    }

    #[pyo3(signature = (f=None, k=2.0, l=2.0, samples=1000, seed=0))]
    fn estimate_epsilon(
        &self,
        f: Option<&Bound<'_, PyAny>>,
        k: f64,
        l: f64,
        samples: usize,
        seed: u64,
    ) -> PyResult<Estimate> {
        let f = self.function(f)?;
        let e = core::estimate_epsilon(&f, &self.dec.a, &self.dec.beta, k, l, samples, seed).map_err(err)?;
        let (worst_v, worst_c) = match e.worst_case {
            Some((v, c)) => (Some(v), Some(c)),
            None => (None, None),
        };
        Ok(Estimate { eps_hat: e.eps_hat, samples: e.samples, worst_v, worst_c })
    }

    #[pyo3(signature = (eps, f=None, k=2.0, trials=1000, seed=0))]
    fn verify(
        &self,
        eps: f64,
        f: Option<&Bound<'_, PyAny>>,
        k: f64,
        trials: usize,
        seed: u64,
    ) -> PyResult<Verification> {
        let f = self.function(f)?;
        let r = core::verify_bound(&self.dec, &f, k, eps, trials, seed).map_err(err)?;
        Ok(Verification {
            bound: r.bound.bound,
            theorem: r.bound.theorem.number(),
            tolerance: r.tolerance,
            samples: r.samples,
            violations: r.violations,
            max_ratio: r.max_ratio,
            max_relative: r.max_relative,
            worst_v: r.worst_v.clone(),
            passed: r.passed(),
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Decomposition({:?}, rank={}, k={}, delta={})",
            self.dec.template, self.dec.rank, self.dec.k, self.dec.delta
        )
    }
}

impl Decomposition {
    fn function(&self, f: Option<&Bound<'_, PyAny>>) -> PyResult<ScalarFn> {
        match f {
            Some(obj) => scalar_fn(obj, self.dec.n()),
            None => self.f.clone().ok_or_else(|| BuckinghamError::new_err("problem has no function")),
        }
    }
}

#[pymodule]
fn buckingham(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("BuckinghamError", m.py().get_type::<BuckinghamError>())?;
    m.add("EvaluationError", m.py().get_type::<EvaluationError>())?;
    m.add_class::<Unit>()?;
    m.add_class::<Function>()?;
    m.add_class::<BoundInfo>()?;
    m.add_class::<Estimate>()?;
    m.add_class::<Verification>()?;
    m.add_class::<Problem>()?;
    m.add_class::<Decomposition>()?;
    m.add_function(wrap_pyfunction!(parse_unit, m)?)?;
    m.add_function(wrap_pyfunction!(rank, m)?)?;
    m.add_function(wrap_pyfunction!(kernel, m)?)?;
    m.add_function(wrap_pyfunction!(pinv, m)?)?;
    m.add_function(wrap_pyfunction!(pinv_real, m)?)?;
    m.add_function(wrap_pyfunction!(solve_min_norm, m)?)?;
    m.add_function(wrap_pyfunction!(py_bound_theorem1, m)?)?;
    m.add_function(wrap_pyfunction!(py_bound_theorem2, m)?)?;
    m.add_function(wrap_pyfunction!(tau_to_epsilon, m)?)?;
    m.add_function(wrap_pyfunction!(make_perturbed, m)?)?;
    Ok(())
}
