//! Dimension matrices and the decomposition `q = G(π₁, …, π_k) · Π p_j^{y_j}`.

use num_traits::{One, Signed, Zero};

use crate::dim::{Basis, Dimension};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::func::ScalarFn;
use crate::linalg::{min_norm_solve, residual_inf, residual_inf_f64, RatMatrix, RealMatrix};
use crate::rational::{abs_max, format_rational, format_real, to_f64, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    pub dimension: Dimension,
}

impl Variable {
    pub fn new(name: impl Into<String>, dimension: Dimension) -> Self {
        Self { name: name.into(), dimension }
    }
}

#[derive(Clone, Debug)]
pub struct DimensionProblem {
    variables: Vec<Variable>,
    target: Variable,
    candidate: Option<Expr>,
}

impl DimensionProblem {
    pub fn new(variables: Vec<Variable>, target: Variable) -> Result<Self> {
        let Some(first) = variables.first() else {
            return Err(Error::InvalidArgument("a problem needs at least one variable".into()));
        };
        let basis = first.dimension.basis().clone();
        for v in variables.iter().chain([&target]) {
            basis.check_same(v.dimension.basis())?;
        }
        for (i, v) in variables.iter().enumerate() {
            if v.name.is_empty() {
                return Err(Error::InvalidArgument("empty variable name".into()));
            }
            if variables[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::InvalidArgument(format!("duplicate variable `{}`", v.name)));
            }
        }
        Ok(Self { variables, target, candidate: None })
    }

    /// Attaches a candidate law; every identifier must name a variable.
    pub fn with_candidate(mut self, expr: Expr) -> Result<Self> {
        if let Some(unknown) = expr.variables().into_iter().find(|v| self.position(v).is_none()) {
            return Err(Error::UnknownIdentifier(unknown));
        }
        self.candidate = Some(expr);
        Ok(self)
    }

    pub fn basis(&self) -> &Basis {
        self.target.dimension.basis()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn target(&self) -> &Variable {
        &self.target
    }

    pub fn candidate(&self) -> Option<&Expr> {
        self.candidate.as_ref()
    }

    pub fn names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// The candidate law as a function of the variables in declaration order.
    pub fn candidate_fn(&self) -> Option<Result<ScalarFn>> {
        self.candidate.as_ref().map(|e| e.bind(&self.names()))
    }

    pub fn build_matrix(&self) -> RatMatrix {
        let cols: Vec<Vec<Rational>> =
            self.variables.iter().map(|v| v.dimension.exponents().to_vec()).collect();
        RatMatrix::from_columns(self.basis().len(), &cols).expect("dimensions share one basis")
    }

    pub fn beta(&self) -> Vec<Rational> {
        self.target.dimension.exponents().to_vec()
    }

    pub fn decompose(&self) -> Result<PiDecomposition> {
        PiDecomposition::new(self)
    }
}

pub fn build_matrix(problem: &DimensionProblem) -> RatMatrix {
    problem.build_matrix()
}

pub fn decompose(problem: &DimensionProblem) -> Result<PiDecomposition> {
    problem.decompose()
}

/// A monomial `Π p_j^{x_j}` with `x` in the kernel of the dimension matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct PiGroup {
    pub exponents: Vec<Rational>,
    pub label: String,
}

#[derive(Clone, Debug)]
pub struct PiDecomposition {
    pub names: Vec<String>,
    pub target: String,
    pub a: RatMatrix,
    pub beta: Vec<Rational>,
    pub rank: usize,
    pub k: usize,
    /// Exponents as floats; always populated.
    pub y: Vec<f64>,
    /// Exact exponents, absent once overridden by floats.
    pub y_exact: Option<Vec<Rational>>,
    pub delta: f64,
    pub delta_exact: Option<Rational>,
    /// Kernel basis, one row per π group.
    pub x: RatMatrix,
    pub m_max: f64,
    pub d_norm: f64,
    pub xdag_norm: f64,
    xdag: RealMatrix,
    pub pi_groups: Vec<PiGroup>,
    pub template: String,
    /// `F(1, …, 1)` for the attached candidate, if any.
    pub constant: Option<f64>,
}

impl PiDecomposition {
    fn new(problem: &DimensionProblem) -> Result<Self> {
        let names = problem.names();
        let a = problem.build_matrix();
        let beta = problem.beta();
        let n = a.cols();
        let rank = a.rank();
        let sol = min_norm_solve(&a, &beta)?;
        let kernel = a.kernel_basis();
        let k = kernel.len();
        let x = if k == 0 { RatMatrix::zeros(0, n) } else { RatMatrix::from_rows(kernel.clone())? };
        let m_max = to_f64(&abs_max(kernel.iter().flatten()));
        let d_norm = to_f64(&a.transpose().pinv().inf_norm());
        let xdag_exact = x.pinv();
        let xdag_norm = if k == 0 { 0.0 } else { to_f64(&xdag_exact.inf_norm()) };
        let pi_groups = kernel
            .iter()
            .map(|e| PiGroup { exponents: e.clone(), label: monomial_label(&names, e) })
            .collect();
        let constant = match problem.candidate_fn() {
            // an evaluation failure at 1 leaves C unknown rather than failing the analysis
            Some(f) => f?.call(&vec![1.0; n]).ok().filter(|c| c.is_finite()),
            None => None,
        };
        let mut dec = Self {
            names,
            target: problem.target().name.clone(),
            a,
            beta,
            rank,
            k,
            y: sol.y_f64(),
            delta: sol.residual_f64(),
            y_exact: Some(sol.y),
            delta_exact: Some(sol.residual),
            x,
            m_max,
            d_norm,
            xdag_norm,
            xdag: xdag_exact.to_real(),
            pi_groups,
            template: String::new(),
            constant,
        };
        dec.template = dec.render_template();
        Ok(dec)
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    /// Replaces `y` by exact exponents and recomputes the residual.
    pub fn with_exact_exponents(mut self, y: Vec<Rational>) -> Result<Self> {
        let delta = residual_inf(&self.a, &y, &self.beta)?;
        self.y = y.iter().map(to_f64).collect();
        self.delta = to_f64(&delta);
        self.delta_exact = Some(delta);
        self.y_exact = Some(y);
        self.template = self.render_template();
        Ok(self)
    }

    /// Replaces `y` by floating-point exponents; the residual becomes inexact.
    pub fn with_exponents(mut self, y: Vec<f64>) -> Result<Self> {
        if y.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidArgument("exponents must be finite".into()));
        }
        self.delta = residual_inf_f64(&self.a, &y, &self.beta)?;
        self.y = y;
        self.y_exact = None;
        self.delta_exact = None;
        self.template = self.render_template();
        Ok(self)
    }

    pub fn is_exact(&self) -> bool {
        self.delta_exact.as_ref().is_some_and(Zero::is_zero)
    }

    /// `(π₁(v), …, π_k(v))`.
    pub fn pi_values(&self, v: &[f64]) -> Result<Vec<f64>> {
        Ok(self.log_pi_values(v)?.into_iter().map(f64::exp).collect())
    }

    /// `X log v`, the logarithms of the π values. Kernel vectors can have
    /// large entries, so this stays finite where `pi_values` may overflow.
    pub fn log_pi_values(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_positive(v, self.n())?;
        let logv: Vec<f64> = v.iter().map(|x| x.ln()).collect();
        Ok((0..self.k).map(|s| self.x.row(s).iter().zip(&logv).map(|(x, l)| to_f64(x) * l).sum()).collect())
    }

    /// `ψ(w) = exp(X† log w)`. With `k = 0` this is the all-ones vector.
    pub fn psi(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_positive(w, self.k)?;
        let logw: Vec<f64> = w.iter().map(|x| x.ln()).collect();
        self.psi_log(&logw)
    }

    /// `ψ` as a function of `log w`.
    pub fn psi_log(&self, logw: &[f64]) -> Result<Vec<f64>> {
        if logw.len() != self.k {
            return Err(Error::LengthMismatch { expected: self.k, got: logw.len() });
        }
        Ok(self.xdag.mul_vec(logw).into_iter().map(f64::exp).collect())
    }

    /// `G(w) = F(ψ(w)) / ψ(w)^y`, a function of `k` arguments. With `k = 0`
    /// it is the constant `F(1, …, 1)`.
    pub fn reconstruct_g(&self, f: &ScalarFn) -> Result<ScalarFn> {
        let g = self.reconstruct_g_log(f)?;
        let k = self.k;
        Ok(ScalarFn::new(k, move |w| {
            if let Some(x) = w.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
                return Err(Error::Domain(format!("argument {x} is not a positive real")));
            }
            g.call(&w.iter().map(|x| x.ln()).collect::<Vec<_>>())
        }))
    }

    /// `log w ↦ G(w)`.
    pub fn reconstruct_g_log(&self, f: &ScalarFn) -> Result<ScalarFn> {
        if f.arity() != self.n() {
            return Err(Error::Arity { expected: self.n(), got: f.arity() });
        }
        let (dec, f) = (self.clone(), f.clone());
        Ok(ScalarFn::new(self.k, move |logw| {
            if logw.len() != dec.k {
                return Err(Error::Arity { expected: dec.k, got: logw.len() });
            }
            let logu = dec.xdag.mul_vec(logw);
            let u: Vec<f64> = logu.iter().map(|x| x.exp()).collect();
            let uy: f64 = logu.iter().zip(&dec.y).map(|(l, y)| l * y).sum();
            Ok(f.call(&u)? * (-uy).exp())
        }))
    }

    /// `G(π(v)) · v^y` with `G` reconstructed from `f`, evaluated in log
    /// space as `F(u) (v/u)^y` where `u = ψ(π(v))`.
    pub fn approximation(&self, f: &ScalarFn, v: &[f64]) -> Result<f64> {
        if f.arity() != self.n() {
            return Err(Error::Arity { expected: self.n(), got: f.arity() });
        }
        let logw = self.log_pi_values(v)?;
        let logu = self.xdag.mul_vec(&logw);
        let u: Vec<f64> = logu.iter().map(|x| x.exp()).collect();
        let shift: f64 = v.iter().zip(&logu).zip(&self.y).map(|((x, lu), y)| y * (x.ln() - lu)).sum();
        Ok(f.call(&u)? * shift.exp())
    }

    fn check_positive(&self, v: &[f64], len: usize) -> Result<()> {
        if v.len() != len {
            return Err(Error::LengthMismatch { expected: len, got: v.len() });
        }
        match v.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
            Some(x) => Err(Error::Domain(format!("argument {x} is not a positive real"))),
            None => Ok(()),
        }
    }

    fn render_template(&self) -> String {
        let head = if self.k == 0 {
            "C".to_string()
        } else {
            let args: Vec<&str> = self.pi_groups.iter().map(|p| p.label.as_str()).collect();
            format!("G({})", args.join(", "))
        };
        let mut factors = vec![head];
        for (j, name) in self.names.iter().enumerate() {
            let text = match &self.y_exact {
                Some(ex) if ex[j].is_zero() => continue,
                Some(ex) => power_text(name, &ex[j]),
                None if self.y[j] == 0.0 => continue,
                None if self.y[j] == 1.0 => name.clone(),
                None => format!("{name}^({})", format_real(self.y[j])),
            };
            factors.push(text);
        }
        format!("{} = {}", self.target, factors.join(" * "))
    }
}

fn power_text(name: &str, e: &Rational) -> String {
    if e.is_one() {
        name.to_string()
    } else if e.is_integer() && e.is_positive() {
        format!("{name}^{}", format_rational(e))
    } else {
        format!("{name}^({})", format_rational(e))
    }
}

/// Renders `Π p_j^{x_j}` as a quotient, e.g. `m1/m2` or `a*b^2/(c*d^(1/2))`.
pub fn monomial_label(names: &[String], exponents: &[Rational]) -> String {
    let mut num = Vec::new();
    let mut den = Vec::new();
    for (name, e) in names.iter().zip(exponents) {
        if e.is_positive() {
            num.push(power_text(name, e));
        } else if e.is_negative() {
            den.push(power_text(name, &-e));
        }
    }
    let num = if num.is_empty() { "1".to_string() } else { num.join("*") };
    match den.len() {
        0 => num,
        1 => format!("{num}/{}", den[0]),
        _ => format!("{num}/({})", den.join("*")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn mks(e: &[i64]) -> Dimension {
        Dimension::from_ints(&Basis::mks(), e).unwrap()
    }

    pub(crate) fn pendulum() -> DimensionProblem {
        DimensionProblem::new(
            vec![
                Variable::new("m", mks(&[0, 1, 0])),
                Variable::new("l", mks(&[1, 0, 0])),
                Variable::new("g", mks(&[1, 0, -2])),
            ],
            Variable::new("T", mks(&[0, 0, 1])),
        )
        .unwrap()
    }

    pub(crate) fn atwood() -> DimensionProblem {
        DimensionProblem::new(
            vec![
                Variable::new("m1", mks(&[0, 1, 0])),
                Variable::new("m2", mks(&[0, 1, 0])),
                Variable::new("h", mks(&[1, 0, 0])),
                Variable::new("g", mks(&[1, 0, -2])),
            ],
            Variable::new("v", mks(&[1, 0, -1])),
        )
        .unwrap()
    }

    #[test]
    fn matrices() {
        assert_eq!(
            atwood().build_matrix(),
            RatMatrix::from_i64_rows(&[[0, 0, 1, 1], [1, 1, 0, 0], [0, 0, 0, -2]]).unwrap()
        );
        assert_eq!(
            pendulum().build_matrix(),
            RatMatrix::from_i64_rows(&[[0, 1, 1], [1, 0, 0], [0, 0, -2]]).unwrap()
        );
    }

    #[test]
    fn pendulum_decomposition() {
        let d =
            pendulum().with_candidate(Expr::parse("2*pi*sqrt(l/g)").unwrap()).unwrap().decompose().unwrap();
        assert_eq!((d.rank, d.k), (3, 0));
        assert_eq!(d.y_exact.clone().unwrap(), vec![int(0), ratio(1, 2), ratio(-1, 2)]);
        assert!(d.is_exact());
        assert_eq!(d.template, "T = C * l^(1/2) * g^(-1/2)");
        assert!((d.constant.unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(d.xdag_norm, 0.0);
    }

    #[test]
    fn atwood_decomposition() {
        let d = atwood().decompose().unwrap();
        assert_eq!((d.rank, d.k), (3, 1));
        assert_eq!(d.pi_groups[0].exponents, vec![int(1), int(-1), int(0), int(0)]);
        assert_eq!(d.pi_groups[0].label, "m1/m2");
        assert_eq!(d.y_exact.clone().unwrap(), vec![int(0), int(0), ratio(1, 2), ratio(1, 2)]);
        assert_eq!(d.template, "v = G(m1/m2) * h^(1/2) * g^(1/2)");
        assert_eq!((d.m_max, d.xdag_norm), (1.0, 0.5));
        let u = d.psi(&[4.0]).unwrap();
        for (a, b) in u.iter().zip([2.0, 0.5, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(d.psi(&[1.0]).unwrap(), vec![1.0; 4]);
        assert!(d.psi(&[0.0]).is_err());
    }

    #[test]
    fn atwood_g() {
        let d = atwood().decompose().unwrap();
        let f = Expr::parse("sqrt(2*g*h*abs(m1-m2)/(m1+m2))").unwrap().bind(&d.names).unwrap();
        let g = d.reconstruct_g(&f).unwrap();
        assert!(g.call(&[1.0]).unwrap().abs() < 1e-12);
        assert!((g.call(&[3.0]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimensionless_only() {
        let b = Basis::mks();
        let z = Dimension::dimensionless(&b);
        let p = DimensionProblem::new(
            vec![Variable::new("a", z.clone()), Variable::new("b", z.clone())],
            Variable::new("q", z),
        )
        .unwrap();
        let d = p.decompose().unwrap();
        assert_eq!((d.rank, d.k), (0, 2));
        assert_eq!(d.y, vec![0.0, 0.0]);
        assert_eq!(d.pi_groups[0].label, "a");
        assert_eq!(d.pi_groups[1].label, "b");
        assert_eq!(d.template, "q = G(a, b)");
    }

    #[test]
    fn monomial_g_is_one() {
        let d = atwood().decompose().unwrap();
        let g = d.reconstruct_g(&ScalarFn::monomial(d.y.clone())).unwrap();
        for w in [0.3, 1.0, 7.0] {
            assert!((g.call(&[w]).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn labels() {
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        assert_eq!(monomial_label(&names, &[int(0), int(-1), int(-2)]), "1/(b*c^2)");
        assert_eq!(monomial_label(&names, &[int(2), ratio(-1, 2), int(0)]), "a^2/b^(1/2)");
    }

    #[test]
    fn rejects_bad_problems() {
        assert!(DimensionProblem::new(vec![], Variable::new("q", mks(&[0, 0, 0]))).is_err());
        let dup = vec![Variable::new("a", mks(&[1, 0, 0])), Variable::new("a", mks(&[0, 1, 0]))];
        assert!(DimensionProblem::new(dup, Variable::new("q", mks(&[0, 0, 0]))).is_err());
        let si = Dimension::from_ints(&Basis::si(), &[1, 0, 0, 0, 0, 0, 0]).unwrap();
        assert!(matches!(
            DimensionProblem::new(vec![Variable::new("a", si)], Variable::new("q", mks(&[0, 0, 0]))),
            Err(Error::BasisMismatch { .. })
        ));
        assert!(matches!(
            pendulum().with_candidate(Expr::parse("x*l").unwrap()),
            Err(Error::UnknownIdentifier(_))
        ));
    }

    #[test]
    fn overriding_exponents_sets_delta() {
        let d = pendulum().decompose().unwrap().with_exponents(vec![0.0, 0.5, -0.49]).unwrap();
        assert!((d.delta - 0.02).abs() < 1e-12);
        assert!(!d.is_exact());
        assert_eq!(d.template, "T = C * l^(0.5) * g^(-0.49)");
    }
}
