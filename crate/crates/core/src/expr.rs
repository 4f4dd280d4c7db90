//! A small arithmetic language for candidate functions.
//!
//! ```text
//! expr   = sum ;
//! sum    = prod { ("+" | "-") prod } ;
//! prod   = unary { ("*" | "/") unary } ;
//! unary  = "-" unary | power ;
//! power  = atom [ "^" rhs ] ;               (* right associative *)
//! rhs    = "-" rhs | power ;
//! atom   = number | "pi" | ident | func "(" expr ")" | "(" expr ")" ;
//! func   = "sqrt" | "abs" | "exp" | "log" | "sin" | "cos" ;
//! ```
//!
//! There is no implicit multiplication: `2l` is a syntax error.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::func::ScalarFn;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Abs,
    Exp,
    Log,
    Sin,
    Cos,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    fn apply(self, x: f64) -> Result<f64> {
        match self {
            Func::Sqrt if x < 0.0 => Err(Error::Domain(format!("sqrt of negative {x}"))),
            Func::Log if x <= 0.0 => Err(Error::Domain(format!("log of nonpositive {x}"))),
            Func::Sqrt => Ok(x.sqrt()),
            Func::Abs => Ok(x.abs()),
            Func::Exp => Ok(x.exp()),
            Func::Log => Ok(x.ln()),
            Func::Sin => Ok(x.sin()),
            Func::Cos => Ok(x.cos()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser { src, pos: 0 };
        let e = p.sum()?;
        p.skip_ws();
        if p.pos < src.len() {
            return p.err("expected operator or end of input");
        }
        Ok(e)
    }

    /// Variable names in order of first appearance.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Var(v) if !out.contains(v) => out.push(v.clone()),
            Expr::Neg(e) | Expr::Call(_, e) => e.collect_vars(out),
            Expr::Bin(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            _ => {}
        }
    }

    pub fn eval(&self, env: &HashMap<String, f64>) -> Result<f64> {
        self.eval_with(&|name| env.get(name).copied())
    }

    fn eval_with(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64> {
        let v = match self {
            Expr::Num(x) => *x,
            Expr::Pi => std::f64::consts::PI,
            Expr::Var(name) => lookup(name).ok_or_else(|| Error::UnknownIdentifier(name.clone()))?,
            Expr::Neg(e) => -e.eval_with(lookup)?,
            Expr::Call(f, e) => f.apply(e.eval_with(lookup)?)?,
            Expr::Bin(op, l, r) => binary(*op, l.eval_with(lookup)?, r.eval_with(lookup)?)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!("non-finite result in `{self}`")))
        }
    }

    /// Compiles to a function of the positional arguments `names`.
    pub fn bind(&self, names: &[String]) -> Result<ScalarFn> {
        let compiled = Compiled::from_expr(self, names)?;
        Ok(ScalarFn::new(names.len(), move |v| compiled.eval(v)))
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }

    fn write_min(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.prec() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x}"),
            Expr::Pi => f.write_str("pi"),
            Expr::Var(v) => f.write_str(v),
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.write_min(f, 3)
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Bin(op, l, r) => {
                let (sym, lmin, rmin) = match op {
                    BinOp::Add => (" + ", 1, 2),
                    BinOp::Sub => (" - ", 1, 2),
                    BinOp::Mul => ("*", 2, 3),
                    BinOp::Div => ("/", 2, 3),
                    BinOp::Pow => ("^", 5, 4),
                };
                l.write_min(f, lmin)?;
                f.write_str(sym)?;
                r.write_min(f, rmin)
            }
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Expr> {
        Expr::parse(s)
    }
}

pub fn parse_expr(src: &str) -> Result<Expr> {
    Expr::parse(src)
}

pub fn eval_expr(e: &Expr, env: &HashMap<String, f64>) -> Result<f64> {
    e.eval(env)
}

fn binary(op: BinOp, a: f64, b: f64) -> Result<f64> {
    match op {
        BinOp::Add => Ok(a + b),
        BinOp::Sub => Ok(a - b),
        BinOp::Mul => Ok(a * b),
        BinOp::Div if b == 0.0 => Err(Error::Domain("division by zero".into())),
        BinOp::Div => Ok(a / b),
        BinOp::Pow => power(a, b),
    }
}

/// Real power. Positive bases take any exponent; zero takes positive
/// exponents; negative bases only integer exponents.
fn power(x: f64, y: f64) -> Result<f64> {
    if x > 0.0 {
        Ok(x.powf(y))
    } else if x == 0.0 {
        if y > 0.0 {
            Ok(0.0)
        } else if y == 0.0 {
            Ok(1.0)
        } else {
            Err(Error::Domain(format!("0^{y}")))
        }
    } else if y.fract() == 0.0 {
        Ok(x.powf(y))
    } else {
        Err(Error::Domain(format!("({x})^{y} with non-integer exponent")))
    }
}

/// Expression tree with variables replaced by argument positions.
#[derive(Debug)]
enum Compiled {
    Const(f64),
    Arg(usize),
    Neg(Box<Compiled>),
    Bin(BinOp, Box<Compiled>, Box<Compiled>),
    Call(Func, Box<Compiled>),
}

impl Compiled {
    fn from_expr(e: &Expr, names: &[String]) -> Result<Compiled> {
        Ok(match e {
            Expr::Num(x) => Compiled::Const(*x),
            Expr::Pi => Compiled::Const(std::f64::consts::PI),
            Expr::Var(v) => Compiled::Arg(
                names.iter().position(|n| n == v).ok_or_else(|| Error::UnknownIdentifier(v.clone()))?,
            ),
            Expr::Neg(a) => Compiled::Neg(Box::new(Self::from_expr(a, names)?)),
            Expr::Call(f, a) => Compiled::Call(*f, Box::new(Self::from_expr(a, names)?)),
            Expr::Bin(op, l, r) => {
                Compiled::Bin(*op, Box::new(Self::from_expr(l, names)?), Box::new(Self::from_expr(r, names)?))
            }
        })
    }

    fn eval(&self, v: &[f64]) -> Result<f64> {
        let x = match self {
            Compiled::Const(x) => *x,
            Compiled::Arg(i) => v[*i],
            Compiled::Neg(a) => -a.eval(v)?,
            Compiled::Call(f, a) => f.apply(a.eval(v)?)?,
            Compiled::Bin(op, l, r) => binary(*op, l.eval(v)?, r.eval(v)?)?,
        };
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::Domain("non-finite intermediate result".into()))
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::ExprSyntax { pos: self.pos, msg: msg.to_string() })
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut acc = self.prod()?;
        loop {
            let op = if self.eat(b'+') {
                BinOp::Add
            } else if self.eat(b'-') {
                BinOp::Sub
            } else {
                return Ok(acc);
            };
            acc = Expr::Bin(op, Box::new(acc), Box::new(self.prod()?));
        }
    }

    fn prod(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            let op = if self.eat(b'*') {
                BinOp::Mul
            } else if self.eat(b'/') {
                BinOp::Div
            } else {
                return Ok(acc);
            };
            acc = Expr::Bin(op, Box::new(acc), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let exp = self.power_rhs()?;
            Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)))
        } else {
            Ok(base)
        }
    }

    fn power_rhs(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            Ok(Expr::Neg(Box::new(self.power_rhs()?)))
        } else {
            self.power()
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.sum()?;
                if !self.eat(b')') {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Some(b) if b.is_ascii_digit() || b == b'.' => self.number(),
            Some(b) if b.is_ascii_alphabetic() || b == b'_' => {
                let start = self.pos;
                while self.peek().is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_') {
                    self.pos += 1;
                }
                let name = &self.src[start..self.pos];
                let after_name = self.pos;
                let call = self.eat(b'(');
                match (Func::from_name(name), call) {
                    (Some(f), true) => {
                        let arg = self.sum()?;
                        if !self.eat(b')') {
                            return self.err("expected `)` after function argument");
                        }
                        Ok(Expr::Call(f, Box::new(arg)))
                    }
                    (Some(_), false) => {
                        self.pos = after_name;
                        self.err("function name used without an argument")
                    }
                    (None, true) => {
                        self.pos = start;
                        self.err("unknown function")
                    }
                    (None, false) if name == "pi" => Ok(Expr::Pi),
                    (None, false) => Ok(Expr::Var(name.to_string())),
                }
            }
            Some(_) => self.err("unexpected character"),
            None => self.err("unexpected end of input"),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.peek().is_some_and(|b| b.is_ascii_digit()) {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.peek() == Some(b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return self.err("malformed number");
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let text = &self.src[start..self.pos];
        match text.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Expr::Num(x)),
            _ => {
                self.pos = start;
                self.err("number out of range")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, f64)]) -> HashMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn pendulum_formula() {
        let e = parse_expr("2*pi*sqrt(l/g)").unwrap();
        assert_eq!(e.variables(), vec!["l", "g"]);
        let v = e.eval(&env(&[("l", 1.0), ("g", 4.0)])).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn power_is_right_associative() {
        assert_eq!(parse_expr("2^3^2").unwrap().eval(&env(&[])).unwrap(), 512.0);
        assert_eq!(parse_expr("-2^2").unwrap().eval(&env(&[])).unwrap(), -4.0);
        assert_eq!(parse_expr("2^-1").unwrap().eval(&env(&[])).unwrap(), 0.5);
        assert_eq!(parse_expr("1-2-3").unwrap().eval(&env(&[])).unwrap(), -4.0);
        assert_eq!(parse_expr("8/2/2").unwrap().eval(&env(&[])).unwrap(), 2.0);
    }

    #[test]
    fn atwood_formula() {
        let e = parse_expr("sqrt(2*g*h*abs(m1-m2)/(m1+m2))").unwrap();
        assert_eq!(e.variables(), vec!["g", "h", "m1", "m2"]);
        let at = |m1, m2| e.eval(&env(&[("g", 9.81), ("h", 2.0), ("m1", m1), ("m2", m2)])).unwrap();
        assert_eq!(at(3.0, 3.0), 0.0);
        assert!((at(3.0, 1.0) - (9.81f64 * 2.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rational_power() {
        assert!((parse_expr("l^(1/2)").unwrap().eval(&env(&[("l", 9.0)])).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn syntax_errors() {
        for s in ["2l", "2*", "(1", "sqrt", "foo(1)", "1 2", "", "3+*4", "sqrt(1"] {
            assert!(matches!(parse_expr(s), Err(Error::ExprSyntax { .. })), "{s}");
        }
        match parse_expr("1 + $") {
            Err(Error::ExprSyntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn domain_errors() {
        let e = env(&[("x", -1.0), ("z", 0.0)]);
        for s in ["log(x)", "sqrt(x)", "z^-1", "1/z", "x^0.5", "log(z)", "exp(1000)"] {
            assert!(matches!(parse_expr(s).unwrap().eval(&e), Err(Error::Domain(_))), "{s}");
        }
        assert_eq!(parse_expr("x^2").unwrap().eval(&e).unwrap(), 1.0);
        assert_eq!(parse_expr("z^2").unwrap().eval(&e).unwrap(), 0.0);
    }

    #[test]
    fn missing_variable() {
        let e = parse_expr("a+b").unwrap();
        assert_eq!(e.eval(&env(&[("a", 1.0)])), Err(Error::UnknownIdentifier("b".into())));
        assert!(e.bind(&["a".to_string()]).is_err());
        let f = e.bind(&["b".to_string(), "a".to_string()]).unwrap();
        assert_eq!(f.call(&[2.0, 5.0]).unwrap(), 7.0);
    }

    #[test]
    fn display_round_trips() {
        for s in [
            "2*pi*sqrt(l/g)",
            "-(a + b)^2",
            "(-a)^2",
            "a - (b - c)",
            "a/(b*c)",
            "2^3^2",
            "(2^3)^2",
            "2^-x",
            "--x",
            "1e-7 + 1.5",
        ] {
            let e = parse_expr(s).unwrap();
            assert_eq!(parse_expr(&e.to_string()).unwrap(), e, "{s} -> {e}");
        }
    }
}
