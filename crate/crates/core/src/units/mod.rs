//! Unit registry and unit-expression parser.
//!
//! The registry is loaded from two bundled CSV files: `units.csv` holds the
//! SI base units, the named derived units, a handful of common non-SI units
//! and `g` (so that `mg`, `µg` resolve); `prefixes.csv` holds the decimal SI
//! prefixes. Grammar of unit expressions (see `docs/grammar.md`):
//!
//! ```text
//! expr     = [ term { op term } ] ;          (* empty means dimensionless *)
//! op       = "." | "·" | "*" | "/" ;         (* left associative, equal precedence *)
//! term     = primary [ "^" exponent | superscript ] ;
//! primary  = number | atom | "(" expr ")" ;
//! exponent = [ "+" | "-" ] digits [ "/" digits ]
//!          | "(" [ "+" | "-" ] digits [ "/" [ "-" ] digits ] ")" ;
//! atom     = letter { letter } ;             (* [prefix] symbol *)
//! ```

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use num_traits::{ToPrimitive, Zero};
use serde::Deserialize;

use crate::dim::{Basis, Dimension, Quantity, SI_BASE};
use crate::error::{Error, Result};
use crate::rational::{int, Rational};

const UNITS_CSV: &str = include_str!("units.csv");
const PREFIXES_CSV: &str = include_str!("prefixes.csv");

#[derive(Clone, Debug, PartialEq)]
pub struct UnitDef {
    pub symbol: String,
    pub name: String,
    /// Over the SI basis.
    pub dimension: Dimension,
    /// Value of one unit in unprefixed SI base units.
    pub si_factor: f64,
    pub prefixable: bool,
    pub source: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrefixDef {
    pub symbol: String,
    pub name: String,
    pub power: i32,
    pub factor: f64,
}

/// Dimension (over the SI basis) and multiplier to SI base units of a unit
/// expression.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedUnit {
    pub dimension: Dimension,
    pub factor: f64,
}

impl ParsedUnit {
    fn one() -> Self {
        Self { dimension: Dimension::dimensionless(&Basis::si()), factor: 1.0 }
    }

    fn mul(&self, other: &ParsedUnit) -> ParsedUnit {
        ParsedUnit {
            dimension: self.dimension.add(&other.dimension).expect("SI basis"),
            factor: self.factor * other.factor,
        }
    }

    fn pow(&self, e: &Rational) -> ParsedUnit {
        let factor = match e.to_integer().to_i32() {
            Some(i) if e.is_integer() => self.factor.powi(i),
            _ => self.factor.powf(crate::rational::to_f64(e)),
        };
        ParsedUnit { dimension: self.dimension.scale(e), factor }
    }

    /// Re-expresses the dimension over `basis`, whose units must be SI base
    /// symbols. Fails if the expression uses a base unit missing from `basis`.
    pub fn project(&self, basis: &Basis) -> Result<Dimension> {
        let mut exps = vec![Rational::zero(); basis.len()];
        for (sym, e) in SI_BASE.iter().zip(self.dimension.exponents()) {
            if e.is_zero() {
                continue;
            }
            match basis.position(sym) {
                Some(i) => exps[i] = e.clone(),
                None => {
                    return Err(Error::InvalidArgument(format!(
                        "unit uses base unit `{sym}` which is not in the basis [{}]",
                        basis.units().join(",")
                    )))
                }
            }
        }
        Dimension::new(basis, exps)
    }
}

impl fmt::Display for ParsedUnit {
    /// Canonical form, parseable back to the same dimension and factor.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = self.dimension.symbolic();
        match (self.factor == 1.0, sym.as_str()) {
            (true, s) => f.write_str(s),
            (false, "1") => write!(f, "{:e}", self.factor),
            (false, s) => write!(f, "{:e}*{s}", self.factor),
        }
    }
}

#[derive(Deserialize)]
struct UnitRecord {
    symbol: String,
    name: String,
    m: String,
    kg: String,
    s: String,
    #[serde(rename = "A")]
    a: String,
    #[serde(rename = "K")]
    k: String,
    mol: String,
    cd: String,
    factor: f64,
    prefixable: bool,
    source: String,
}

#[derive(Deserialize)]
struct PrefixRecord {
    symbol: String,
    name: String,
    power: i32,
}

/// Immutable unit and prefix tables.
#[derive(Debug)]
pub struct Registry {
    units: Vec<UnitDef>,
    by_symbol: HashMap<String, usize>,
    prefixes: Vec<PrefixDef>,
}

impl Registry {
    /// The bundled registry, built on first use.
    pub fn builtin() -> &'static Registry {
        static REGISTRY: OnceLock<Registry> = OnceLock::new();
        REGISTRY
            .get_or_init(|| Registry::from_csv(UNITS_CSV, PREFIXES_CSV).expect("bundled registry is valid"))
    }

    pub fn from_csv(units_csv: &str, prefixes_csv: &str) -> Result<Registry> {
        let reg_err = |e: csv::Error| Error::Registry(e.to_string());
        let si = Basis::si();

        let mut units = Vec::new();
        let mut by_symbol = HashMap::new();
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(units_csv.as_bytes());
        for rec in rdr.deserialize::<UnitRecord>() {
            let r = rec.map_err(reg_err)?;
            let exps = [&r.m, &r.kg, &r.s, &r.a, &r.k, &r.mol, &r.cd]
                .iter()
                .map(|e| crate::rational::parse_rational(e))
                .collect::<Result<Vec<_>>>()?;
            if !(r.factor.is_finite() && r.factor > 0.0) {
                return Err(Error::Registry(format!("unit `{}` has factor {}", r.symbol, r.factor)));
            }
            if by_symbol.insert(r.symbol.clone(), units.len()).is_some() {
                return Err(Error::Registry(format!("duplicate unit `{}`", r.symbol)));
            }
            units.push(UnitDef {
                dimension: Dimension::new(&si, exps)?,
                symbol: r.symbol,
                name: r.name,
                si_factor: r.factor,
                prefixable: r.prefixable,
                source: r.source,
            });
        }

        let mut prefixes = Vec::new();
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(prefixes_csv.as_bytes());
        for rec in rdr.deserialize::<PrefixRecord>() {
            let r = rec.map_err(reg_err)?;
            // 1eN parses to the nearest double, unlike 10f64.powi(N)
            let factor: f64 = format!("1e{}", r.power).parse().expect("float literal");
            prefixes.push(PrefixDef { symbol: r.symbol, name: r.name, power: r.power, factor });
        }
        Ok(Registry { units, by_symbol, prefixes })
    }

    pub fn units(&self) -> &[UnitDef] {
        &self.units
    }

    pub fn prefixes(&self) -> &[PrefixDef] {
        &self.prefixes
    }

    pub fn lookup(&self, symbol: &str) -> Result<&UnitDef> {
        self.by_symbol
            .get(symbol)
            .map(|&i| &self.units[i])
            .ok_or_else(|| Error::UnknownUnit(symbol.to_string()))
    }

    pub fn prefix(&self, symbol: &str) -> Option<&PrefixDef> {
        self.prefixes.iter().find(|p| p.symbol == symbol)
    }

    /// Resolves `[prefix]symbol`. A full registered symbol always wins; among
    /// prefix splits the one leaving the longest unit symbol is taken.
    pub fn resolve_atom(&self, atom: &str) -> Result<(Option<&PrefixDef>, &UnitDef)> {
        if let Ok(u) = self.lookup(atom) {
            return Ok((None, u));
        }
        for (i, _) in atom.char_indices().skip(1) {
            let (p, rest) = atom.split_at(i);
            if let (Some(prefix), Ok(unit)) = (self.prefix(p), self.lookup(rest)) {
                if unit.prefixable {
                    return Ok((Some(prefix), unit));
                }
            }
        }
        Err(Error::UnknownUnit(atom.to_string()))
    }

    pub fn parse(&self, expr: &str) -> Result<ParsedUnit> {
        UnitParser { reg: self, src: expr, pos: 0 }.parse()
    }
}

pub fn lookup(symbol: &str) -> Result<&'static UnitDef> {
    Registry::builtin().lookup(symbol)
}

pub fn parse_unit(expr: &str) -> Result<ParsedUnit> {
    Registry::builtin().parse(expr)
}

/// `value` in the unit `expr`, as a quantity over the SI basis.
pub fn quantity_of(value: f64, expr: &str) -> Result<Quantity> {
    let u = parse_unit(expr)?;
    Ok(Quantity::canonical(value * u.factor, &u.dimension))
}

struct UnitParser<'a> {
    reg: &'a Registry,
    src: &'a str,
    pos: usize,
}

const SUPERSCRIPTS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];

impl UnitParser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::UnitSyntax { pos: self.pos, msg: msg.into() })
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn parse(mut self) -> Result<ParsedUnit> {
        self.skip_ws();
        if self.peek().is_none() {
            return Ok(ParsedUnit::one());
        }
        let u = self.expr()?;
        self.skip_ws();
        match self.peek() {
            None => Ok(u),
            Some(')') => self.err("unbalanced `)`"),
            Some(c) => self.err(format!("expected operator, found `{c}`")),
        }
    }

    fn expr(&mut self) -> Result<ParsedUnit> {
        let mut acc = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('.' | '·' | '*') => {
                    self.bump();
                    acc = acc.mul(&self.term()?);
                }
                Some('/') => {
                    self.bump();
                    acc = acc.mul(&self.term()?.pow(&int(-1)));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<ParsedUnit> {
        let base = self.primary()?;
        match self.peek() {
            Some('^') => {
                self.bump();
                let e = self.exponent()?;
                Ok(base.pow(&e))
            }
            Some(c) if c == '⁻' || SUPERSCRIPTS.contains(&c) => {
                let e = self.superscript()?;
                Ok(base.pow(&e))
            }
            _ => Ok(base),
        }
    }

    fn primary(&mut self) -> Result<ParsedUnit> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.bump();
                let inner = self.expr()?;
                self.skip_ws();
                if self.bump() != Some(')') {
                    return self.err("expected `)`");
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_alphabetic() => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_alphabetic() && !SUPERSCRIPTS.contains(&c)) {
                    self.bump();
                }
                let atom = &self.src[start..self.pos];
                let (prefix, unit) = self.reg.resolve_atom(atom)?;
                Ok(ParsedUnit {
                    dimension: unit.dimension.clone(),
                    factor: prefix.map_or(1.0, |p| p.factor) * unit.si_factor,
                })
            }
            Some(c) => self.err(format!("unexpected `{c}`")),
            None => self.err("unexpected end of expression"),
        }
    }

    fn number(&mut self) -> Result<ParsedUnit> {
        let start = self.pos;
        self.digits();
        let rest = &self.src[self.pos..];
        if rest.starts_with('.') && rest[1..].starts_with(|c: char| c.is_ascii_digit()) {
            self.bump();
            self.digits();
        }
        let rest = &self.src[self.pos..];
        if let Some(tail) = rest.strip_prefix(['e', 'E']) {
            let tail = tail.strip_prefix(['+', '-']).unwrap_or(tail);
            if tail.starts_with(|c: char| c.is_ascii_digit()) {
                self.pos = self.src.len() - tail.len();
                self.digits();
            }
        }
        let text = &self.src[start..self.pos];
        match text.parse::<f64>() {
            Ok(x) if x.is_finite() && x > 0.0 => Ok(ParsedUnit { factor: x, ..ParsedUnit::one() }),
            _ => self.err(format!("numeric factor `{text}` must be positive and finite")),
        }
    }

    fn digits(&mut self) -> &str {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        &self.src[start..self.pos]
    }

    fn signed_int(&mut self) -> Result<Rational> {
        let negative = match self.peek() {
            Some('-') => {
                self.bump();
                true
            }
            Some('+') => {
                self.bump();
                false
            }
            _ => false,
        };
        let d = self.digits();
        if d.is_empty() {
            return self.err("malformed exponent");
        }
        let n: Rational = crate::rational::parse_rational(d)?;
        Ok(if negative { -n } else { n })
    }

    fn exponent(&mut self) -> Result<Rational> {
        let paren = self.peek() == Some('(');
        if paren {
            self.bump();
            self.skip_ws();
        }
        let mut e = self.signed_int()?;
        let rest = &self.src[self.pos..];
        if rest.starts_with('.') && rest[1..].starts_with(|c: char| c.is_ascii_digit()) {
            return self.err("decimal exponents are not allowed; write a fraction like 3/2");
        }
        // `m^3/2` is a rational exponent; `m^2/s` is a quotient
        let rest = &self.src[self.pos..];
        let slash_digit = rest.starts_with('/')
            && rest[1..].starts_with(|c: char| c.is_ascii_digit() || (paren && c == '-'));
        if slash_digit {
            self.bump();
            let d = self.signed_int()?;
            if d.is_zero() {
                return self.err("zero denominator in exponent");
            }
            e /= d;
        }
        if paren {
            self.skip_ws();
            if self.bump() != Some(')') {
                return self.err("expected `)` after exponent");
            }
        }
        Ok(e)
    }

    fn superscript(&mut self) -> Result<Rational> {
        let negative = self.peek() == Some('⁻');
        if negative {
            self.bump();
        }
        let mut n = 0i64;
        let mut any = false;
        while let Some(d) = self.peek().and_then(|c| SUPERSCRIPTS.iter().position(|&s| s == c)) {
            self.bump();
            n = n * 10 + d as i64;
            any = true;
        }
        if !any {
            return self.err("malformed superscript exponent");
        }
        Ok(int(if negative { -n } else { n }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn si(e: &[i64]) -> Dimension {
        Dimension::from_ints(&Basis::si(), e).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
    }

    #[test]
    fn newton() {
        let u = parse_unit("N").unwrap();
        assert_eq!(u.dimension, si(&[1, 1, -2, 0, 0, 0, 0]));
        assert_eq!(u.factor, 1.0);
    }

    #[test]
    fn cubic_centimetre() {
        let u = parse_unit("cm^3").unwrap();
        assert_eq!(u.dimension, si(&[3, 0, 0, 0, 0, 0, 0]));
        assert!(close(u.factor, 1e-6));
    }

    #[test]
    fn kilowatt_hour() {
        let u = parse_unit("kW.h").unwrap();
        assert_eq!(u.dimension, si(&[2, 1, -2, 0, 0, 0, 0]));
        assert!(close(u.factor, 3.6e6));
        assert_eq!(parse_unit("kW·h").unwrap(), u);
        assert_eq!(parse_unit("kW*h").unwrap(), u);
    }

    #[test]
    fn dimensionless_forms() {
        for s in ["1", "", "  "] {
            let u = parse_unit(s).unwrap();
            assert!(u.dimension.is_dimensionless(), "{s}");
            assert_eq!(u.factor, 1.0);
        }
    }

    #[test]
    fn lookups() {
        let ly = lookup("ly").unwrap();
        assert_eq!(ly.si_factor, 9.46073e15);
        assert_eq!(ly.dimension, si(&[1, 0, 0, 0, 0, 0, 0]));
        assert_eq!(lookup("m").unwrap().si_factor, 1.0);
        let ev = lookup("eV").unwrap();
        assert_eq!(ev.si_factor, 1.60218e-19);
        assert_eq!(ev.dimension, si(&[2, 1, -2, 0, 0, 0, 0]));
        assert_eq!(lookup("furlong").unwrap_err(), Error::UnknownUnit("furlong".into()));
    }

    #[test]
    fn quantities() {
        let q = quantity_of(2.0, "min").unwrap();
        assert_eq!(q.value(), 120.0);
        assert_eq!(q.dimension(), &si(&[0, 0, 1, 0, 0, 0, 0]));
        assert_eq!(quantity_of(1.0, "m").unwrap().value(), 1.0);
        let atm = quantity_of(1.0, "atm").unwrap();
        assert_eq!(atm.value(), 101325.0);
        assert_eq!(atm.dimension(), &si(&[-1, 1, -2, 0, 0, 0, 0]));
        assert!(quantity_of(1.0, "zz").is_err());
    }

    #[test]
    fn tokenization_prefers_full_symbols() {
        assert_eq!(parse_unit("min").unwrap().factor, 60.0);
        assert_eq!(parse_unit("Pa").unwrap().factor, 1.0);
        assert_eq!(parse_unit("cd").unwrap().dimension, si(&[0, 0, 0, 0, 0, 0, 1]));
        assert_eq!(parse_unit("ha").unwrap().factor, 1e4);
        assert_eq!(parse_unit("T").unwrap().dimension, si(&[0, 1, -2, -1, 0, 0, 0]));
        assert!(close(parse_unit("TJ").unwrap().factor, 1e12));
        assert!(close(parse_unit("ms").unwrap().factor, 1e-3));
        assert!(close(parse_unit("dam").unwrap().factor, 10.0));
        assert!(close(parse_unit("keV").unwrap().factor, 1.60218e-16));
        assert!(close(parse_unit("mg").unwrap().factor, 1e-6));
        assert!(close(parse_unit("µm").unwrap().factor, 1e-6));
        assert!(close(parse_unit("Ma").unwrap().factor, 31557600e6));
        assert!(parse_unit("mkg").is_err());
    }

    #[test]
    fn operators_and_exponents() {
        let u = parse_unit("m/s^2").unwrap();
        assert_eq!(u.dimension, si(&[1, 0, -2, 0, 0, 0, 0]));
        // left-associative: (J/kg).K
        assert_eq!(parse_unit("J/kg.K").unwrap().dimension, si(&[2, 0, -2, 0, 1, 0, 0]));
        assert_eq!(parse_unit("J/(kg.K)").unwrap().dimension, si(&[2, 0, -2, 0, -1, 0, 0]));
        let half = parse_unit("m^1/2").unwrap();
        assert_eq!(half.dimension.exponents()[0], ratio(1, 2));
        assert_eq!(parse_unit("m^(-3/2)").unwrap().dimension.exponents()[0], ratio(-3, 2));
        assert_eq!(parse_unit("m^2/s").unwrap().dimension, si(&[2, 0, -1, 0, 0, 0, 0]));
        assert_eq!(parse_unit("s⁻¹").unwrap().dimension, si(&[0, 0, -1, 0, 0, 0, 0]));
        assert_eq!(parse_unit("m²").unwrap().dimension, si(&[2, 0, 0, 0, 0, 0, 0]));
        assert!(close(parse_unit("km^2").unwrap().factor, 1e6));
        assert!(close(parse_unit("3.6e6*J").unwrap().factor, 3.6e6));
    }

    #[test]
    fn malformed() {
        for s in ["m^", "m^x", "m^1/0", "(m", "m)", "m..s", "m s", "*m", "m^(1/2", "0*m", "m^1.5"] {
            assert!(parse_unit(s).is_err(), "{s}");
        }
        match parse_unit("m^x") {
            Err(Error::UnitSyntax { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn display_reparses() {
        for s in ["kW.h", "N", "cm^3", "1", "eV/K", "ly^1/2", "min^-1"] {
            let u = parse_unit(s).unwrap();
            let back = parse_unit(&u.to_string()).unwrap();
            assert_eq!(back.dimension, u.dimension, "{s} -> {u}");
            assert!(close(back.factor, u.factor), "{s} -> {u}");
        }
    }

    #[test]
    fn projection() {
        let u = parse_unit("m/s^2").unwrap();
        let d = u.project(&Basis::mks()).unwrap();
        assert_eq!(d, Dimension::from_ints(&Basis::mks(), &[1, 0, -2]).unwrap());
        assert!(parse_unit("A").unwrap().project(&Basis::mks()).is_err());
    }
}
