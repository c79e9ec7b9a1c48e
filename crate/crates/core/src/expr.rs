//! Closed-form scalar expressions in the chart coordinates `x0..x{n-1}`.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := power (('*' | '/') power)*
//! power   := unary ('^' rational)?
//! unary   := '-' unary | atom
//! atom    := number | 'x' digits | fn '(' sum ')' | 'pow' '(' sum ',' rational ')' | '(' sum ')'
//! ```
//!
//! Unary minus binds tighter than `^`, so `-x0^2` is `(-x0)^2`.

use std::fmt;

use crate::error::{Error, Result};
use crate::jets::{Jet, Univariate};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn univariate(self) -> Univariate {
        match self {
            Func::Exp => Univariate::Exp,
            Func::Log => Univariate::Log,
            Func::Sin => Univariate::Sin,
            Func::Cos => Univariate::Cos,
            Func::Sqrt => Univariate::Sqrt,
        }
    }

    fn eval(self, x: f64) -> Result<f64> {
        match self {
            Func::Exp => Ok(x.exp()),
            Func::Sin => Ok(x.sin()),
            Func::Cos => Ok(x.cos()),
            Func::Log if x > 0.0 => Ok(x.ln()),
            Func::Sqrt if x > 0.0 => Ok(x.sqrt()),
            _ => Err(Error::Domain(format!("{} of non-positive value {x}", self.name()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Coord(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn parse(text: &str) -> Result<Expr> {
        let mut p = Parser {
            chars: text.chars().collect(),
            pos: 0,
            open: Vec::new(),
        };
        p.skip_ws();
        if p.pos == p.chars.len() {
            return Err(p.error("empty expression"));
        }
        let e = p.sum()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.error(&format!("unexpected `{}`", p.chars[p.pos])));
        }
        Ok(e)
    }

    /// Parses and checks that every coordinate index is below `dim`.
    pub fn parse_in(text: &str, dim: usize) -> Result<Expr> {
        let e = Expr::parse(text)?;
        if let Some(i) = e.coords().into_iter().find(|&i| i >= dim) {
            return Err(Error::UnknownIdentifier(format!("x{i} (chart has {dim} coordinates)")));
        }
        Ok(e)
    }

    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn coord(i: usize) -> Expr {
        Expr::Coord(i)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, r: f64) -> Expr {
        Expr::Pow(Box::new(a), r)
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    /// Sorted, deduplicated coordinate indices used by the expression.
    pub fn coords(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_coords(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_coords(&self, out: &mut Vec<usize>) {
        match self {
            Expr::Const(_) => {}
            Expr::Coord(i) => out.push(*i),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_coords(out);
                b.collect_coords(out);
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.collect_coords(out),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Coord(i) => *x.get(*i).ok_or_else(|| {
                Error::DimensionMismatch(format!("coordinate x{i} outside a {}-point", x.len()))
            })?,
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => {
                let d = b.eval(x)?;
                if d == 0.0 {
                    return Err(Error::Domain("division by zero".into()));
                }
                a.eval(x)? / d
            }
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Pow(a, r) => {
                let b = a.eval(x)?;
                if r.fract() == 0.0 {
                    if b == 0.0 && *r < 0.0 {
                        return Err(Error::Domain(format!("negative power {r} of zero")));
                    }
                    b.powi(*r as i32)
                } else if b > 0.0 {
                    b.powf(*r)
                } else {
                    return Err(Error::Domain(format!("power {r} of non-positive value {b}")));
                }
            }
            Expr::Call(f, a) => f.eval(a.eval(x)?)?,
        })
    }

    /// Evaluates over jets. `coord` supplies the jet of each coordinate function
    /// and `constant` builds constant jets in the same space.
    pub fn eval_jet(&self, coord: &dyn Fn(usize) -> Jet, constant: &dyn Fn(f64) -> Jet) -> Result<Jet> {
        Ok(match self {
            Expr::Const(c) => constant(*c),
            Expr::Coord(i) => coord(*i),
            Expr::Add(a, b) => a.eval_jet(coord, constant)?.add(&b.eval_jet(coord, constant)?)?,
            Expr::Sub(a, b) => a.eval_jet(coord, constant)?.sub(&b.eval_jet(coord, constant)?)?,
            Expr::Mul(a, b) => match (&**a, &**b) {
                (Expr::Const(c), e) | (e, Expr::Const(c)) => e.eval_jet(coord, constant)?.scale(*c),
                _ => a.eval_jet(coord, constant)?.mul(&b.eval_jet(coord, constant)?)?,
            },
            Expr::Div(a, b) => {
                let d = b.eval_jet(coord, constant)?;
                if d.value() == 0.0 {
                    return Err(Error::Domain("division by zero".into()));
                }
                a.eval_jet(coord, constant)?.div(&d)?
            }
            Expr::Neg(a) => a.eval_jet(coord, constant)?.scale(-1.0),
            Expr::Pow(a, r) => {
                let b = a.eval_jet(coord, constant)?;
                if r.fract() == 0.0 && *r >= 0.0 {
                    b.powi(*r as i32)?
                } else {
                    b.apply(Univariate::Pow(*r))?
                }
            }
            Expr::Call(f, a) => a.eval_jet(coord, constant)?.apply(f.univariate())?,
        })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => write!(f, "(-{})", -c),
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Coord(i) => write!(f, "x{i}"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Pow(a, r) => write!(f, "pow({a}, {r})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    open: Vec<usize>,
}

impl Parser {
    fn error(&self, message: &str) -> Error {
        // at end of input inside parentheses, point at the innermost unclosed one
        let column = match (self.pos >= self.chars.len(), self.open.last()) {
            (true, Some(&p)) => p + 1,
            _ => self.pos + 1,
        };
        Error::Parse {
            line: 1,
            column,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn open_paren(&mut self) -> Result<()> {
        if self.peek() != Some('(') {
            return Err(self.error("expected `(`"));
        }
        self.open.push(self.pos);
        self.pos += 1;
        Ok(())
    }

    fn close_paren(&mut self) -> Result<()> {
        if !self.eat(')') {
            let msg = if self.pos >= self.chars.len() {
                "unclosed `(`"
            } else {
                "expected `)`"
            };
            return Err(self.error(msg));
        }
        self.open.pop();
        Ok(())
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut e = self.product()?;
        loop {
            if self.eat('+') {
                e = Expr::Add(Box::new(e), Box::new(self.product()?));
            } else if self.eat('-') {
                e = Expr::Sub(Box::new(e), Box::new(self.product()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut e = self.power()?;
        loop {
            if self.eat('*') {
                e = Expr::Mul(Box::new(e), Box::new(self.power()?));
            } else if self.eat('/') {
                e = Expr::Div(Box::new(e), Box::new(self.power()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.unary()?;
        if self.eat('^') {
            let r = if self.peek() == Some('(') {
                self.open_paren()?;
                let r = self.rational()?;
                self.close_paren()?;
                r
            } else {
                self.rational()?
            };
            return Ok(Expr::Pow(Box::new(base), r));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    /// `[-] number [/ number]`
    fn rational(&mut self) -> Result<f64> {
        let neg = self.eat('-');
        let mut r = self.number()?;
        if self.eat('/') {
            let d = self.number()?;
            if d == 0.0 {
                return Err(self.error("zero denominator in exponent"));
            }
            r /= d;
        }
        Ok(if neg { -r } else { r })
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let digits = |p: &mut Parser| {
            let s = p.pos;
            while p.pos < p.chars.len() && p.chars[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos > s
        };
        let mut any = digits(self);
        if self.pos < self.chars.len() && self.chars[self.pos] == '.' {
            self.pos += 1;
            any |= digits(self);
        }
        if !any {
            self.pos = start;
            return Err(if start >= self.chars.len() {
                self.error("expected a number, found end of input")
            } else {
                self.error("expected a number")
            });
        }
        if self.pos < self.chars.len() && matches!(self.chars[self.pos], 'e' | 'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.chars.len() && matches!(self.chars[self.pos], '+' | '-') {
                self.pos += 1;
            }
            if !digits(self) {
                self.pos = save;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>().map_err(|_| {
            self.pos = start;
            self.error("malformed number")
        })
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some('(') => {
                self.open_paren()?;
                let e = self.sum()?;
                self.close_paren()?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => Ok(Expr::Const(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let start = self.pos;
                while self.pos < self.chars.len()
                    && (self.chars[self.pos].is_ascii_alphanumeric() || self.chars[self.pos] == '_')
                {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                if let Some(rest) = name.strip_prefix('x') {
                    if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                        return rest
                            .parse()
                            .map(Expr::Coord)
                            .map_err(|_| Error::UnknownIdentifier(name.clone()));
                    }
                }
                if name == "pow" {
                    self.open_paren()?;
                    let base = self.sum()?;
                    if !self.eat(',') {
                        return Err(self.error("expected `,` in pow"));
                    }
                    let r = self.rational()?;
                    self.close_paren()?;
                    return Ok(Expr::Pow(Box::new(base), r));
                }
                match Func::from_name(&name) {
                    Some(f) => {
                        self.open_paren()?;
                        let arg = self.sum()?;
                        self.close_paren()?;
                        Ok(Expr::Call(f, Box::new(arg)))
                    }
                    None => Err(Error::UnknownIdentifier(name)),
                }
            }
            Some(c) => Err(self.error(&format!("unexpected `{c}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(text: &str) -> usize {
        match Expr::parse(text) {
            Err(Error::Parse { column, .. }) => column,
            other => panic!("expected parse error for {text:?}, got {other:?}"),
        }
    }

    #[test]
    fn constant_entry() {
        assert_eq!(Expr::parse("1").unwrap(), Expr::Const(1.0));
        assert_eq!(Expr::parse(" 2.5e-1 ").unwrap(), Expr::Const(0.25));
    }

    #[test]
    fn stereographic_entry() {
        let e = Expr::parse("4/pow(1 + x0*x0 + x1*x1, 2)").unwrap();
        assert_eq!(e.coords(), vec![0, 1]);
        let v = e.eval(&[1.0, 0.0]).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn malformed_inputs_report_columns() {
        assert_eq!(column("exp("), 4);
        assert_eq!(column("1 +"), 4);
        assert_eq!(column("x0 ) "), 4);
        assert_eq!(column("(x0 + (x1"), 7);
        assert_eq!(column("2 $ 3"), 3);
    }

    #[test]
    fn unknown_identifier() {
        assert!(matches!(Expr::parse("y1 + 1"), Err(Error::UnknownIdentifier(_))));
        assert!(matches!(Expr::parse("tan(x0)"), Err(Error::UnknownIdentifier(_))));
        assert!(matches!(Expr::parse_in("x3", 3), Err(Error::UnknownIdentifier(_))));
    }

    #[test]
    fn precedence() {
        let x = [2.0, 3.0];
        let v = |s: &str| Expr::parse(s).unwrap().eval(&x).unwrap();
        assert_eq!(v("1 + x0 * x1"), 7.0);
        assert_eq!(v("x1 - x0 - 1"), 0.0);
        assert_eq!(v("x1 / x0 / 2"), 0.75);
        assert_eq!(v("-x0^2"), 4.0);
        assert_eq!(v("0 - x0^2"), -4.0);
        assert_eq!(v("2 * x0^3"), 16.0);
        assert_eq!(v("x0^(-1/2)"), 2f64.powf(-0.5));
        assert_eq!(v("pow(x1, 1/2)"), 3f64.sqrt());
    }

    #[test]
    fn printer_round_trips() {
        for s in [
            "4/pow(1 + x0*x0 + x1*x1, 2)",
            "-x0^2 - exp(-0.1*x1) * sqrt(2 + sin(x0))",
            "log(3 + cos(x1)) / (x0 - 7) ^ 3",
            "1e-3 * x0 * x1 - 0.3333333333333333",
        ] {
            let e = Expr::parse(s).unwrap();
            let again = Expr::parse(&e.to_string()).unwrap();
            assert_eq!(e, again, "{s}");
        }
    }

    #[test]
    fn domain_errors() {
        let e = Expr::parse("log(x0)").unwrap();
        assert!(matches!(e.eval(&[-1.0]), Err(Error::Domain(_))));
        let e = Expr::parse("1/x0").unwrap();
        assert!(matches!(e.eval(&[0.0]), Err(Error::Domain(_))));
    }
}
