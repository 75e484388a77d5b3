//! A small expression language for time-dependent coefficients.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := '-' factor | primary
//! primary := number | 't' | 'pi' | func '(' expr ')' | '(' expr ')'
//! func    := 'sin' | 'cos' | 'tan' | 'exp' | 'sqrt'
//! ```
//!
//! Expressions are immutable trees. They can be evaluated at any scalar
//! precision and differentiated symbolically with respect to `t`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

/// Expression tree over the single variable `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    pub fn zero() -> Self {
        Expr::Const(0.0)
    }

    pub fn one() -> Self {
        Expr::Const(1.0)
    }

    pub fn parse(source: &str) -> Result<Self> {
        Parser::new(source)?.parse_all()
    }

    /// Evaluates the expression at `t`.
    pub fn eval<T: Real>(&self, t: T) -> Result<T> {
        let v = match self {
            Expr::Const(c) => T::lit(*c),
            Expr::Var => t,
            Expr::Add(l, r) => l.eval(t)? + r.eval(t)?,
            Expr::Sub(l, r) => l.eval(t)? - r.eval(t)?,
            Expr::Mul(l, r) => l.eval(t)? * r.eval(t)?,
            Expr::Div(l, r) => {
                let num = l.eval(t)?;
                let den = r.eval(t)?;
                if den == T::zero() {
                    return Err(Error::domain(format!("division by zero in `{self}` at t = {t}")));
                }
                num / den
            }
            Expr::Neg(e) => -e.eval(t)?,
            Expr::Call(f, e) => {
                let x = e.eval(t)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Exp => x.exp(),
                    Func::Sqrt => {
                        if x < T::zero() {
                            return Err(Error::domain(format!(
                                "sqrt of negative argument in `{self}` at t = {t}"
                            )));
                        }
                        x.sqrt()
                    }
                }
            }
        };
        if !v.is_finite() {
            return Err(Error::domain(format!("non-finite value of `{self}` at t = {t}")));
        }
        Ok(v)
    }

    /// Symbolic derivative with respect to `t`. The result is not simplified.
    pub fn derivative(&self) -> Expr {
        use Expr::*;
        match self {
            Const(_) => Const(0.0),
            Var => Const(1.0),
            Add(l, r) => add(l.derivative(), r.derivative()),
            Sub(l, r) => sub(l.derivative(), r.derivative()),
            Mul(l, r) => add(mul(l.derivative(), (**r).clone()), mul((**l).clone(), r.derivative())),
            Div(l, r) => div(
                sub(mul(l.derivative(), (**r).clone()), mul((**l).clone(), r.derivative())),
                mul((**r).clone(), (**r).clone()),
            ),
            Neg(e) => Neg(Box::new(e.derivative())),
            Call(f, e) => {
                let inner = (**e).clone();
                let de = e.derivative();
                match f {
                    Func::Sin => mul(call(Func::Cos, inner), de),
                    Func::Cos => mul(Neg(Box::new(call(Func::Sin, inner))), de),
                    Func::Tan => div(de, mul(call(Func::Cos, inner.clone()), call(Func::Cos, inner))),
                    Func::Exp => mul(call(Func::Exp, inner), de),
                    Func::Sqrt => div(de, mul(Const(2.0), call(Func::Sqrt, inner))),
                }
            }
        }
    }

    /// Value of the expression if it does not depend on `t`.
    ///
    /// Products with a zero factor fold to zero even when the other factor
    /// depends on `t`.
    pub fn constant_value(&self) -> Option<f64> {
        use Expr::*;
        match self {
            Const(c) => Some(*c),
            Var => None,
            Add(l, r) => Some(l.constant_value()? + r.constant_value()?),
            Sub(l, r) => Some(l.constant_value()? - r.constant_value()?),
            Mul(l, r) => match (l.constant_value(), r.constant_value()) {
                (Some(a), _) if a == 0.0 => Some(0.0),
                (_, Some(b)) if b == 0.0 => Some(0.0),
                (Some(a), Some(b)) => Some(a * b),
                _ => None,
            },
            Div(l, r) => {
                let num = l.constant_value()?;
                let den = r.constant_value()?;
                (den != 0.0).then(|| num / den)
            }
            Neg(e) => Some(-e.constant_value()?),
            Call(f, e) => {
                let x = e.constant_value()?;
                let v = match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Exp => x.exp(),
                    Func::Sqrt => x.sqrt(),
                };
                v.is_finite().then_some(v)
            }
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        self.constant_value() == Some(0.0)
    }

    pub fn depth(&self) -> usize {
        use Expr::*;
        match self {
            Const(_) | Var => 1,
            Add(l, r) | Sub(l, r) | Mul(l, r) | Div(l, r) => 1 + l.depth().max(r.depth()),
            Neg(e) | Call(_, e) => 1 + e.depth(),
        }
    }
}

fn add(l: Expr, r: Expr) -> Expr {
    Expr::Add(Box::new(l), Box::new(r))
}

fn sub(l: Expr, r: Expr) -> Expr {
    Expr::Sub(Box::new(l), Box::new(r))
}

fn mul(l: Expr, r: Expr) -> Expr {
    Expr::Mul(Box::new(l), Box::new(r))
}

fn div(l: Expr, r: Expr) -> Expr {
    Expr::Div(Box::new(l), Box::new(r))
}

fn call(f: Func, e: Expr) -> Expr {
    Expr::Call(f, Box::new(e))
}

/// Parses `source` into an expression tree.
pub fn parse(source: &str) -> Result<Expr> {
    Expr::parse(source)
}

impl FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Expr::parse(s)
    }
}

/// Prints a fully parenthesized form that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var => f.write_str("t"),
            Expr::Add(l, r) => write!(f, "({l} + {r})"),
            Expr::Sub(l, r) => write!(f, "({l} - {r})"),
            Expr::Mul(l, r) => write!(f, "({l} * {r})"),
            Expr::Div(l, r) => write!(f, "({l} / {r})"),
            Expr::Neg(e) => write!(f, "-{e}"),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, start)),
            b'-' => out.push((Tok::Minus, start)),
            b'*' => out.push((Tok::Star, start)),
            b'/' => out.push((Tok::Slash, start)),
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b'0'..=b'9' => {
                let digits = |i: &mut usize| {
                    let s = *i;
                    while *i < bytes.len() && bytes[*i].is_ascii_digit() {
                        *i += 1;
                    }
                    *i > s
                };
                digits(&mut i);
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    if !digits(&mut i) {
                        return Err(Error::Parse {
                            offset: i,
                            expected: "digit after decimal point".into(),
                        });
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    i += 1;
                    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                        i += 1;
                    }
                    if !digits(&mut i) {
                        return Err(Error::Parse {
                            offset: i,
                            expected: "exponent digits".into(),
                        });
                    }
                }
                let value: f64 = src[start..i].parse().map_err(|_| Error::Parse {
                    offset: start,
                    expected: "number".into(),
                })?;
                out.push((Tok::Num(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                return Err(Error::Parse {
                    offset: start,
                    expected: "number, identifier, operator or parenthesis".into(),
                })
            }
        }
        i += 1;
    }
    Ok(out)
}

impl Parser {
    fn new(src: &str) -> Result<Self> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            end: src.len(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, o)| *o)
    }

    fn fail<T>(&self, expected: &str) -> Result<T> {
        Err(Error::Parse {
            offset: self.offset(),
            expected: expected.into(),
        })
    }

    fn parse_all(mut self) -> Result<Expr> {
        let e = self.expr()?;
        if self.peek().is_some() {
            return self.fail("operator or end of input");
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = add(lhs, self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    lhs = mul(lhs, self.factor()?);
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    lhs = div(lhs, self.factor()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if let Some(Tok::Minus) = self.peek() {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some(Tok::Ident(name)) => {
                if name == "t" {
                    self.pos += 1;
                    return Ok(Expr::Var);
                }
                if name == "pi" {
                    self.pos += 1;
                    return Ok(Expr::Const(std::f64::consts::PI));
                }
                let Some(func) = Func::from_name(&name) else {
                    return self.fail("'t', 'pi' or one of sin, cos, tan, exp, sqrt");
                };
                self.pos += 1;
                if self.peek() != Some(&Tok::LParen) {
                    return self.fail("'(' after function name");
                }
                self.pos += 1;
                let arg = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.fail("')'");
                }
                self.pos += 1;
                Ok(call(func, arg))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.fail("')'");
                }
                self.pos += 1;
                Ok(e)
            }
            _ => self.fail("expression"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn offset_of(src: &str) -> usize {
        match Expr::parse(src) {
            Err(Error::Parse { offset, .. }) => offset,
            other => panic!("expected parse error for {src:?}, got {other:?}"),
        }
    }

    #[test]
    fn literals_and_calls() {
        assert_eq!(Expr::parse("1").unwrap(), Expr::Const(1.0));
        assert_eq!(
            Expr::parse("sin(2*t)").unwrap(),
            call(Func::Sin, mul(Expr::Const(2.0), Expr::Var))
        );
        assert_eq!(Expr::parse("pi").unwrap(), Expr::Const(std::f64::consts::PI));
        assert_eq!(Expr::parse("2.5e-1").unwrap(), Expr::Const(0.25));
    }

    #[test]
    fn precedence_and_associativity() {
        // 1 - 2 - 3 is (1 - 2) - 3
        assert_eq!(Expr::parse("1 - 2 - 3").unwrap().eval(0.0).unwrap(), -4.0);
        assert_eq!(Expr::parse("8 / 4 / 2").unwrap().eval(0.0).unwrap(), 1.0);
        assert_eq!(Expr::parse("1 + 2 * 3").unwrap().eval(0.0).unwrap(), 7.0);
        assert_eq!(Expr::parse("(1 + 2) * 3").unwrap().eval(0.0).unwrap(), 9.0);
        assert_eq!(Expr::parse("-t*t").unwrap().eval(3.0).unwrap(), -9.0);
        assert_eq!(Expr::parse("--2").unwrap().eval(0.0).unwrap(), 2.0);
    }

    #[test]
    fn unbalanced_paren_offset() {
        assert_eq!(offset_of("sin("), 4);
        assert_eq!(offset_of(""), 0);
        assert_eq!(offset_of("(1 + t"), 6);
        assert_eq!(offset_of("1 +"), 3);
        assert_eq!(offset_of("foo(t)"), 0);
    }

    #[test]
    fn eval_examples() {
        let e = Expr::parse("sin(2*t)").unwrap();
        assert!((e.eval(std::f64::consts::FRAC_PI_4).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(Expr::parse("t*t+1").unwrap().eval(2.0).unwrap(), 5.0);
        assert!(matches!(Expr::parse("1/t").unwrap().eval(0.0), Err(Error::Domain(_))));
        assert!(matches!(
            Expr::parse("sqrt(t)").unwrap().eval(-1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            Expr::parse("exp(t)").unwrap().eval(1000.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn eval_in_single_precision() {
        let e = Expr::parse("cos(t) * exp(t)").unwrap();
        let v: f32 = e.eval(0.5f32).unwrap();
        assert!((v - (0.5f32.cos() * 0.5f32.exp())).abs() < 1e-6);
    }

    #[test]
    fn derivative_examples() {
        let d = Expr::parse("3.5").unwrap().derivative();
        assert_eq!(d, Expr::Const(0.0));
        let d = Expr::parse("t*t").unwrap().derivative();
        assert_eq!(d.eval(3.0).unwrap(), 6.0);
        let d = Expr::parse("exp(2*t)").unwrap().derivative();
        assert_eq!(d.eval(0.0).unwrap(), 2.0);
        let d = Expr::parse("tan(t)").unwrap().derivative();
        let c = 0.3f64.cos();
        assert!((d.eval(0.3).unwrap() - 1.0 / (c * c)).abs() < 1e-14);
        let d = Expr::parse("sqrt(t)").unwrap().derivative();
        assert!((d.eval(4.0f64).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn identically_zero_detection() {
        assert!(Expr::parse("0").unwrap().is_identically_zero());
        assert!(Expr::parse("0*sin(t)").unwrap().is_identically_zero());
        assert!(Expr::parse("1 - 1").unwrap().is_identically_zero());
        assert!(!Expr::parse("t - t").unwrap().is_identically_zero());
        assert!(!Expr::parse("1e-300").unwrap().is_identically_zero());
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..100.0).prop_map(Expr::Const),
            Just(Expr::Var),
            Just(Expr::Const(1e-7)),
        ];
        leaf.prop_recursive(5, 32, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(l, r)| add(l, r)),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| sub(l, r)),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| mul(l, r)),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| div(l, r)),
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (
                    prop_oneof![
                        Just(Func::Sin),
                        Just(Func::Cos),
                        Just(Func::Tan),
                        Just(Func::Exp),
                        Just(Func::Sqrt)
                    ],
                    inner
                )
                    .prop_map(|(f, e)| call(f, e)),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_roundtrip(e in arb_expr()) {
            let printed = e.to_string();
            let reparsed = Expr::parse(&printed).unwrap();
            prop_assert_eq!(&reparsed, &e);
            prop_assert_eq!(Expr::parse(&reparsed.to_string()).unwrap(), reparsed);
        }
    }
}
