//! Closed-form parameter rules.
//!
//! A rule is an arithmetic expression over the stage variables
//! `n, H, h, a, b, c, d, p, l, q, m` with `+ - * /`, parentheses and the
//! functions `ceil`, `floor`, `max`, `min`. Evaluation is exact over the
//! rationals; a rule used as a spacer count must produce a non-negative integer.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::ParseError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    N,
    BigH,
    SmallH,
    A,
    B,
    C,
    D,
    P,
    L,
    Q,
    M,
}

impl Var {
    pub const ALL: [Var; 11] = [
        Var::N,
        Var::BigH,
        Var::SmallH,
        Var::A,
        Var::B,
        Var::C,
        Var::D,
        Var::P,
        Var::L,
        Var::Q,
        Var::M,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Var::N => "n",
            Var::BigH => "H",
            Var::SmallH => "h",
            Var::A => "a",
            Var::B => "b",
            Var::C => "c",
            Var::D => "d",
            Var::P => "p",
            Var::L => "l",
            Var::Q => "q",
            Var::M => "m",
        }
    }

    fn from_name(s: &str) -> Option<Var> {
        Var::ALL.iter().copied().find(|v| v.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Ceil,
    Floor,
    Max,
    Min,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Ceil => "ceil",
            Func::Floor => "floor",
            Func::Max => "max",
            Func::Min => "min",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        match s {
            "ceil" => Some(Func::Ceil),
            "floor" => Some(Func::Floor),
            "max" => Some(Func::Max),
            "min" => Some(Func::Min),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Num(BigInt),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Variable bindings for one evaluation.
#[derive(Clone, Debug, Default)]
pub struct Env {
    values: [Option<BigRational>; 11],
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, var: Var, value: impl Into<BigInt>) -> &mut Self {
        self.values[var as usize] = Some(BigRational::from_integer(value.into()));
        self
    }

    pub fn get(&self, var: Var) -> Option<&BigRational> {
        self.values[var as usize].as_ref()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    Unbound(Var),
    DivisionByZero,
    EmptyCall(&'static str),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::Unbound(v) => write!(f, "variable `{}` is not available here", v.name()),
            EvalError::DivisionByZero => write!(f, "division by zero"),
            EvalError::EmptyCall(name) => write!(f, "`{name}` needs at least one argument"),
        }
    }
}

impl Expr {
    pub fn num(v: i64) -> Expr {
        Expr::Num(BigInt::from(v))
    }

    pub fn eval(&self, env: &Env) -> Result<BigRational, EvalError> {
        Ok(match self {
            Expr::Num(v) => BigRational::from_integer(v.clone()),
            Expr::Var(v) => env.get(*v).cloned().ok_or(EvalError::Unbound(*v))?,
            Expr::Neg(e) => -e.eval(env)?,
            Expr::Bin(op, l, r) => {
                let l = l.eval(env)?;
                let r = r.eval(env)?;
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        if r.is_zero() {
                            return Err(EvalError::DivisionByZero);
                        }
                        l / r
                    }
                }
            }
            Expr::Call(func, args) => {
                let mut vals = args.iter().map(|a| a.eval(env)).collect::<Result<Vec<_>, _>>()?;
                match func {
                    Func::Ceil => vals.remove(0).ceil(),
                    Func::Floor => vals.remove(0).floor(),
                    Func::Max => vals.into_iter().max().ok_or(EvalError::EmptyCall("max"))?,
                    Func::Min => vals.into_iter().min().ok_or(EvalError::EmptyCall("min"))?,
                }
            }
        })
    }

    /// Variables referenced anywhere in the expression.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => out.push(*v),
            Expr::Neg(e) => e.collect_vars(out),
            Expr::Bin(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(op, _, _) => op.precedence(),
            Expr::Neg(_) => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(e) => {
                if e.precedence() < 3 {
                    write!(f, "-({e})")
                } else {
                    write!(f, "-{e}")
                }
            }
            Expr::Bin(op, l, r) => {
                let p = op.precedence();
                if l.precedence() < p {
                    write!(f, "({l})")?;
                } else {
                    write!(f, "{l}")?;
                }
                write!(f, "{}", op.symbol())?;
                // Left associative: an equal-precedence right operand keeps its parentheses.
                if r.precedence() <= p {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
}

fn tokenize(input: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let chars: Vec<char> = input.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Tok::Num(s.parse().map_err(|_| format!("bad number `{s}`"))?));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else {
            out.push(match c {
                '+' | '-' | '*' | '/' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                _ => return Err(format!("unexpected character `{c}`")),
            });
            i += 1;
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), String> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(format!("expected {want:?}, found {t:?}")),
            None => Err(format!("expected {want:?}, found end of input")),
        }
    }

    fn expr(&mut self) -> Result<Expr, String> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, String> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, String> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, String> {
        match self.next() {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                if let Some(func) = Func::from_name(&name) {
                    self.expect(Tok::LParen)?;
                    let mut args = vec![self.expr()?];
                    while let Some(Tok::Comma) = self.peek() {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen)?;
                    match (func, args.len()) {
                        (Func::Ceil | Func::Floor, 1) | (Func::Max | Func::Min, _) => Ok(Expr::Call(func, args)),
                        _ => Err(format!("`{name}` takes exactly one argument")),
                    }
                } else if let Some(v) = Var::from_name(&name) {
                    Ok(Expr::Var(v))
                } else {
                    Err(format!("unknown name `{name}`"))
                }
            }
            Some(t) => Err(format!("unexpected token {t:?}")),
            None => Err("unexpected end of input".to_string()),
        }
    }
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let wrap = |message: String| ParseError::Expr {
            input: input.to_string(),
            message,
        };
        let toks = tokenize(input).map_err(wrap)?;
        if toks.is_empty() {
            return Err(wrap("empty expression".into()));
        }
        let mut p = Parser { toks, pos: 0 };
        let e = p.expr().map_err(wrap)?;
        if p.pos != p.toks.len() {
            return Err(wrap(format!("trailing input at token {}", p.pos)));
        }
        Ok(e)
    }
}

impl Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(s: &str, env: &Env) -> BigRational {
        s.parse::<Expr>().unwrap().eval(env).unwrap()
    }

    #[test]
    fn precedence_and_functions() {
        let mut env = Env::new();
        env.set(Var::N, 2).set(Var::SmallH, 5).set(Var::BigH, 7);
        assert_eq!(eval("3*h+1", &env), BigRational::from_integer(16.into()));
        assert_eq!(eval("n*(h+H)-1", &env), BigRational::from_integer(23.into()));
        assert_eq!(eval("ceil(h/2)", &env), BigRational::from_integer(3.into()));
        assert_eq!(eval("floor(h/2)", &env), BigRational::from_integer(2.into()));
        assert_eq!(eval("max(0, n-H, 1)", &env), BigRational::from_integer(1.into()));
        assert_eq!(eval("min(h, H)", &env), BigRational::from_integer(5.into()));
        assert_eq!(eval("-h+H", &env), BigRational::from_integer(2.into()));
        assert_eq!(eval("10-4-3", &env), BigRational::from_integer(3.into()));
    }

    #[test]
    fn unbound_and_bad_input() {
        let env = Env::new();
        let e: Expr = "p+1".parse().unwrap();
        assert_eq!(e.eval(&env), Err(EvalError::Unbound(Var::P)));
        assert!("".parse::<Expr>().is_err());
        assert!("3*".parse::<Expr>().is_err());
        assert!("x+1".parse::<Expr>().is_err());
        assert!("ceil(1,2)".parse::<Expr>().is_err());
        assert!("1/0".parse::<Expr>().unwrap().eval(&env).is_err());
    }

    #[test]
    fn printer_is_minimal_and_faithful() {
        for (src, want) in [
            ("((3)*(h))+(1)", "3*h+1"),
            ("a+(b+c)", "a+(b+c)"),
            ("(a+b)+c", "a+b+c"),
            ("a-(b-c)", "a-(b-c)"),
            ("a*(b+c)", "a*(b+c)"),
            ("-(a+b)", "-(a+b)"),
            ("max(0, n*(p+q+2*h)+1-H)", "max(0,n*(p+q+2*h)+1-H)"),
        ] {
            let e: Expr = src.parse().unwrap();
            assert_eq!(e.to_string(), want);
            assert_eq!(want.parse::<Expr>().unwrap(), e);
        }
    }
}
