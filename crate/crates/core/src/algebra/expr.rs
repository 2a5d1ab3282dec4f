//! Vector-field expressions in a small prefix notation.
//!
//! A field is written as one s-expression per component, separated by `;`:
//!
//! ```text
//! (+ (* -0.1 (pow y1 3)) (* 2 (pow y2 3))); (- (* -2 (pow y1 3)) (* 0.1 (pow y2 3)))
//! ```
//!
//! Atoms are numbers, `pi`, state variables `y1..yN` and named parameters.
//! Operators are `+ - * /` (variadic, `-` with one argument negates), `pow`
//! with an integer exponent, and the unary primitives `sin cos exp tanh sigmoid`.

use std::collections::BTreeMap;
use std::fmt;

use super::scalar::Scalar;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unary {
    Neg,
    Sin,
    Cos,
    Exp,
    Tanh,
    Sigmoid,
}

impl Unary {
    fn name(self) -> &'static str {
        match self {
            Unary::Neg => "-",
            Unary::Sin => "sin",
            Unary::Cos => "cos",
            Unary::Exp => "exp",
            Unary::Tanh => "tanh",
            Unary::Sigmoid => "sigmoid",
        }
    }

    fn apply<S: Scalar>(self, x: S) -> S {
        match self {
            Unary::Neg => -x,
            Unary::Sin => x.sin(),
            Unary::Cos => x.cos(),
            Unary::Exp => x.exp(),
            Unary::Tanh => x.tanh(),
            Unary::Sigmoid => x.sigmoid(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Binary {
    Add,
    Sub,
    Mul,
    Div,
}

impl Binary {
    fn symbol(self) -> &'static str {
        match self {
            Binary::Add => "+",
            Binary::Sub => "-",
            Binary::Mul => "*",
            Binary::Div => "/",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based state index; `y1` is `Var(0)`.
    Var(usize),
    Param(String),
    Unary(Unary, Box<Expr>),
    Binary(Binary, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

impl Expr {
    pub fn num(c: f64) -> Expr {
        Expr::Num(c)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(name.to_string())
    }

    pub fn unary(op: Unary, e: Expr) -> Expr {
        Expr::Unary(op, Box::new(e))
    }

    pub fn binary(op: Binary, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn pow(e: Expr, n: i32) -> Expr {
        Expr::Pow(Box::new(e), n)
    }

    /// Largest state index referenced, plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Param(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Unary(_, e) | Expr::Pow(e, _) => e.arity(),
            Expr::Binary(_, a, b) => a.arity().max(b.arity()),
        }
    }

    fn collect_params(&self, out: &mut Vec<String>) {
        match self {
            Expr::Param(p) => {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
            Expr::Num(_) | Expr::Var(_) => {}
            Expr::Unary(_, e) | Expr::Pow(e, _) => e.collect_params(out),
            Expr::Binary(_, a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
        }
    }

    pub fn eval<S: Scalar>(&self, y: &[S], params: &BTreeMap<String, f64>) -> Result<S> {
        Ok(match self {
            Expr::Num(c) => S::from_f64(*c),
            Expr::Var(i) => y.get(*i).cloned().ok_or(Error::DimensionMismatch { expected: i + 1, got: y.len() })?,
            Expr::Param(p) => S::from_f64(lookup(params, p)?),
            Expr::Unary(op, e) => op.apply(e.eval(y, params)?),
            Expr::Pow(e, n) => {
                let base = e.eval(y, params)?;
                if *n < 0 && base.is_zero_divisor() {
                    return Err(Error::DivisionByZero);
                }
                base.powi(*n)
            }
            Expr::Binary(op, a, b) => {
                // constants stay plain numbers so series operands are scaled, not multiplied
                let ca = a.constant(params)?;
                let cb = b.constant(params)?;
                match (op, ca, cb) {
                    (Binary::Mul, Some(c), _) => b.eval(y, params)?.scale(c),
                    (Binary::Mul, _, Some(c)) => a.eval(y, params)?.scale(c),
                    (Binary::Add, Some(c), _) => b.eval(y, params)?.add_f64(c),
                    (Binary::Add, _, Some(c)) => a.eval(y, params)?.add_f64(c),
                    (Binary::Sub, _, Some(c)) => a.eval(y, params)?.add_f64(-c),
                    (Binary::Div, _, Some(c)) => {
                        if c.abs() <= super::scalar::ZERO_DIVISOR_TOL {
                            return Err(Error::DivisionByZero);
                        }
                        a.eval(y, params)?.scale(1.0 / c)
                    }
                    _ => {
                        let va = a.eval(y, params)?;
                        let vb = b.eval(y, params)?;
                        match op {
                            Binary::Add => va + vb,
                            Binary::Sub => va - vb,
                            Binary::Mul => va * vb,
                            Binary::Div => {
                                if vb.is_zero_divisor() {
                                    return Err(Error::DivisionByZero);
                                }
                                va / vb
                            }
                        }
                    }
                }
            }
        })
    }

    /// The value of a subtree that does not depend on the state.
    fn constant(&self, params: &BTreeMap<String, f64>) -> Result<Option<f64>> {
        match self {
            Expr::Num(c) => Ok(Some(*c)),
            Expr::Param(p) => lookup(params, p).map(Some),
            Expr::Unary(Unary::Neg, e) => Ok(e.constant(params)?.map(|c| -c)),
            _ => Ok(None),
        }
    }
}

fn lookup(params: &BTreeMap<String, f64>, name: &str) -> Result<f64> {
    if name == "pi" {
        return Ok(std::f64::consts::PI);
    }
    params.get(name).copied().ok_or_else(|| Error::UnboundParameter(name.to_string()))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) => write!(f, "{c:?}"),
            Expr::Var(i) => write!(f, "y{}", i + 1),
            Expr::Param(p) => write!(f, "{p}"),
            Expr::Unary(op, e) => write!(f, "({} {e})", op.name()),
            Expr::Binary(op, a, b) => write!(f, "({} {a} {b})", op.symbol()),
            Expr::Pow(e, n) => write!(f, "(pow {e} {n})"),
        }
    }
}

/// A vector field `y -> (e_1(y), ..., e_N(y))` with bound named parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldExpr {
    dim: usize,
    components: Vec<Expr>,
    params: BTreeMap<String, f64>,
}

impl FieldExpr {
    /// Builds a field of dimension `dim`; components may not reference `y_{dim+1}` or later.
    pub fn new(dim: usize, components: Vec<Expr>) -> Result<Self> {
        for c in &components {
            if c.arity() > dim {
                return Err(Error::DimensionMismatch { expected: dim, got: c.arity() });
            }
        }
        Ok(Self { dim, components, params: BTreeMap::new() })
    }

    /// Parses `;`-separated components. The dimension is the number of
    /// components unless `dim` is given (a scalar function of `dim` states).
    pub fn parse(text: &str, dim: Option<usize>) -> Result<Self> {
        let components =
            text.split(';').map(str::trim).filter(|s| !s.is_empty()).map(parse_expr).collect::<Result<Vec<_>>>()?;
        if components.is_empty() {
            return Err(Error::Parse("empty field expression".into()));
        }
        let dim = dim.unwrap_or(components.len());
        Self::new(dim, components)
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn bind(&mut self, name: &str, value: f64) {
        self.params.insert(name.to_string(), value);
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    /// Parameter names referenced by the components, in first-use order.
    pub fn param_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in &self.components {
            c.collect_params(&mut out);
        }
        out.retain(|p| p != "pi");
        out
    }

    /// Number of state variables.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of output components.
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn eval<S: Scalar>(&self, y: &[S]) -> Result<Vec<S>> {
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: y.len() });
        }
        self.components.iter().map(|c| c.eval(y, &self.params)).collect()
    }

    /// Value of a single-component expression.
    pub fn eval_scalar<S: Scalar>(&self, y: &[S]) -> Result<S> {
        if self.components.len() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: self.components.len() });
        }
        Ok(self.eval(y)?.remove(0))
    }
}

impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, PartialEq)]
enum Token {
    Open,
    Close,
    Atom(String),
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push(Token::Atom(std::mem::take(&mut cur)));
                }
                out.push(if ch == '(' { Token::Open } else { Token::Close });
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(Token::Atom(std::mem::take(&mut cur)));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(Token::Atom(cur));
    }
    out
}

pub fn parse_expr(text: &str) -> Result<Expr> {
    let tokens = tokenize(text);
    let mut pos = 0;
    let e = parse_tokens(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(Error::Parse(format!("trailing input in `{text}`")));
    }
    Ok(e)
}

fn parse_tokens(tokens: &[Token], pos: &mut usize) -> Result<Expr> {
    let tok = tokens.get(*pos).ok_or_else(|| Error::Parse("unexpected end of expression".into()))?;
    *pos += 1;
    match tok {
        Token::Close => Err(Error::Parse("unexpected `)`".into())),
        Token::Atom(a) => parse_atom(a),
        Token::Open => {
            let op = match tokens.get(*pos) {
                Some(Token::Atom(a)) => a.clone(),
                _ => return Err(Error::Parse("expected operator after `(`".into())),
            };
            *pos += 1;
            let mut args = Vec::new();
            loop {
                match tokens.get(*pos) {
                    Some(Token::Close) => {
                        *pos += 1;
                        break;
                    }
                    Some(_) => args.push(parse_tokens(tokens, pos)?),
                    None => return Err(Error::Parse("missing `)`".into())),
                }
            }
            build(&op, args)
        }
    }
}

fn parse_atom(a: &str) -> Result<Expr> {
    if let Ok(c) = a.parse::<f64>() {
        return Ok(Expr::Num(c));
    }
    if let Some(idx) = a.strip_prefix('y') {
        if let Ok(i) = idx.parse::<usize>() {
            if i == 0 {
                return Err(Error::Parse("state variables are numbered from y1".into()));
            }
            return Ok(Expr::Var(i - 1));
        }
    }
    let valid = a.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && a.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !valid {
        return Err(Error::Parse(format!("bad atom `{a}`")));
    }
    Ok(Expr::Param(a.to_string()))
}

fn build(op: &str, args: Vec<Expr>) -> Result<Expr> {
    let arity_err = |n: &str| Error::Parse(format!("wrong number of arguments to `{n}`"));
    let unary = match op {
        "sin" => Some(Unary::Sin),
        "cos" => Some(Unary::Cos),
        "exp" => Some(Unary::Exp),
        "tanh" => Some(Unary::Tanh),
        "sigmoid" => Some(Unary::Sigmoid),
        _ => None,
    };
    if let Some(u) = unary {
        let [e]: [Expr; 1] = args.try_into().map_err(|_| arity_err(op))?;
        return Ok(Expr::unary(u, e));
    }
    let binary = match op {
        "+" => Binary::Add,
        "-" => Binary::Sub,
        "*" => Binary::Mul,
        "/" => Binary::Div,
        "pow" => {
            let [base, exp]: [Expr; 2] = args.try_into().map_err(|_| arity_err(op))?;
            return match exp {
                Expr::Num(n) if n.fract() == 0.0 && n.abs() <= i32::MAX as f64 => Ok(Expr::pow(base, n as i32)),
                _ => Err(Error::Parse("pow needs an integer literal exponent".into())),
            };
        }
        other => return Err(Error::Parse(format!("unknown operator `{other}`"))),
    };
    if binary == Binary::Sub && args.len() == 1 {
        return Ok(Expr::unary(Unary::Neg, args.into_iter().next().unwrap()));
    }
    if args.len() < 2 {
        return Err(arity_err(op));
    }
    let mut it = args.into_iter();
    let first = it.next().unwrap();
    Ok(it.fold(first, |acc, e| Expr::binary(binary, acc, e)))
}
