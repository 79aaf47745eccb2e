//! Scalar expressions g(x, y, y') and h(x, y, y'): parsing, IEEE evaluation
//! and exact symbolic differentiation with respect to y or y'.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := term { ("+"|"-") term }
//! term   := factor { ("*"|"/") factor }
//! factor := ["-"] power
//! power  := atom ["^" atom]
//! atom   := number | ident | ident "(" expr ")" | "(" expr ")"
//! ```
//!
//! `x`, `y`, `dy` are the variables; `exp`, `log`, `sin`, `cos`, `sinh`,
//! `cosh`, `sqrt` the supported functions; any other identifier is a named
//! parameter bound at evaluation time.

use std::collections::BTreeSet;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    Dy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Sqrt => "sqrt",
        }
    }
}

/// A finite, immutable expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprNode {
    Const(f64),
    Param(String),
    Var(Var),
    Neg(Box<ExprNode>),
    Binary(BinOp, Box<ExprNode>, Box<ExprNode>),
    Call(Func, Box<ExprNode>),
}

impl fmt::Display for ExprNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprNode::Const(c) => {
                if *c < 0.0 {
                    write!(f, "({c})")
                } else {
                    write!(f, "{c}")
                }
            }
            ExprNode::Param(p) => write!(f, "{p}"),
            ExprNode::Var(Var::X) => write!(f, "x"),
            ExprNode::Var(Var::Y) => write!(f, "y"),
            ExprNode::Var(Var::Dy) => write!(f, "dy"),
            ExprNode::Neg(e) => write!(f, "(-{e})"),
            ExprNode::Binary(op, l, r) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({l}{s}{r})")
            }
            ExprNode::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

pub fn parse(source: &str) -> Result<ExprNode> {
    let mut p = Parser {
        src: source.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(Error::Syntax {
            offset: p.pos,
            message: format!("unexpected `{}`", p.src[p.pos] as char),
        });
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Syntax {
                offset: self.pos,
                message: format!("expected `{}`", c as char),
            })
        }
    }

    fn expr(&mut self) -> Result<ExprNode> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = ExprNode::Binary(BinOp::Add, lhs.into(), rhs.into());
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = ExprNode::Binary(BinOp::Sub, lhs.into(), rhs.into());
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ExprNode> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = ExprNode::Binary(BinOp::Mul, lhs.into(), rhs.into());
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = ExprNode::Binary(BinOp::Div, lhs.into(), rhs.into());
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<ExprNode> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let p = self.power()?;
            Ok(ExprNode::Neg(p.into()))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<ExprNode> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let at = self.pos;
            let expo = self.atom()?;
            let expo = fold(expo);
            if !matches!(expo, ExprNode::Const(_) | ExprNode::Param(_)) {
                return Err(Error::Syntax {
                    offset: at,
                    message: "pow exponent must be a constant or a named parameter".into(),
                });
            }
            Ok(ExprNode::Binary(BinOp::Pow, base.into(), expo.into()))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<ExprNode> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            _ => Err(Error::Syntax {
                offset: self.pos,
                message: "expected a number, identifier or `(`".into(),
            }),
        }
    }

    fn number(&mut self) -> Result<ExprNode> {
        let start = self.pos;
        let mut end = self.pos;
        let mut seen_e = false;
        while end < self.src.len() {
            let c = self.src[end];
            if c.is_ascii_digit() || c == b'.' {
                end += 1;
            } else if (c == b'e' || c == b'E') && !seen_e && end > start {
                // exponent must be followed by digits or a sign
                let next = self.src.get(end + 1).copied();
                if matches!(next, Some(d) if d.is_ascii_digit())
                    || (matches!(next, Some(b'+') | Some(b'-'))
                        && matches!(self.src.get(end + 2), Some(d) if d.is_ascii_digit()))
                {
                    seen_e = true;
                    end += if matches!(next, Some(b'+') | Some(b'-')) { 2 } else { 1 };
                } else {
                    break;
                }
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..end]).unwrap();
        let v: f64 = text.parse().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("bad number `{text}`"),
        })?;
        self.pos = end;
        Ok(ExprNode::Const(v))
    }

    fn ident(&mut self) -> Result<ExprNode> {
        let start = self.pos;
        let mut end = self.pos;
        while end < self.src.len()
            && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
        {
            end += 1;
        }
        let name = std::str::from_utf8(&self.src[start..end]).unwrap().to_string();
        self.pos = end;
        let func = match name.as_str() {
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "sinh" => Some(Func::Sinh),
            "cosh" => Some(Func::Cosh),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        };
        if let Some(f) = func {
            self.expect(b'(').map_err(|_| Error::ArityMismatch {
                name: name.clone(),
                expected: 1,
                got: 0,
            })?;
            let arg = self.expr()?;
            self.expect(b')')?;
            return Ok(ExprNode::Call(f, arg.into()));
        }
        match name.as_str() {
            "x" => Ok(ExprNode::Var(Var::X)),
            "y" => Ok(ExprNode::Var(Var::Y)),
            "dy" => Ok(ExprNode::Var(Var::Dy)),
            _ => {
                // a call on an unknown identifier is an error, not a parameter
                if self.peek() == Some(b'(') {
                    return Err(Error::UnknownIdentifier {
                        name,
                        offset: start,
                    });
                }
                Ok(ExprNode::Param(name))
            }
        }
    }
}

/// Folds constant subtrees; no further simplification.
pub fn fold(e: ExprNode) -> ExprNode {
    match e {
        ExprNode::Neg(a) => match fold(*a) {
            ExprNode::Const(c) => ExprNode::Const(-c),
            a => ExprNode::Neg(a.into()),
        },
        ExprNode::Binary(op, l, r) => {
            let l = fold(*l);
            let r = fold(*r);
            if let (ExprNode::Const(a), ExprNode::Const(b)) = (&l, &r) {
                let v = match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => powf_checked(*a, *b).unwrap_or(f64::NAN),
                };
                if v.is_finite() {
                    return ExprNode::Const(v);
                }
            }
            ExprNode::Binary(op, l.into(), r.into())
        }
        ExprNode::Call(f, a) => {
            let a = fold(*a);
            if let ExprNode::Const(c) = a {
                let v = apply_func(f, c);
                if let Ok(v) = v {
                    return ExprNode::Const(v);
                }
            }
            ExprNode::Call(f, a.into())
        }
        other => other,
    }
}

fn apply_func(f: Func, u: f64) -> std::result::Result<f64, String> {
    let v = match f {
        Func::Exp => u.exp(),
        Func::Log => {
            if u <= 0.0 {
                return Err(format!("log of nonpositive value {u}"));
            }
            u.ln()
        }
        Func::Sin => u.sin(),
        Func::Cos => u.cos(),
        Func::Sinh => u.sinh(),
        Func::Cosh => u.cosh(),
        Func::Sqrt => {
            if u < 0.0 {
                return Err(format!("sqrt of negative value {u}"));
            }
            u.sqrt()
        }
    };
    Ok(v)
}

/// Integer exponents use repeated multiplication; fractional exponents need
/// a positive base.
fn powf_checked(base: f64, expo: f64) -> std::result::Result<f64, String> {
    if expo.fract() == 0.0 && expo.abs() <= 1024.0 {
        let m = expo as i64;
        let mut acc = 1.0f64;
        let mut b = base;
        let mut k = m.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc *= b;
            }
            b *= b;
            k >>= 1;
        }
        if m < 0 {
            if acc == 0.0 {
                return Err("zero base with negative exponent".into());
            }
            return Ok(1.0 / acc);
        }
        Ok(acc)
    } else {
        if base <= 0.0 {
            return Err(format!(
                "non-integer exponent {expo} requires a positive base, got {base}"
            ));
        }
        Ok(base.powf(expo))
    }
}

impl ExprNode {
    /// IEEE double evaluation of the tree.
    pub fn eval(&self, x: f64, y: f64, dy: f64, params: &HashMap<String, f64>) -> Result<f64> {
        let domain = |msg: String| Error::EvalDomain {
            context: self.to_string(),
            x,
            message: msg,
        };
        match self {
            ExprNode::Const(c) => Ok(*c),
            ExprNode::Param(p) => params
                .get(p)
                .copied()
                .ok_or_else(|| Error::UnboundParameter(p.clone())),
            ExprNode::Var(Var::X) => Ok(x),
            ExprNode::Var(Var::Y) => Ok(y),
            ExprNode::Var(Var::Dy) => Ok(dy),
            ExprNode::Neg(a) => Ok(-a.eval(x, y, dy, params)?),
            ExprNode::Binary(op, l, r) => {
                let a = l.eval(x, y, dy, params)?;
                let b = r.eval(x, y, dy, params)?;
                match op {
                    BinOp::Add => Ok(a + b),
                    BinOp::Sub => Ok(a - b),
                    BinOp::Mul => Ok(a * b),
                    BinOp::Div => {
                        if b == 0.0 {
                            Err(domain("division by zero".into()))
                        } else {
                            Ok(a / b)
                        }
                    }
                    BinOp::Pow => powf_checked(a, b).map_err(domain),
                }
            }
            ExprNode::Call(f, a) => {
                let u = a.eval(x, y, dy, params)?;
                apply_func(*f, u).map_err(domain)
            }
        }
    }

    /// Exact symbolic partial derivative with respect to `y` or `dy`.
    /// Constants fold where both children are constants.
    pub fn differentiate(&self, var: Var) -> ExprNode {
        assert!(matches!(var, Var::Y | Var::Dy), "differentiate in y or dy");
        fold(self.diff_inner(var))
    }

    fn diff_inner(&self, var: Var) -> ExprNode {
        use BinOp::*;
        use ExprNode::*;
        match self {
            Const(_) | Param(_) => Const(0.0),
            Var(v) => Const(if *v == var { 1.0 } else { 0.0 }),
            Neg(a) => Neg(a.diff_inner(var).into()),
            Binary(Add, l, r) => Binary(Add, l.diff_inner(var).into(), r.diff_inner(var).into()),
            Binary(Sub, l, r) => Binary(Sub, l.diff_inner(var).into(), r.diff_inner(var).into()),
            Binary(Mul, l, r) => Binary(
                Add,
                Binary(Mul, l.diff_inner(var).into(), r.clone()).into(),
                Binary(Mul, l.clone(), r.diff_inner(var).into()).into(),
            ),
            Binary(Div, l, r) => Binary(
                Div,
                Binary(
                    Sub,
                    Binary(Mul, l.diff_inner(var).into(), r.clone()).into(),
                    Binary(Mul, l.clone(), r.diff_inner(var).into()).into(),
                )
                .into(),
                Binary(Mul, r.clone(), r.clone()).into(),
            ),
            Binary(Pow, b, m) => {
                // exponent is a constant or parameter: d(b^m) = m b^(m-1) b'
                let mm1 = Binary(Sub, m.clone(), Const(1.0).into());
                Binary(
                    Mul,
                    Binary(
                        Mul,
                        m.clone(),
                        Binary(Pow, b.clone(), mm1.into()).into(),
                    )
                    .into(),
                    b.diff_inner(var).into(),
                )
            }
            Call(Func::Exp, a) => Binary(
                Mul,
                Call(Func::Exp, a.clone()).into(),
                a.diff_inner(var).into(),
            ),
            Call(Func::Log, a) => Binary(Div, a.diff_inner(var).into(), a.clone()),
            Call(Func::Sin, a) => Binary(
                Mul,
                Call(Func::Cos, a.clone()).into(),
                a.diff_inner(var).into(),
            ),
            Call(Func::Cos, a) => Neg(Binary(
                Mul,
                Call(Func::Sin, a.clone()).into(),
                a.diff_inner(var).into(),
            )
            .into()),
            Call(Func::Sinh, a) => Binary(
                Mul,
                Call(Func::Cosh, a.clone()).into(),
                a.diff_inner(var).into(),
            ),
            Call(Func::Cosh, a) => Binary(
                Mul,
                Call(Func::Sinh, a.clone()).into(),
                a.diff_inner(var).into(),
            ),
            Call(Func::Sqrt, a) => Binary(
                Div,
                a.diff_inner(var).into(),
                Binary(Mul, Const(2.0).into(), Call(Func::Sqrt, a.clone()).into()).into(),
            ),
        }
    }

    /// Named parameters appearing in the tree.
    pub fn parameters(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut BTreeSet<String>) {
        match self {
            ExprNode::Param(p) => {
                out.insert(p.clone());
            }
            ExprNode::Neg(a) | ExprNode::Call(_, a) => a.collect_params(out),
            ExprNode::Binary(_, l, r) => {
                l.collect_params(out);
                r.collect_params(out);
            }
            _ => {}
        }
    }
}
