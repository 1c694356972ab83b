//! Infix scalar expressions in the variables `x, y, z` (and `w` in four
//! dimensions), with third-order derivative jets.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?          // right associative
//! primary := number | variable | 'sqrt' '(' expr ')' | '(' expr ')'
//! ```
//!
//! Exponents must fold to a rational constant. Integer exponents are
//! evaluated by repeated multiplication and accept any base; other
//! exponents require a positive base.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::ad::{parts3, seed3, Scalar};
use crate::error::{Error, Result};
use crate::linalg::Tensor3;

const VARIABLES: [&str; 4] = ["x", "y", "z", "w"];

/// Exact rational exponent `num/den` in lowest terms, `den > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    fn new(num: i64, den: i64) -> Option<Self> {
        if den == 0 {
            return None;
        }
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        let s = if den < 0 { -1 } else { 1 };
        Some(Rational { num: s * num / g, den: s * den / g })
    }

    fn int(n: i64) -> Self {
        Rational { num: n, den: 1 }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    fn add(self, o: Self) -> Option<Self> {
        let num = self.num.checked_mul(o.den)?.checked_add(o.num.checked_mul(self.den)?)?;
        Rational::new(num, self.den.checked_mul(o.den)?)
    }

    fn mul(self, o: Self) -> Option<Self> {
        Rational::new(self.num.checked_mul(o.num)?, self.den.checked_mul(o.den)?)
    }

    fn recip(self) -> Option<Self> {
        Rational::new(self.den, self.num)
    }

    fn powi(self, e: i64) -> Option<Self> {
        let base = if e < 0 { self.recip()? } else { self };
        let mut acc = Rational::int(1);
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(base)?;
        }
        Some(acc)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Rational),
    Sqrt(Box<Node>),
    Neg(Box<Node>),
}

/// A parsed expression together with its ambient dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    pub ast: Node,
    pub dim: usize,
}

/// Value and derivatives up to third order at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct JetValue {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
    pub third: Tensor3,
}

/// Parse with the dimension inferred from the variables used (4 if `w`
/// appears, else 3).
pub fn parse(source: &str) -> Result<Expression> {
    let mut p = Parser::new(source, 4)?;
    let ast = p.parse_all()?;
    let dim = if uses_var(&ast, 3) { 4 } else { 3 };
    Ok(Expression { ast, dim })
}

/// Parse for a fixed ambient dimension; variables beyond it are unknown.
pub fn parse_with_dim(source: &str, dim: usize) -> Result<Expression> {
    if !(3..=4).contains(&dim) {
        return Err(Error::Unsupported(format!("expression dimension {dim}")));
    }
    let mut p = Parser::new(source, dim)?;
    let ast = p.parse_all()?;
    Ok(Expression { ast, dim })
}

fn uses_var(n: &Node, v: usize) -> bool {
    match n {
        Node::Const(_) => false,
        Node::Var(i) => *i == v,
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
            uses_var(a, v) || uses_var(b, v)
        }
        Node::Pow(a, _) | Node::Sqrt(a) | Node::Neg(a) => uses_var(a, v),
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    dim: usize,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| Error::Syntax {
                offset: start,
                message: format!("malformed number `{text}`"),
            })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(Error::Syntax { offset: i, message: format!("unexpected character `{c}`") });
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

impl Parser {
    fn new(src: &str, dim: usize) -> Result<Self> {
        Ok(Parser { toks: tokenize(src)?, pos: 0, dim })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else {
            Err(Error::Syntax { offset: self.offset(), message: format!("expected `{c}`") })
        }
    }

    fn parse_all(&mut self) -> Result<Node> {
        let n = self.parse_expr(0)?;
        if *self.peek() != Tok::End {
            return Err(Error::Syntax { offset: self.offset(), message: "unexpected token".into() });
        }
        Ok(n)
    }

    fn parse_expr(&mut self, min_prec: u8) -> Result<Node> {
        let mut lhs = self.parse_unary()?;
        loop {
            let (op, prec) = match self.peek() {
                Tok::Op(c @ ('+' | '-')) => (*c, 1),
                Tok::Op(c @ ('*' | '/')) => (*c, 2),
                _ => break,
            };
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.parse_expr(prec + 1)?;
            let (a, b) = (Box::new(lhs), Box::new(rhs));
            lhs = match op {
                '+' => Node::Add(a, b),
                '-' => Node::Sub(a, b),
                '*' => Node::Mul(a, b),
                _ => Node::Div(a, b),
            };
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Node> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Node::Neg(Box::new(self.parse_unary()?)))
            }
            Tok::Op('+') => {
                self.bump();
                self.parse_unary()
            }
            _ => self.parse_power(),
        }
    }

    fn parse_power(&mut self) -> Result<Node> {
        let base = self.parse_primary()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        let exponent = self.parse_unary()?;
        let r = fold_rational(&exponent).ok_or_else(|| Error::Syntax {
            offset: at,
            message: "exponent must be a rational constant".into(),
        })?;
        Ok(Node::Pow(Box::new(base), r))
    }

    fn parse_primary(&mut self) -> Result<Node> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Node::Const(v)),
            Tok::Op('(') => {
                let inner = self.parse_expr(0)?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::Op('(') {
                    if name != "sqrt" {
                        return Err(Error::UnsupportedFunction { name, offset: at });
                    }
                    self.bump();
                    let inner = self.parse_expr(0)?;
                    self.expect(')')?;
                    return Ok(Node::Sqrt(Box::new(inner)));
                }
                match VARIABLES[..self.dim].iter().position(|v| *v == name) {
                    Some(i) => Ok(Node::Var(i)),
                    None => Err(Error::UnknownIdentifier { name, offset: at }),
                }
            }
            Tok::End => Err(Error::Syntax { offset: at, message: "unexpected end of input".into() }),
            Tok::Op(c) => Err(Error::Syntax { offset: at, message: format!("expected operand, found `{c}`") }),
        }
    }
}

/// Fold a constant subtree to an exact rational, if possible.
fn fold_rational(n: &Node) -> Option<Rational> {
    match n {
        Node::Const(v) => decimal_to_rational(*v),
        Node::Var(_) | Node::Sqrt(_) => None,
        Node::Neg(a) => fold_rational(a).map(|r| Rational { num: -r.num, den: r.den }),
        Node::Add(a, b) => fold_rational(a)?.add(fold_rational(b)?),
        Node::Sub(a, b) => {
            let nb = fold_rational(b)?;
            fold_rational(a)?.add(Rational { num: -nb.num, den: nb.den })
        }
        Node::Mul(a, b) => fold_rational(a)?.mul(fold_rational(b)?),
        Node::Div(a, b) => fold_rational(a)?.mul(fold_rational(b)?.recip()?),
        Node::Pow(a, e) if e.is_integer() => fold_rational(a)?.powi(e.num),
        Node::Pow(..) => None,
    }
}

fn decimal_to_rational(v: f64) -> Option<Rational> {
    let mut den: i64 = 1;
    for _ in 0..12 {
        let num = v * den as f64;
        if num.fract() == 0.0 && num.abs() < 9e15 {
            return Rational::new(num as i64, den);
        }
        den *= 10;
    }
    None
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(v) => write!(f, "{v}"),
            Node::Var(i) => write!(f, "{}", VARIABLES[*i]),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Pow(a, r) if r.is_integer() => write!(f, "({a})^({})", r.num),
            Node::Pow(a, r) => write!(f, "({a})^({}/{})", r.num, r.den),
            Node::Sqrt(a) => write!(f, "sqrt({a})"),
            Node::Neg(a) => write!(f, "(-{a})"),
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ast.fmt(f)
    }
}

impl Expression {
    /// Evaluate on any scalar type; `x` must have `dim` entries.
    pub fn eval<S: Scalar>(&self, x: &[S]) -> Result<S> {
        if x.len() != self.dim {
            return Err(Error::Domain(format!("expected {} coordinates, got {}", self.dim, x.len())));
        }
        eval_node(&self.ast, x)
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<f64> {
        self.eval(x)
    }

    /// Value and derivatives to third order via nested dual numbers.
    pub fn eval_jet(&self, point: &[f64]) -> Result<JetValue> {
        jet_from_nested(self.dim, point, |vars| self.eval(vars))
    }
}

fn eval_node<S: Scalar>(n: &Node, x: &[S]) -> Result<S> {
    Ok(match n {
        Node::Const(v) => S::cst(*v),
        Node::Var(i) => x[*i],
        Node::Add(a, b) => eval_node(a, x)? + eval_node(b, x)?,
        Node::Sub(a, b) => eval_node(a, x)? - eval_node(b, x)?,
        Node::Mul(a, b) => eval_node(a, x)? * eval_node(b, x)?,
        Node::Div(a, b) => {
            let den = eval_node(b, x)?;
            if den.re() == 0.0 {
                return Err(Error::Domain("division by zero".into()));
            }
            eval_node(a, x)? / den
        }
        Node::Pow(a, r) => {
            let base = eval_node(a, x)?;
            if r.is_integer() {
                if r.num < 0 && base.re() == 0.0 {
                    return Err(Error::Domain("negative power of zero".into()));
                }
                base.powi(r.num as i32)
            } else {
                if !(base.re() > 0.0) {
                    return Err(Error::Domain(format!(
                        "fractional power {}/{} of non-positive base {}",
                        r.num,
                        r.den,
                        base.re()
                    )));
                }
                base.powf(r.value())
            }
        }
        Node::Sqrt(a) => {
            let v = eval_node(a, x)?;
            if v.re() < 0.0 {
                return Err(Error::Domain(format!("sqrt of negative value {}", v.re())));
            }
            v.sqrt()
        }
        Node::Neg(a) => -eval_node(a, x)?,
    })
}

/// Assemble a third-order jet of `f` by evaluating it on nested duals once
/// per index triple `i ≤ j ≤ k`. Symmetric entries are written together, so
/// the Hessian and third tensor are symmetric bit for bit.
pub fn jet_from_nested<F>(dim: usize, point: &[f64], f: F) -> Result<JetValue>
where
    F: Fn(&[crate::ad::Dual3]) -> Result<crate::ad::Dual3>,
{
    let mut grad = DVector::zeros(dim);
    let mut hess = DMatrix::zeros(dim, dim);
    let mut third = Tensor3::zeros(dim);
    let mut value = 0.0;
    let mut vars = Vec::with_capacity(dim);
    for i in 0..dim {
        for j in i..dim {
            for k in j..dim {
                vars.clear();
                vars.extend((0..dim).map(|a| seed3(point[a], a, i, j, k)));
                let p = parts3(&f(&vars)?);
                value = p.value;
                if j == i && k == i {
                    grad[i] = p.di;
                }
                if k == j {
                    hess[(i, j)] = p.dij;
                    hess[(j, i)] = p.dij;
                }
                third.set_sym(i, j, k, p.dijk);
            }
        }
    }
    Ok(JetValue { value, grad, hess, third })
}

/// Central finite-difference jet, used for expressions whose primitives are
/// not smooth at the evaluation point. Step `h` applies to every order.
pub fn finite_difference_jet<F>(dim: usize, point: &[f64], h: f64, f: F) -> Result<JetValue>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let eval = |shift: &[(usize, f64)]| -> Result<f64> {
        let mut p = point.to_vec();
        for &(a, s) in shift {
            p[a] += s;
        }
        f(&p)
    };
    let value = f(point)?;
    let mut grad = DVector::zeros(dim);
    let mut hess = DMatrix::zeros(dim, dim);
    let mut third = Tensor3::zeros(dim);
    for i in 0..dim {
        grad[i] = (eval(&[(i, h)])? - eval(&[(i, -h)])?) / (2.0 * h);
    }
    // Second derivatives from the 4-point mixed stencil (i = j reduces to
    // the 3-point stencil with step 2h).
    let d2 = |i: usize, j: usize| -> Result<f64> {
        Ok((eval(&[(i, h), (j, h)])? - eval(&[(i, h), (j, -h)])? - eval(&[(i, -h), (j, h)])?
            + eval(&[(i, -h), (j, -h)])?)
            / (4.0 * h * h))
    };
    for i in 0..dim {
        for j in i..dim {
            let v = d2(i, j)?;
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    for i in 0..dim {
        for j in i..dim {
            for k in j..dim {
                // Central difference of the mixed second derivative along k.
                let shifted = |s: f64| -> Result<f64> {
                    let mut p = point.to_vec();
                    p[k] += s;
                    let g = |shift: &[(usize, f64)]| -> Result<f64> {
                        let mut q = p.clone();
                        for &(a, t) in shift {
                            q[a] += t;
                        }
                        f(&q)
                    };
                    Ok((g(&[(i, h), (j, h)])? - g(&[(i, h), (j, -h)])? - g(&[(i, -h), (j, h)])?
                        + g(&[(i, -h), (j, -h)])?)
                        / (4.0 * h * h))
                };
                let v = (shifted(h)? - shifted(-h)?) / (2.0 * h);
                third.set_sym(i, j, k, v);
            }
        }
    }
    Ok(JetValue { value, grad, hess, third })
}
