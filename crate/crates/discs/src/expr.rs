use std::fmt;
use std::sync::Arc;

use hcma_circle::C64;
use hcma_linear::Mat;

use crate::{DiscError, Potential};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    Z(usize),
    Zb(usize),
    Tau,
    Taub,
    Theta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

#[derive(Debug, Clone, PartialEq)]
enum Expr {
    Num(C64),
    Var(Var),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
}

fn num(re: f64) -> Expr {
    Expr::Num(C64::new(re, 0.0))
}

fn constant(e: &Expr) -> Option<C64> {
    match e {
        Expr::Num(c) => Some(*c),
        _ => None,
    }
}

// constructors that fold constants and drop zeros and ones
fn add(a: Expr, b: Expr) -> Expr {
    match (constant(&a), constant(&b)) {
        (Some(x), Some(y)) => Expr::Num(x + y),
        (Some(x), _) if x == C64::new(0.0, 0.0) => b,
        (_, Some(y)) if y == C64::new(0.0, 0.0) => a,
        _ => Expr::Add(a.into(), b.into()),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (constant(&a), constant(&b)) {
        (Some(x), Some(y)) => Expr::Num(x - y),
        (Some(x), _) if x == C64::new(0.0, 0.0) => neg(b),
        (_, Some(y)) if y == C64::new(0.0, 0.0) => a,
        _ => Expr::Sub(a.into(), b.into()),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    match (constant(&a), constant(&b)) {
        (Some(x), Some(y)) => Expr::Num(x * y),
        (Some(x), _) | (_, Some(x)) if x == zero => Expr::Num(zero),
        (Some(x), _) if x == one => b,
        (_, Some(y)) if y == one => a,
        _ => Expr::Mul(a.into(), b.into()),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (constant(&a), constant(&b)) {
        (Some(x), Some(y)) => Expr::Num(x / y),
        (Some(x), _) if x == C64::new(0.0, 0.0) => a,
        (_, Some(y)) if y == C64::new(1.0, 0.0) => a,
        _ => Expr::Div(a.into(), b.into()),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    match (constant(&a), constant(&b)) {
        (Some(x), Some(y)) => Expr::Num(cpow(x, y)),
        (_, Some(y)) if y == C64::new(1.0, 0.0) => a,
        (_, Some(y)) if y == C64::new(0.0, 0.0) => num(1.0),
        _ => Expr::Pow(a.into(), b.into()),
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(x) => Expr::Num(-x),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(other.into()),
    }
}

fn call(f: Func, a: Expr) -> Expr {
    match constant(&a) {
        Some(x) => Expr::Num(apply(f, x)),
        None => Expr::Call(f, a.into()),
    }
}

fn cpow(b: C64, e: C64) -> C64 {
    if e.im == 0.0 && e.re.fract() == 0.0 && e.re.abs() <= 64.0 {
        b.powi(e.re as i32)
    } else {
        b.powc(e)
    }
}

fn apply(f: Func, x: C64) -> C64 {
    match f {
        Func::Exp => x.exp(),
        Func::Log => x.ln(),
        Func::Sin => x.sin(),
        Func::Cos => x.cos(),
        Func::Sqrt => x.sqrt(),
    }
}

struct Point<'a> {
    z: &'a [C64],
    theta: f64,
}

impl Expr {
    fn eval(&self, p: &Point) -> C64 {
        match self {
            Expr::Num(c) => *c,
            Expr::Var(Var::Z(i)) => p.z[*i],
            Expr::Var(Var::Zb(i)) => p.z[*i].conj(),
            Expr::Var(Var::Tau) => C64::from_polar(1.0, p.theta),
            Expr::Var(Var::Taub) => C64::from_polar(1.0, -p.theta),
            Expr::Var(Var::Theta) => C64::new(p.theta, 0.0),
            Expr::Add(a, b) => a.eval(p) + b.eval(p),
            Expr::Sub(a, b) => a.eval(p) - b.eval(p),
            Expr::Mul(a, b) => a.eval(p) * b.eval(p),
            Expr::Div(a, b) => a.eval(p) / b.eval(p),
            Expr::Pow(a, b) => cpow(a.eval(p), b.eval(p)),
            Expr::Neg(a) => -a.eval(p),
            Expr::Call(f, a) => apply(*f, a.eval(p)),
        }
    }

    /// Formal complex conjugate: swaps `z` with `zb` and `tau` with `taub`.
    fn conj(&self) -> Expr {
        match self {
            Expr::Num(c) => Expr::Num(c.conj()),
            Expr::Var(Var::Z(i)) => Expr::Var(Var::Zb(*i)),
            Expr::Var(Var::Zb(i)) => Expr::Var(Var::Z(*i)),
            Expr::Var(Var::Tau) => Expr::Var(Var::Taub),
            Expr::Var(Var::Taub) => Expr::Var(Var::Tau),
            Expr::Var(Var::Theta) => Expr::Var(Var::Theta),
            Expr::Add(a, b) => Expr::Add(a.conj().into(), b.conj().into()),
            Expr::Sub(a, b) => Expr::Sub(a.conj().into(), b.conj().into()),
            Expr::Mul(a, b) => Expr::Mul(a.conj().into(), b.conj().into()),
            Expr::Div(a, b) => Expr::Div(a.conj().into(), b.conj().into()),
            Expr::Pow(a, b) => Expr::Pow(a.conj().into(), b.conj().into()),
            Expr::Neg(a) => Expr::Neg(a.conj().into()),
            Expr::Call(f, a) => Expr::Call(*f, a.conj().into()),
        }
    }

    /// Partial derivative treating `z_i` and `zb_i` as independent.
    fn diff(&self, v: Var) -> Expr {
        match self {
            Expr::Num(_) => num(0.0),
            Expr::Var(u) => num(if *u == v { 1.0 } else { 0.0 }),
            Expr::Add(a, b) => add(a.diff(v), b.diff(v)),
            Expr::Sub(a, b) => sub(a.diff(v), b.diff(v)),
            Expr::Mul(a, b) => add(mul(a.diff(v), (**b).clone()), mul((**a).clone(), b.diff(v))),
            Expr::Div(a, b) => div(
                sub(mul(a.diff(v), (**b).clone()), mul((**a).clone(), b.diff(v))),
                pow((**b).clone(), num(2.0)),
            ),
            Expr::Pow(a, b) => match constant(b) {
                Some(e) => mul(mul(Expr::Num(e), pow((**a).clone(), Expr::Num(e - 1.0))), a.diff(v)),
                None => mul(
                    self.clone(),
                    add(
                        mul(b.diff(v), call(Func::Log, (**a).clone())),
                        div(mul((**b).clone(), a.diff(v)), (**a).clone()),
                    ),
                ),
            },
            Expr::Neg(a) => neg(a.diff(v)),
            Expr::Call(f, a) => {
                let inner = (**a).clone();
                let outer = match f {
                    Func::Exp => call(Func::Exp, inner),
                    Func::Log => div(num(1.0), inner),
                    Func::Sin => call(Func::Cos, inner),
                    Func::Cos => neg(call(Func::Sin, inner)),
                    Func::Sqrt => div(num(0.5), call(Func::Sqrt, inner)),
                };
                mul(outer, a.diff(v))
            }
        }
    }

    fn max_index(&self) -> Option<usize> {
        match self {
            Expr::Var(Var::Z(i)) | Expr::Var(Var::Zb(i)) => Some(*i),
            Expr::Num(_) | Expr::Var(_) => None,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.max_index().max(b.max_index())
            }
            Expr::Neg(a) | Expr::Call(_, a) => a.max_index(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Token>, DiscError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse().map_err(|_| DiscError::Parse(format!("bad number '{text}'")))?;
            out.push(Token::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            return Err(DiscError::Parse(format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<(), DiscError> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(DiscError::Parse(format!("expected '{op}' at token {}", self.pos)))
        }
    }

    fn sum(&mut self) -> Result<Expr, DiscError> {
        let mut e = self.product()?;
        loop {
            if self.eat('+') {
                e = add(e, self.product()?);
            } else if self.eat('-') {
                e = sub(e, self.product()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn product(&mut self) -> Result<Expr, DiscError> {
        let mut e = self.unary()?;
        loop {
            if self.eat('*') {
                e = mul(e, self.unary()?);
            } else if self.eat('/') {
                e = div(e, self.unary()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, DiscError> {
        if self.eat('-') {
            return Ok(neg(self.unary()?));
        }
        if self.eat('+') {
            return self.unary();
        }
        let base = self.primary()?;
        if self.eat('^') {
            // right-associative, binds tighter than unary minus on the left
            return Ok(pow(base, self.unary()?));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, DiscError> {
        match self.tokens.get(self.pos).cloned() {
            Some(Token::Num(v)) => {
                self.pos += 1;
                Ok(num(v))
            }
            Some(Token::Op('(')) => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                if self.eat('(') {
                    let arg = self.sum()?;
                    self.expect(')')?;
                    return function(&name, arg);
                }
                variable(&name)
            }
            other => Err(DiscError::Parse(format!("unexpected {other:?} at token {}", self.pos))),
        }
    }
}

fn function(name: &str, arg: Expr) -> Result<Expr, DiscError> {
    let half = C64::new(0.5, 0.0);
    Ok(match name {
        "exp" => call(Func::Exp, arg),
        "log" => call(Func::Log, arg),
        "sin" => call(Func::Sin, arg),
        "cos" => call(Func::Cos, arg),
        "sqrt" => call(Func::Sqrt, arg),
        "conj" => arg.conj(),
        "re" => mul(Expr::Num(half), add(arg.clone(), arg.conj())),
        "im" => mul(Expr::Num(C64::new(0.0, -0.5)), sub(arg.clone(), arg.conj())),
        "abs2" => mul(arg.clone(), arg.conj()),
        _ => return Err(DiscError::Parse(format!("unknown function '{name}'"))),
    })
}

fn variable(name: &str) -> Result<Expr, DiscError> {
    let index = |digits: &str| -> Result<usize, DiscError> {
        match digits.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(k - 1),
            _ => Err(DiscError::Parse(format!("bad variable '{name}'"))),
        }
    };
    Ok(match name {
        "i" => Expr::Num(C64::new(0.0, 1.0)),
        "pi" => num(std::f64::consts::PI),
        "z" => Expr::Var(Var::Z(0)),
        "zb" => Expr::Var(Var::Zb(0)),
        "tau" => Expr::Var(Var::Tau),
        "taub" => Expr::Var(Var::Taub),
        "theta" => Expr::Var(Var::Theta),
        _ if name.starts_with("zb") => Expr::Var(Var::Zb(index(&name[2..])?)),
        _ if name.starts_with('z') => Expr::Var(Var::Z(index(&name[1..])?)),
        _ => return Err(DiscError::Parse(format!("unknown identifier '{name}'"))),
    })
}

/// A potential given by a formula in `z1.., zb1.., tau, taub, theta`, with
/// `z`/`zb` short for `z1`/`zb1`. Supports `+ - * / ^`, `exp log sin cos sqrt`
/// and the formal operations `conj re im abs2`. Wirtinger derivatives are
/// taken symbolically; the value is the real part of the formula.
#[derive(Clone)]
pub struct ExpressionPotential {
    source: String,
    dim: usize,
    value: Arc<Expr>,
    grad: Arc<Vec<Expr>>,
    mixed: Arc<Vec<Vec<Expr>>>,
    holo: Arc<Vec<Vec<Expr>>>,
}

impl fmt::Debug for ExpressionPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExpressionPotential({:?}, n = {})", self.source, self.dim)
    }
}

impl ExpressionPotential {
    pub fn parse(source: &str, dim: usize) -> Result<Self, DiscError> {
        let mut p = Parser { tokens: tokenize(source)?, pos: 0 };
        let e = p.sum()?;
        if p.pos != p.tokens.len() {
            return Err(DiscError::Parse(format!("trailing input after token {}", p.pos)));
        }
        if let Some(k) = e.max_index() {
            if k >= dim {
                return Err(DiscError::Parse(format!("variable index {} exceeds dimension {dim}", k + 1)));
            }
        }
        let grad: Vec<Expr> = (0..dim).map(|i| e.diff(Var::Z(i))).collect();
        let mixed = grad.iter().map(|g| (0..dim).map(|j| g.diff(Var::Zb(j))).collect()).collect();
        let holo = grad.iter().map(|g| (0..dim).map(|j| g.diff(Var::Z(j))).collect()).collect();
        Ok(Self {
            source: source.to_string(),
            dim,
            value: Arc::new(e),
            grad: Arc::new(grad),
            mixed: Arc::new(mixed),
            holo: Arc::new(holo),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Imaginary part of the formula at a point; zero for a real potential.
    pub fn imaginary_part(&self, z: &[C64], theta: f64) -> f64 {
        self.value.eval(&Point { z, theta }).im
    }
}

impl Potential for ExpressionPotential {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, z: &[C64], theta: f64) -> f64 {
        self.value.eval(&Point { z, theta }).re
    }

    fn grad(&self, z: &[C64], theta: f64) -> Vec<C64> {
        let p = Point { z, theta };
        self.grad.iter().map(|g| g.eval(&p)).collect()
    }

    fn hess_mixed(&self, z: &[C64], theta: f64) -> Mat {
        let p = Point { z, theta };
        Mat::from_fn(self.dim, self.dim, |i, j| self.mixed[i][j].eval(&p))
    }

    fn hess_holo(&self, z: &[C64], theta: f64) -> Mat {
        let p = Point { z, theta };
        Mat::from_fn(self.dim, self.dim, |i, j| self.holo[i][j].eval(&p))
    }
}
