//! Closed-form weight expressions.
//!
//! The grammar is small and total: no user code runs, every expression
//! evaluates to a complex number (possibly non-finite, which callers check).
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | ident | func '(' expr ')' | '(' expr ')' | '|' expr '|'
//! ident   := z | zbar | z2 | comp | i | pi | e
//! func    := exp | log | abs | re | im | conj | sqrt | step
//! ```

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::space::Point;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(Complex64),
    Var(Var),
    Neg(Box<Node>),
    Bin(Op, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Var {
    Z,
    ZBar,
    Z2,
    Comp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Exp,
    Log,
    Abs,
    Re,
    Im,
    Conj,
    Sqrt,
    Step,
}

/// A parsed weight expression together with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self> {
        let tokens = tokenize(source)?;
        let mut p = Parser { tokens, pos: 0 };
        let root = p.expr()?;
        if let Some(t) = p.tokens.get(p.pos) {
            return Err(Error::Expr {
                pos: t.offset,
                msg: format!("unexpected trailing token {:?}", t.kind),
            });
        }
        Ok(Expr {
            source: source.to_string(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, p: &Point) -> Complex64 {
        eval(&self.root, p)
    }

    /// True when the expression does not reference any coordinate.
    pub fn is_constant(&self) -> bool {
        fn walk(n: &Node) -> bool {
            match n {
                Node::Num(_) => true,
                Node::Var(_) => false,
                Node::Neg(a) | Node::Call(_, a) => walk(a),
                Node::Bin(_, a, b) => walk(a) && walk(b),
            }
        }
        walk(&self.root)
    }
}

fn eval(n: &Node, p: &Point) -> Complex64 {
    match n {
        Node::Num(c) => *c,
        Node::Var(Var::Z) => p.z,
        Node::Var(Var::ZBar) => p.z.conj(),
        Node::Var(Var::Z2) => p.z2,
        Node::Var(Var::Comp) => Complex64::new(p.comp as f64, 0.0),
        Node::Neg(a) => -eval(a, p),
        Node::Bin(op, a, b) => {
            let x = eval(a, p);
            let y = eval(b, p);
            match op {
                Op::Add => x + y,
                Op::Sub => x - y,
                Op::Mul => x * y,
                Op::Div => x / y,
                Op::Pow => {
                    if y.im == 0.0 && y.re.fract() == 0.0 && y.re.abs() <= 64.0 {
                        x.powi(y.re as i32)
                    } else {
                        x.powc(y)
                    }
                }
            }
        }
        Node::Call(f, a) => {
            let x = eval(a, p);
            match f {
                Func::Exp => x.exp(),
                Func::Log => x.ln(),
                Func::Abs => Complex64::new(x.norm(), 0.0),
                Func::Re => Complex64::new(x.re, 0.0),
                Func::Im => Complex64::new(x.im, 0.0),
                Func::Conj => x.conj(),
                Func::Sqrt => x.sqrt(),
                Func::Step => Complex64::new(if x.re >= 0.0 { 1.0 } else { 0.0 }, 0.0),
            }
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
    Caret,
    LParen,
    RParen,
    Bar,
}

#[derive(Debug, Clone)]
struct Token {
    kind: Tok,
    offset: usize,
}

fn tokenize(s: &str) -> Result<Vec<Token>> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        let kind = match c {
            ' ' | '\t' | '\n' => {
                i += 1;
                continue;
            }
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '|' => Tok::Bar,
            '0'..='9' | '.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let save = i;
                    i += 1;
                    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                        i += 1;
                    }
                    if i < bytes.len() && bytes[i].is_ascii_digit() {
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    } else {
                        i = save;
                    }
                }
                let text = &s[start..i];
                let v: f64 = text.parse().map_err(|_| Error::Expr {
                    pos: start,
                    msg: format!("bad number {text:?}"),
                })?;
                out.push(Token {
                    kind: Tok::Num(v),
                    offset: start,
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    kind: Tok::Ident(s[start..i].to_string()),
                    offset: start,
                });
                continue;
            }
            other => {
                return Err(Error::Expr {
                    pos: start,
                    msg: format!("unexpected character {other:?}"),
                })
            }
        };
        out.push(Token { kind, offset: start });
        i += 1;
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|t| t.offset)
            .unwrap_or_else(|| self.tokens.last().map(|t| t.offset + 1).unwrap_or(0))
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Expr {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {t:?}"))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => Op::Add,
                Some(Tok::Minus) => Op::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => Op::Mul,
                Some(Tok::Slash) => Op::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Bin(Op::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node> {
        let Some(tok) = self.peek().cloned() else {
            return self.err("unexpected end of expression");
        };
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Node::Num(Complex64::new(v, 0.0))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Bar => {
                let e = self.expr()?;
                self.expect(Tok::Bar)?;
                Ok(Node::Call(Func::Abs, Box::new(e)))
            }
            Tok::Ident(name) => {
                let func = match name.as_str() {
                    "exp" => Some(Func::Exp),
                    "log" => Some(Func::Log),
                    "abs" => Some(Func::Abs),
                    "re" => Some(Func::Re),
                    "im" => Some(Func::Im),
                    "conj" => Some(Func::Conj),
                    "sqrt" => Some(Func::Sqrt),
                    "step" => Some(Func::Step),
                    _ => None,
                };
                if let Some(f) = func {
                    self.expect(Tok::LParen)?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Node::Call(f, Box::new(arg)));
                }
                match name.as_str() {
                    "z" => Ok(Node::Var(Var::Z)),
                    "zbar" => Ok(Node::Var(Var::ZBar)),
                    "z2" => Ok(Node::Var(Var::Z2)),
                    "comp" => Ok(Node::Var(Var::Comp)),
                    "i" => Ok(Node::Num(Complex64::new(0.0, 1.0))),
                    "pi" => Ok(Node::Num(Complex64::new(std::f64::consts::PI, 0.0))),
                    "e" => Ok(Node::Num(Complex64::new(std::f64::consts::E, 0.0))),
                    _ => {
                        self.pos -= 1;
                        self.err(format!("unknown identifier {name:?}"))
                    }
                }
            }
            other => {
                self.pos -= 1;
                self.err(format!("unexpected token {other:?}"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(z: Complex64) -> Point {
        Point::new(z)
    }

    #[test]
    fn polynomial_in_z() {
        let e = Expr::parse("2+z").unwrap();
        let v = e.eval(&at(Complex64::new(0.0, 1.0)));
        assert_eq!(v, Complex64::new(2.0, 1.0));
    }

    #[test]
    fn modulus_bars_and_powers() {
        let e = Expr::parse("2 + |z|^2").unwrap();
        let v = e.eval(&at(Complex64::new(0.6, 0.8)));
        assert!((v.re - 3.0).abs() < 1e-15 && v.im == 0.0);
        let e = Expr::parse("2 + abs(z)^2").unwrap();
        assert!((e.eval(&at(Complex64::new(0.0, 0.5))).re - 2.25).abs() < 1e-15);
    }

    #[test]
    fn unimodular_exponential() {
        let e = Expr::parse("exp(i*(z+zbar)/2)").unwrap();
        for k in 0..16 {
            let z = Complex64::from_polar(1.0, k as f64 * 0.4);
            assert!((e.eval(&at(z)).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn precedence_and_unary_minus() {
        let e = Expr::parse("-2^2 + 3*4/2").unwrap();
        assert_eq!(e.eval(&at(Complex64::new(0.0, 0.0))).re, 2.0);
        let e = Expr::parse("1e-1 * 20").unwrap();
        assert!((e.eval(&at(Complex64::new(0.0, 0.0))).re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn step_function() {
        let e = Expr::parse("2 - 1.5*step(re(z))").unwrap();
        assert_eq!(e.eval(&at(Complex64::new(0.3, 0.0))).re, 0.5);
        assert_eq!(e.eval(&at(Complex64::new(-0.3, 0.0))).re, 2.0);
    }

    #[test]
    fn rejects_unknown_identifiers() {
        assert!(matches!(Expr::parse("2 + y"), Err(Error::Expr { .. })));
        assert!(matches!(Expr::parse("sin(z)"), Err(Error::Expr { .. })));
        assert!(Expr::parse("(1 + z").is_err());
        assert!(Expr::parse("1 +").is_err());
        assert!(Expr::parse("1 2").is_err());
    }

    #[test]
    fn constant_detection() {
        assert!(Expr::parse("2*pi").unwrap().is_constant());
        assert!(!Expr::parse("1/z").unwrap().is_constant());
    }

    #[test]
    fn singular_values_are_non_finite() {
        let e = Expr::parse("1/z").unwrap();
        let v = e.eval(&at(Complex64::new(0.0, 0.0)));
        assert!(!v.re.is_finite() || !v.im.is_finite());
    }
}
