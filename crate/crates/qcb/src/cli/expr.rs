//! Element-expression grammar.
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := '-'* factor (('*' | '/')? factor)*
//! factor  := atom ('\'' | '^' int)*
//! atom    := integer | ident | '(' sum ')'
//! ```
//!
//! `^` binds tighter than juxtaposition and `*`, which bind tighter than unary
//! minus, which binds tighter than `+`/`-`.

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::ncalg::{Algebra, Element};
use crate::scalars::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown token `{0}`")]
    UnknownToken(String),
    #[error("index out of range: `{0}`")]
    IndexOutOfRange(String),
    #[error("{0}")]
    Eval(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Int(BigInt),
    Ident(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Star(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
}

fn lex(text: &str) -> Result<Lexer, ParseError> {
    let mut toks = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut line, mut col) = (1, 1);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let s: String = chars[i..].iter().take_while(|c| c.is_ascii_digit()).collect();
            i += s.len();
            col += s.len();
            toks.push((Tok::Int(s.parse().unwrap()), l0, c0));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let s: String = chars[i..].iter().take_while(|c| c.is_ascii_alphanumeric() || **c == '_').collect();
            i += s.len();
            col += s.len();
            toks.push((Tok::Ident(s), l0, c0));
        } else if "+-*/^()'".contains(c) {
            i += 1;
            col += 1;
            toks.push((Tok::Sym(c), l0, c0));
        } else {
            return Err(ParseError::Syntax { line: l0, col: c0, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(Lexer { toks })
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn err(&self, msg: &str) -> ParseError {
        let (line, col) = self.toks.get(self.pos).map(|t| (t.1, t.2)).unwrap_or_else(|| {
            self.toks.last().map(|t| (t.1, t.2 + 1)).unwrap_or((1, 1))
        });
        ParseError::Syntax { line, col, msg: msg.to_string() }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
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

    fn starts_factor(&self) -> bool {
        matches!(self.peek(), Some(Tok::Int(_)) | Some(Tok::Ident(_)) | Some(Tok::Sym('(')))
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.product()?)));
        }
        let mut e = self.factor()?;
        loop {
            if self.eat('*') {
                e = Expr::Mul(Box::new(e), Box::new(self.factor()?));
            } else if self.eat('/') {
                e = Expr::Div(Box::new(e), Box::new(self.factor()?));
            } else if self.starts_factor() {
                e = Expr::Mul(Box::new(e), Box::new(self.factor()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn int_exponent(&mut self) -> Result<i32, ParseError> {
        let neg = self.eat('-');
        let paren = !neg && self.eat('(');
        let neg = if paren { self.eat('-') } else { neg };
        let k = match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                i32::try_from(n).map_err(|_| self.err("exponent too large"))?
            }
            _ => return Err(self.err("expected integer exponent")),
        };
        if paren && !self.eat(')') {
            return Err(self.err("expected `)`"));
        }
        Ok(if neg { -k } else { k })
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.atom()?;
        loop {
            if self.eat('\'') {
                e = Expr::Star(Box::new(e));
            } else if self.eat('^') {
                e = Expr::Pow(Box::new(e), self.int_exponent()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Expr::Int(n))
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(Expr::Ident(s))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.sum()?;
                if !self.eat(')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            _ => Err(self.err("expected a number, generator or `(`")),
        }
    }
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let lx = lex(text)?;
    let mut p = Parser { toks: lx.toks, pos: 0 };
    let e = p.sum()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Ident(s) => write!(f, "{s}"),
            Expr::Neg(a) => write!(f, "-({a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} {b})"),
            Expr::Div(a, b) => write!(f, "({a}/{b})"),
            Expr::Pow(a, k) => write!(f, "({a})^({k})"),
            Expr::Star(a) => write!(f, "({a})'"),
        }
    }
}

fn scalar_ident(s: &str) -> Option<Scalar> {
    match s {
        "v" => Some(Scalar::v()),
        "q" => Some(Scalar::q()),
        _ => None,
    }
}

/// Evaluates an expression that contains only `v`, `q` and integers.
pub fn eval_scalar(e: &Expr) -> Result<Scalar, ParseError> {
    Ok(match e {
        Expr::Int(n) => Scalar::from_bigint(n.clone()),
        Expr::Ident(s) => scalar_ident(s).ok_or_else(|| ParseError::UnknownToken(s.clone()))?,
        Expr::Neg(a) => -eval_scalar(a)?,
        Expr::Add(a, b) => eval_scalar(a)? + eval_scalar(b)?,
        Expr::Sub(a, b) => eval_scalar(a)? - eval_scalar(b)?,
        Expr::Mul(a, b) => eval_scalar(a)? * eval_scalar(b)?,
        Expr::Div(a, b) => {
            let d = eval_scalar(b)?;
            if d.is_zero() {
                return Err(ParseError::Eval("division by zero".into()));
            }
            eval_scalar(a)? / d
        }
        Expr::Pow(a, k) => {
            let x = eval_scalar(a)?;
            if x.is_zero() && *k < 0 {
                return Err(ParseError::Eval("zero to a negative power".into()));
            }
            x.pow(*k)
        }
        Expr::Star(a) => eval_scalar(a)?,
    })
}

pub fn parse_scalar(text: &str) -> Result<Scalar, ParseError> {
    eval_scalar(&parse(text)?)
}

/// Evaluates an expression in the given algebra. Generator names are those of
/// the presentation; a name that matches the generator pattern of the
/// presentation but is absent is reported as out of range.
pub fn eval_element(e: &Expr, alg: &Algebra) -> Result<Element, ParseError> {
    Ok(match e {
        Expr::Int(n) => Element::scalar(Scalar::from_bigint(n.clone())),
        Expr::Ident(s) => {
            if let Some(c) = scalar_ident(s) {
                Element::scalar(c)
            } else if let Some(l) = alg.presentation().letter(s) {
                Element::letter(l)
            } else if looks_like_generator(s) {
                return Err(ParseError::IndexOutOfRange(s.clone()));
            } else {
                return Err(ParseError::UnknownToken(s.clone()));
            }
        }
        Expr::Neg(a) => -&eval_element(a, alg)?,
        Expr::Add(a, b) => &eval_element(a, alg)? + &eval_element(b, alg)?,
        Expr::Sub(a, b) => &eval_element(a, alg)? - &eval_element(b, alg)?,
        Expr::Mul(a, b) => alg.mul(&eval_element(a, alg)?, &eval_element(b, alg)?),
        Expr::Div(a, b) => {
            let d = eval_scalar(b).map_err(|_| ParseError::Eval("can only divide by scalars".into()))?;
            if d.is_zero() {
                return Err(ParseError::Eval("division by zero".into()));
            }
            eval_element(a, alg)?.scale(&d.inv().unwrap())
        }
        Expr::Pow(a, k) => {
            let x = eval_element(a, alg)?;
            if *k >= 0 {
                alg.pow(&x, *k as u32)
            } else {
                let (w, c) = match (x.len(), x.leading()) {
                    (1, Some((w, c))) => (w.clone(), c.clone()),
                    _ => return Err(ParseError::Eval("negative power of a non-monomial".into())),
                };
                let wi = alg.word_inverse(&w).ok_or_else(|| ParseError::Eval("negative power of a non-invertible element".into()))?;
                let inv = Element::term(wi, c.inv().map_err(|e| ParseError::Eval(e.to_string()))?);
                alg.pow(&inv, (-*k) as u32)
            }
        }
        Expr::Star(a) => alg.star(&eval_element(a, alg)?),
    })
}

fn looks_like_generator(s: &str) -> bool {
    let mut it = s.chars();
    matches!(it.next(), Some('z' | 'u' | 'E' | 'F' | 'K')) && it.as_str().chars().all(|c| c.is_ascii_digit()) && s.len() > 1
}

pub fn parse_element(text: &str, alg: &Algebra) -> Result<Element, ParseError> {
    eval_element(&parse(text)?, alg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let e = parse("z1 z2' - q^-1 z2' z1").unwrap();
        assert!(matches!(e, Expr::Sub(..)));
        let e = parse("-a b").unwrap();
        assert!(matches!(e, Expr::Neg(_)));
        assert_eq!(parse("(z1 + z2)'").unwrap(), Expr::Star(Box::new(parse("z1 + z2").unwrap())));
        assert!(matches!(parse("a^2 b").unwrap(), Expr::Mul(..)));
    }

    #[test]
    fn syntax_error_position() {
        match parse("z1 +\n  )") {
            Err(ParseError::Syntax { line, col, .. }) => assert_eq!((line, col), (2, 3)),
            other => panic!("{other:?}"),
        }
        assert!(parse("z1 $").is_err());
    }

    #[test]
    fn scalars() {
        assert_eq!(parse_scalar("q^-1").unwrap(), Scalar::v_pow(-2));
        assert_eq!(parse_scalar("(1 - v^4)/(1 + v^2)").unwrap(), Scalar::laurent(0, &[1, 0, -1]));
        assert_eq!(parse_scalar("3/6").unwrap(), Scalar::rational(1, 2));
        assert!(parse_scalar("1/(q - q)").is_err());
    }
}
