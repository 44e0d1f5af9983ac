//! Textual factorizations: `T(1,2)*T(2,3)^-1`, `(T(1,2)*U)^2`,
//! `CONJ(T(1,4), T(4,5)*U^-1)`.
//!
//! `^n` binds tighter than `*`, and `*` associates to the left. `1` or the
//! empty string is the identity. `B` is the boundary twist. Lowercase names
//! refer to caller-supplied bindings.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::error::{Error, Result};
use crate::mapclass::MappingClass;
use crate::surface::{ElementaryTable, Interval, SurfaceModel};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Identity,
    Twist(usize, usize),
    Transposition,
    BoundaryTwist,
    Var(String),
    Conj { i: usize, j: usize, by: Box<Expr> },
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown atom {0:?}")]
    UnknownAtom(String),
    #[error("T({i},{j}) names a one-sided curve")]
    OneSided { i: usize, j: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("at byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    model: SurfaceModel,
}

type PResult<T> = std::result::Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn err<T>(&self, offset: usize, kind: ParseErrorKind) -> PResult<T> {
        Err(ParseError { offset, kind })
    }

    fn syntax<T>(&self, msg: &str) -> PResult<T> {
        self.err(self.pos, ParseErrorKind::Syntax(msg.to_string()))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> PResult<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.syntax(&format!("expected '{}'", c as char))
        }
    }

    fn integer(&mut self) -> PResult<i64> {
        self.skip_ws();
        let start = self.pos;
        if self.src.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse().or_else(|_| self.err(start, ParseErrorKind::Syntax("expected an integer".into())))
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_') {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        while self.eat(b'*') {
            let rhs = self.term()?;
            lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut base = self.factor()?;
        while self.eat(b'^') {
            let n = self.integer()?;
            base = Expr::Pow(Box::new(base), n);
        }
        Ok(base)
    }

    fn twist_args(&mut self, at: usize) -> PResult<(usize, usize)> {
        self.expect(b'(')?;
        let i = self.integer()?;
        self.expect(b',')?;
        let j = self.integer()?;
        self.expect(b')')?;
        let k = self.model.crosscaps() as i64;
        if i >= 1 && j >= i && (j - i) % 2 == 0 {
            return self.err(at, ParseErrorKind::OneSided { i: i as usize, j: j as usize });
        }
        if i < 1 || j < i || j > k {
            return self.err(at, ParseErrorKind::UnknownAtom(format!("T({i},{j}) in {}", self.model)));
        }
        Ok((i as usize, j as usize))
    }

    fn factor(&mut self) -> PResult<Expr> {
        let Some(c) = self.peek() else {
            return self.syntax("unexpected end of input");
        };
        let at = self.pos;
        match c {
            b'(' => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            b'1' => {
                self.pos += 1;
                Ok(Expr::Identity)
            }
            c if c.is_ascii_alphabetic() => {
                let name = self.ident();
                match name.as_str() {
                    "T" => {
                        let (i, j) = self.twist_args(at)?;
                        Ok(Expr::Twist(i, j))
                    }
                    "U" if self.model.crosscaps() >= 2 => Ok(Expr::Transposition),
                    "B" => Ok(Expr::BoundaryTwist),
                    "CONJ" => {
                        self.expect(b'(')?;
                        let base_at = self.pos;
                        if self.peek() != Some(b'T') {
                            return self.syntax("CONJ expects a twist T(i,j) first");
                        }
                        self.pos += 1;
                        let (i, j) = self.twist_args(base_at)?;
                        self.expect(b',')?;
                        let by = self.expr()?;
                        self.expect(b')')?;
                        Ok(Expr::Conj { i, j, by: Box::new(by) })
                    }
                    n if n.starts_with(|c: char| c.is_ascii_lowercase()) => Ok(Expr::Var(name)),
                    _ => self.err(at, ParseErrorKind::UnknownAtom(name)),
                }
            }
            _ => self.syntax(&format!("unexpected '{}'", c as char)),
        }
    }
}

pub fn parse(src: &str, model: &SurfaceModel) -> std::result::Result<Expr, ParseError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, model: *model };
    if p.peek().is_none() {
        return Ok(Expr::Identity);
    }
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.syntax("trailing input");
    }
    Ok(e)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Identity => f.write_str("1"),
            Expr::Twist(i, j) => write!(f, "T({i},{j})"),
            Expr::Transposition => f.write_str("U"),
            Expr::BoundaryTwist => f.write_str("B"),
            Expr::Var(n) => f.write_str(n),
            Expr::Conj { i, j, by } => write!(f, "CONJ(T({i},{j}), {by})"),
            Expr::Mul(a, b) => {
                if matches!(**b, Expr::Mul(..)) {
                    write!(f, "{a}*({b})")
                } else {
                    write!(f, "{a}*{b}")
                }
            }
            Expr::Pow(e, n) => {
                if matches!(**e, Expr::Mul(..)) {
                    write!(f, "({e})^{n}")
                } else {
                    write!(f, "{e}^{n}")
                }
            }
        }
    }
}

pub type Bindings = BTreeMap<String, MappingClass>;

impl Expr {
    pub fn to_mapping_class(&self, table: &Arc<ElementaryTable>, env: &Bindings) -> Result<MappingClass> {
        Ok(match self {
            Expr::Identity => MappingClass::identity(table.clone()),
            Expr::Twist(i, j) => MappingClass::twist(table.clone(), *i, *j)?,
            Expr::Transposition => MappingClass::transposition(table.clone())?,
            Expr::BoundaryTwist => {
                MappingClass::elementary(table.clone(), crate::surface::Elementary::BoundaryTwist)?
            }
            Expr::Var(n) => {
                let mc = env.get(n).ok_or_else(|| Error::Unbound(n.clone()))?;
                if mc.model() != table.model() {
                    return Err(Error::ModelMismatch { left: table.model().crosscaps(), right: mc.crosscaps() });
                }
                mc.clone()
            }
            Expr::Conj { i, j, by } => {
                let by = by.to_mapping_class(table, env)?;
                MappingClass::conjugated_twist(Interval { i: *i, j: *j }, by)?
            }
            Expr::Mul(a, b) => a.to_mapping_class(table, env)?.mul(&b.to_mapping_class(table, env)?)?,
            Expr::Pow(e, n) => e.to_mapping_class(table, env)?.power(*n),
        })
    }
}

/// Parses and converts in one step.
pub fn mapping_class(src: &str, table: &Arc<ElementaryTable>, env: &Bindings) -> Result<MappingClass> {
    parse(src, &table.model())?.to_mapping_class(table, env)
}

/// Evaluates `name = expr` pairs in order; later ones may use earlier names.
pub fn bind_all<'a, I>(pairs: I, table: &Arc<ElementaryTable>) -> Result<Bindings>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let mut env = Bindings::new();
    for (name, src) in pairs {
        if !name.starts_with(|c: char| c.is_ascii_lowercase())
            || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            return Err(Error::Catalog(format!("binding name {name:?} must be a lowercase identifier")));
        }
        let mc = mapping_class(src, table, &env)?;
        env.insert(name.to_string(), mc);
    }
    Ok(env)
}
