//! Operator-expression parser.
//!
//! ```text
//! expr    := ['+'|'-'] term (('+'|'-') term)*
//! term    := factor ('*' factor)*
//! factor  := primary ('^' ['-'] uint)*
//! primary := scalar | opname | '(' expr ')'
//! scalar  := uint ['/' uint] ['i'] | 'i' | symbol
//! ```
//!
//! Mode operators `a1 a2 b1 b2` take a dagger suffix `^`, `†` or `+`. A `^`
//! directly followed by a digit is a power, so `a1^^2` is `(a1†)²` and `a1^2`
//! is `a1²`. A `+` counts as a dagger only when it is attached to the name
//! and no operand follows, as in `a1+*b1` or `(a1+)`. Symbols are `w` (ω)
//! and the disentangling symbols `v`, `cp`, `cm`, `e0`. Negative powers are
//! allowed for single-term scalars only, e.g. `w^-1`.

use num_bigint::BigInt;
use num_rational::BigRational;

use cgf_core::coeff::{Coefficient, GaussRational, Symbol};
use cgf_core::hydrogenic::{generator, physical_operator, GeneratorName, PhysicalOpName};
use cgf_core::wick::{Family, ModeOp};
use cgf_core::OperatorExpr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at byte {offset}: expected {}; found {found}", expected.join(", "))]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

const OPERAND: &[&str] = &["number", "`i`", "symbol", "operator name", "`(`"];

pub fn parse_expr(text: &str) -> Result<OperatorExpr, ParseError> {
    let mut p = Parser { src: text, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(&["`+`", "`-`", "`*`", "`^`", "end of input"]));
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        let found = match self.peek() {
            None => "end of input".to_string(),
            Some(_) => {
                let tok: String = self
                    .rest()
                    .chars()
                    .take_while(|c| !c.is_whitespace())
                    .take(12)
                    .collect();
                format!("`{tok}`")
            }
        };
        ParseError {
            offset: self.pos,
            expected: expected.to_vec(),
            found,
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<OperatorExpr, ParseError> {
        self.skip_ws();
        let negate = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        let first = self.term()?;
        let mut acc = if negate { -&first } else { first };
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<OperatorExpr, ParseError> {
        let mut acc = self.factor()?;
        while self.eat('*') {
            acc = acc.multiply(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<OperatorExpr, ParseError> {
        let mut base = self.primary()?;
        loop {
            self.skip_ws();
            if self.peek() != Some('^') {
                return Ok(base);
            }
            let at = self.pos;
            self.pos += 1;
            self.skip_ws();
            let negative = self.eat('-');
            self.skip_ws();
            let n = self.uint().ok_or_else(|| self.error(&["exponent"]))?;
            let n: u32 = (&n)
                .try_into()
                .map_err(|_| ParseError {
                    offset: at,
                    expected: vec!["exponent below 2^32"],
                    found: n.to_string(),
                })?;
            base = if negative {
                let c = scalar_of(&base).ok_or_else(|| ParseError {
                    offset: at,
                    expected: vec!["non-negative exponent for an operator"],
                    found: "`-`".into(),
                })?;
                let inv = Coefficient::one().checked_div(&c.pow(n)).map_err(|_| ParseError {
                    offset: at,
                    expected: vec!["single-term scalar base for a negative power"],
                    found: format!("`{c}`"),
                })?;
                OperatorExpr::scalar(inv)
            } else {
                base.pow(n)
            };
        }
    }

    fn uint(&mut self) -> Option<BigInt> {
        let digits: &str = {
            let r = self.rest();
            let end = r.find(|c: char| !c.is_ascii_digit()).unwrap_or(r.len());
            &r[..end]
        };
        if digits.is_empty() {
            return None;
        }
        self.pos += digits.len();
        digits.parse().ok()
    }

    fn primary(&mut self) -> Result<OperatorExpr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error(&["`)`", "`+`", "`-`", "`*`"]));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_alphabetic() => {
                let ident: String = self
                    .rest()
                    .chars()
                    .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
                    .collect();
                self.pos += ident.len();
                self.named(&ident, start)
            }
            _ => Err(self.error(OPERAND)),
        }
    }

    fn number(&mut self) -> Result<OperatorExpr, ParseError> {
        let num = self.uint().expect("caller saw a digit");
        let den = if self.peek() == Some('/') {
            let slash = self.pos;
            self.pos += 1;
            match self.uint() {
                Some(d) if d != BigInt::from(0) => d,
                Some(_) => {
                    self.pos = slash + 1;
                    return Err(self.error(&["nonzero denominator"]));
                }
                None => {
                    self.pos = slash + 1;
                    return Err(self.error(&["integer denominator"]));
                }
            }
        } else {
            BigInt::from(1)
        };
        let q = BigRational::new(num, den);
        let imaginary = self.peek() == Some('i')
            && !self
                .rest()
                .chars()
                .nth(1)
                .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_');
        let g = if imaginary {
            self.pos += 1;
            GaussRational::new(BigRational::from_integer(0.into()), q)
        } else {
            GaussRational::real(q)
        };
        Ok(OperatorExpr::scalar(Coefficient::constant(g)))
    }

    fn named(&mut self, ident: &str, start: usize) -> Result<OperatorExpr, ParseError> {
        if let Some(op) = mode_name(ident) {
            let dagger = self.dagger_suffix();
            let op = if dagger { ModeOp::new(op.family, op.index, true) } else { op };
            return Ok(OperatorExpr::mode(op));
        }
        if ident == "i" {
            return Ok(OperatorExpr::scalar(Coefficient::i()));
        }
        if let Some(sym) = Symbol::ALL.iter().find(|s| s.name() == ident) {
            return Ok(OperatorExpr::scalar(Coefficient::symbol(*sym)));
        }
        if let Ok(g) = ident.parse::<GeneratorName>() {
            return Ok(generator(g));
        }
        if let Ok(p) = ident.parse::<PhysicalOpName>() {
            return Ok(physical_operator(p));
        }
        self.pos = start;
        Err(self.error(OPERAND))
    }

    fn dagger_suffix(&mut self) -> bool {
        let rest = self.rest();
        if rest.starts_with('†') {
            self.pos += '†'.len_utf8();
            return true;
        }
        if let Some(after) = rest.strip_prefix('^') {
            if !after.starts_with(|c: char| c.is_ascii_digit()) {
                self.pos += 1;
                return true;
            }
            return false;
        }
        if let Some(after) = rest.strip_prefix('+') {
            let next = after.trim_start().chars().next();
            let operand_follows = next.is_some_and(|c| c.is_alphanumeric() || c == '(');
            if !operand_follows {
                self.pos += 1;
                return true;
            }
        }
        false
    }
}

fn mode_name(ident: &str) -> Option<ModeOp> {
    let family = match ident.as_bytes().first()? {
        b'a' => Family::A,
        b'b' => Family::B,
        _ => return None,
    };
    let index = match &ident[1..] {
        "1" => 1,
        "2" => 2,
        _ => return None,
    };
    Some(ModeOp::new(family, index, false))
}

fn scalar_of(e: &OperatorExpr) -> Option<Coefficient> {
    if e.is_zero() {
        return Some(Coefficient::zero());
    }
    match e.terms().collect::<Vec<_>>().as_slice() {
        [(m, c)] if m.is_identity() => Some((*c).clone()),
        _ => None,
    }
}
