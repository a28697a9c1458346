//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr  := term (('+'|'-') term)*
//! term  := unary (('*'|'/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?          (right-associative, integer exponent)
//! atom  := number | identifier | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Decimal literals become exact rationals (`0.25` is `1/4`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::expr::Expr;
use super::table::SymbolTable;
use crate::scalar::Func;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("division by zero at {pos}")]
    DivisionByZero { pos: usize },
    #[error("exponent at {pos} is not an integer constant")]
    NonIntegerExponent { pos: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Op(char),
    End,
}

fn decimal(text: &str) -> BigRational {
    match text.split_once('.') {
        None => BigRational::from_integer(text.parse::<BigInt>().expect("digits")),
        Some((int, frac)) => {
            let digits = format!("{int}{frac}");
            let n = if digits.is_empty() {
                BigInt::zero()
            } else {
                digits.parse::<BigInt>().expect("digits")
            };
            BigRational::new(n, num_traits::pow(BigInt::from(10), frac.len()))
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            out.push((start, Tok::Num(decimal(&text[start..i]))));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(ParseError::Syntax {
                pos: i,
                msg: format!("unexpected character `{}`", text[i..].chars().next().unwrap()),
            });
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    symbols: &'a SymbolTable,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::Syntax {
                pos: self.pos(),
                msg: format!("expected `{c}`"),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Op('-') => {
                    self.bump();
                    let t = self.term()?;
                    terms.push(Expr::mul_raw(vec![Expr::int(-1), t]));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::add_raw(terms)
        })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.unary()?];
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    factors.push(self.unary()?);
                }
                Tok::Op('/') => {
                    let pos = self.pos();
                    self.bump();
                    let d = self.unary()?;
                    if d.simplify().is_zero() {
                        return Err(ParseError::DivisionByZero { pos });
                    }
                    factors.push(Expr::pow_raw(d, -1));
                }
                _ => break,
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::mul_raw(factors)
        })
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            let inner = self.unary()?;
            return Ok(Expr::mul_raw(vec![Expr::int(-1), inner]));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        let pos = self.pos();
        self.bump();
        let exp = self.unary()?.simplify();
        let n = exp
            .as_num()
            .filter(|r| r.is_integer())
            .and_then(|r| r.numer().to_i32())
            .ok_or(ParseError::NonIntegerExponent { pos })?;
        if n < 0 && base.simplify().is_zero() {
            return Err(ParseError::DivisionByZero { pos });
        }
        Ok(Expr::pow_raw(base, n))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(r) => Ok(Expr::num(r)),
            Tok::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::func_raw(f, arg));
                }
                match self.symbols.lookup(&name) {
                    Some(s) => Ok(Expr::sym(s)),
                    None => Err(ParseError::UnknownIdentifier { pos, name }),
                }
            }
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::End => Err(ParseError::Syntax {
                pos,
                msg: "unexpected end of input".into(),
            }),
            Tok::Op(c) => Err(ParseError::Syntax {
                pos,
                msg: format!("unexpected `{c}`"),
            }),
        }
    }
}

/// Parses `text` against the declared symbols and returns its canonical form.
pub fn parse_expression(text: &str, symbols: &SymbolTable) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        at: 0,
        symbols,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(ParseError::Syntax {
            pos: p.pos(),
            msg: "trailing input".into(),
        });
    }
    Ok(e.simplify())
}

/// Parses a constant expression (no identifiers) to an exact rational,
/// e.g. `1/10`, `0.25` or `-3/4`.
pub fn parse_rational(text: &str) -> Result<BigRational, ParseError> {
    let table = SymbolTable::new(&["_q"], &["_p"], &[]).expect("static table");
    let e = parse_expression(text, &table)?;
    match e.as_num() {
        Some(r) if e.symbols().is_empty() => Ok(r.clone()),
        _ => Err(ParseError::Syntax {
            pos: 0,
            msg: "expected a rational constant".into(),
        }),
    }
}
