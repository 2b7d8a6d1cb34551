//! Recursive-descent parser for the polynomial expression grammar.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('-' | '+') unary | power
//! power := atom ('^' uint)?
//! atom  := number | 'z' | 'w' | 'i' | '(' expr ')'
//! ```
//!
//! Division is only accepted by a nonzero constant, which covers rational
//! literals such as `1/3`.

use rug::{Integer, Rational};
use thiserror::Error;

use super::bipoly::BiPoly;
use crate::scalar::GaussRat;

/// Largest exponent accepted after `^`.
pub const MAX_EXPONENT: u32 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("literal overflow at offset {offset}: {message}")]
    Overflow { offset: usize, message: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::Overflow { offset, .. } => *offset,
        }
    }
}

/// Parses an expression into an exact, fully expanded polynomial.
pub fn parse_exact(text: &str) -> Result<BiPoly<GaussRat>, ParseError> {
    let mut p = Parser { chars: text.chars().collect(), pos: 0 };
    p.skip_ws();
    if p.peek().is_none() {
        return Err(p.err("empty expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if let Some(c) = p.peek() {
        return Err(p.err(&format!("unexpected '{c}'")));
    }
    Ok(e)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn err(&self, msg: &str) -> ParseError {
        ParseError::Syntax { offset: self.pos, message: msg.to_string() }
    }

    fn expr(&mut self) -> Result<BiPoly<GaussRat>, ParseError> {
        let mut acc = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some('-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<BiPoly<GaussRat>, ParseError> {
        let mut acc = self.unary()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some('/') => {
                    let at = self.pos;
                    self.pos += 1;
                    let d = self.unary()?;
                    let c = match (d.len(), d.coeff(0, 0)) {
                        (1, Some(c)) => c.clone(),
                        (0, _) => {
                            return Err(ParseError::Syntax { offset: at, message: "division by zero".into() })
                        }
                        _ => {
                            return Err(ParseError::Syntax {
                                offset: at,
                                message: "division by a non-constant expression".into(),
                            })
                        }
                    };
                    acc = acc.scale(&c.inv().expect("nonzero constant"));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<BiPoly<GaussRat>, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<BiPoly<GaussRat>, ParseError> {
        let base = self.atom()?;
        self.skip_ws();
        if self.peek() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a non-negative integer exponent"));
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        let e: u32 = match digits.parse::<u32>() {
            Ok(e) if e <= MAX_EXPONENT => e,
            _ => {
                return Err(ParseError::Overflow {
                    offset: start,
                    message: format!("exponent exceeds {MAX_EXPONENT}"),
                })
            }
        };
        Ok(base.pow(e, &GaussRat::one()))
    }

    fn atom(&mut self) -> Result<BiPoly<GaussRat>, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some('z') => {
                self.pos += 1;
                Ok(BiPoly::var_z())
            }
            Some('w') => {
                self.pos += 1;
                Ok(BiPoly::var_w())
            }
            Some('i') => {
                self.pos += 1;
                Ok(BiPoly::constant(GaussRat::i()))
            }
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) => Err(self.err(&format!("unexpected '{c}'"))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn number(&mut self) -> Result<BiPoly<GaussRat>, ParseError> {
        let start = self.pos;
        let int_part = self.digits();
        let mut frac = String::new();
        if self.peek() == Some('.') {
            self.pos += 1;
            frac = self.digits();
        }
        if int_part.is_empty() && frac.is_empty() {
            return Err(ParseError::Syntax { offset: start, message: "malformed number".into() });
        }
        let mut exp10: i64 = -(frac.len() as i64);
        if matches!(self.peek(), Some('e') | Some('E')) {
            let save = self.pos;
            self.pos += 1;
            let neg = match self.peek() {
                Some('-') => {
                    self.pos += 1;
                    true
                }
                Some('+') => {
                    self.pos += 1;
                    false
                }
                _ => false,
            };
            let ed = self.digits();
            if ed.is_empty() {
                self.pos = save;
                return Err(self.err("malformed exponent"));
            }
            let v: i64 = ed.parse().map_err(|_| ParseError::Overflow {
                offset: save,
                message: "decimal exponent too large".into(),
            })?;
            if v > 10_000 {
                return Err(ParseError::Overflow { offset: save, message: "decimal exponent too large".into() });
            }
            exp10 += if neg { -v } else { v };
        }
        let mantissa: Integer = format!("{int_part}{frac}").parse().unwrap_or_default();
        let q = if exp10 >= 0 {
            Rational::from(mantissa * Integer::from(Integer::u_pow_u(10, exp10 as u32)))
        } else {
            Rational::from((mantissa, Integer::from(Integer::u_pow_u(10, (-exp10) as u32))))
        };
        Ok(BiPoly::constant(GaussRat::new(q, Rational::new())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_expansion() {
        let p = parse_exact("z^2*(w - z)^2").unwrap();
        assert_eq!(p.support(), vec![(2, 2), (3, 1), (4, 0)]);
        assert_eq!(p.coeff(2, 2), Some(&GaussRat::one()));
        assert_eq!(p.coeff(3, 1), Some(&GaussRat::from_int(-2)));
    }

    #[test]
    fn sum_of_powers() {
        let p = parse_exact("w^2 + z^3").unwrap();
        assert_eq!(p.support(), vec![(0, 2), (3, 0)]);
    }

    #[test]
    fn double_caret_fails_at_offset_two() {
        assert_eq!(parse_exact("z^^2").unwrap_err().offset(), 2);
    }

    #[test]
    fn gaussian_rational_coefficients() {
        let p = parse_exact("(1/2 + 1/3*i)*z^2*w - w^3").unwrap();
        let c = p.coeff(2, 1).unwrap();
        assert_eq!(c.re, Rational::from((1, 2)));
        assert_eq!(c.im, Rational::from((1, 3)));
        assert_eq!(p.coeff(0, 3), Some(&GaussRat::from_int(-1)));
    }

    #[test]
    fn decimals_are_exact() {
        let p = parse_exact("0.25*z + 1.5e2").unwrap();
        assert_eq!(p.coeff(1, 0).unwrap().re, Rational::from((1, 4)));
        assert_eq!(p.coeff(0, 0).unwrap().re, Rational::from(150));
    }

    #[test]
    fn rejects_implicit_multiplication_and_bad_division() {
        assert!(parse_exact("2z").is_err());
        assert!(parse_exact("z/w").is_err());
        assert!(parse_exact("z/0").is_err());
        assert!(parse_exact("").is_err());
        assert!(parse_exact("(z").is_err());
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let p = parse_exact("-z^2").unwrap();
        assert_eq!(p.coeff(2, 0), Some(&GaussRat::from_int(-1)));
    }
}
