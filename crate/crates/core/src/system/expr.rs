//! Coordinate expressions: polynomials in `L` with rational coefficients, e.g. `1 + 2*L` or `3/2`.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::ring::{Ring, RingElement};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("unexpected character '{0}' at offset {1}")]
    UnexpectedChar(char, usize),
    #[error("unexpected end of expression")]
    UnexpectedEnd,
    #[error("trailing input at offset {0}")]
    Trailing(usize),
    #[error("`L` is not available in the rational coordinate ring")]
    GeneratorUnavailable,
    #[error("division by zero")]
    DivisionByZero,
    #[error("exponent too large")]
    ExponentTooLarge,
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(BigInt),
    Gen,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Open,
    Close,
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let tok = match c {
            ' ' | '\t' => {
                i += 1;
                continue;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                out.push((Token::Num(digits.parse().expect("digits")), start));
                continue;
            }
            'L' | 'λ' => Token::Gen,
            '+' => Token::Plus,
            '-' | '−' => Token::Minus,
            '*' | '·' => Token::Star,
            '/' => Token::Slash,
            '^' => Token::Caret,
            '(' => Token::Open,
            ')' => Token::Close,
            other => return Err(ExprError::UnexpectedChar(other, i)),
        };
        out.push((tok, i));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    ring: &'a Ring,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<RingElement, ExprError> {
        let mut acc = self.term()?;
        while let Some(t) = self.peek() {
            match t {
                Token::Plus => {
                    self.pos += 1;
                    acc = acc + self.term()?;
                }
                Token::Minus => {
                    self.pos += 1;
                    acc = acc - self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RingElement, ExprError> {
        let mut acc = self.unary()?;
        while let Some(t) = self.peek() {
            match t {
                Token::Star => {
                    self.pos += 1;
                    acc = acc * self.unary()?;
                }
                Token::Slash => {
                    self.pos += 1;
                    let d = self.unary()?;
                    acc = acc.checked_div(&d).map_err(|_| ExprError::DivisionByZero)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<RingElement, ExprError> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        if self.peek() == Some(&Token::Plus) {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<RingElement, ExprError> {
        let base = self.atom()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            match self.next() {
                Some(Token::Num(n)) => {
                    let e: u32 = n.try_into().map_err(|_| ExprError::ExponentTooLarge)?;
                    if e > 4096 {
                        return Err(ExprError::ExponentTooLarge);
                    }
                    return Ok(base.pow(e));
                }
                Some(_) => return Err(ExprError::UnexpectedChar('^', self.offset())),
                None => return Err(ExprError::UnexpectedEnd),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RingElement, ExprError> {
        let offset = self.offset();
        match self.next() {
            Some(Token::Num(n)) => Ok(self.ring.from_rational(BigRational::from_integer(n))),
            Some(Token::Gen) => self
                .ring
                .generator()
                .map_err(|_| ExprError::GeneratorUnavailable),
            Some(Token::Open) => {
                let v = self.expr()?;
                match self.next() {
                    Some(Token::Close) => Ok(v),
                    Some(_) => Err(ExprError::UnexpectedChar(')', offset)),
                    None => Err(ExprError::UnexpectedEnd),
                }
            }
            Some(_) => Err(ExprError::UnexpectedChar(' ', offset)),
            None => Err(ExprError::UnexpectedEnd),
        }
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(usize::MAX, |(_, o)| *o)
    }
}

/// Parses a coordinate expression into `ring`.
pub fn parse_expression(text: &str, ring: &Ring) -> Result<RingElement, ExprError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        ring,
    };
    let v = p.expr()?;
    if p.pos < p.tokens.len() {
        return Err(ExprError::Trailing(p.tokens[p.pos].1));
    }
    Ok(v)
}

/// Parses a plain rational such as `17/10`, `-3`, or `(1/2)`.
pub fn parse_rational(text: &str) -> Result<BigRational, ExprError> {
    let v = parse_expression(text, &Ring::rational())?;
    Ok(v.coords()[0].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{rational, IntPoly, MinimalPolynomial};

    fn golden() -> Ring {
        Ring::algebraic(
            MinimalPolynomial::new(
                IntPoly::from_i64(&[-1, -1, 1]),
                rational(3, 2),
                rational(17, 10),
            )
            .unwrap(),
        )
    }

    #[test]
    fn polynomial_expressions() {
        let r = golden();
        let l = r.generator().unwrap();
        assert_eq!(parse_expression("L", &r).unwrap(), l);
        assert_eq!(
            parse_expression("1 + 2*L", &r).unwrap(),
            r.one() + l.scale(&rational(2, 1))
        );
        assert_eq!(parse_expression("L^2", &r).unwrap(), &l + &r.one());
        assert_eq!(
            parse_expression("-3/2*L", &r).unwrap(),
            l.scale(&rational(-3, 2))
        );
        assert_eq!(parse_expression("1/L", &r).unwrap(), &l - &r.one());
        assert_eq!(parse_expression("(L+1)*(L-1)", &r).unwrap(), l);
    }

    #[test]
    fn round_trips_display() {
        let r = golden();
        for text in ["0", "1 + L", "-1/2*L", "3/7 - 5*L"] {
            let v = parse_expression(text, &r).unwrap();
            assert_eq!(parse_expression(&v.to_string(), &r).unwrap(), v);
        }
    }

    #[test]
    fn errors() {
        let q = Ring::rational();
        assert_eq!(
            parse_expression("L", &q),
            Err(ExprError::GeneratorUnavailable)
        );
        assert!(parse_expression("1 +", &q).is_err());
        assert!(parse_expression("1/0", &q).is_err());
        assert!(parse_expression("2 x", &q).is_err());
        assert_eq!(parse_rational("17/10").unwrap(), rational(17, 10));
    }
}
