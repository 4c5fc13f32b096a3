//! A small parser turning expressions like `3*x^2*y - x*y + 0.5` into
//! [`Poly2`] values for manufactured problems.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! expr   := [+|-] term ((+|-) term)*
//! term   := factor (* factor)*
//! factor := atom (^ uint)?
//! atom   := number | x | y | ( expr )
//! ```
//!
//! Multiplication is always explicit (`3*x`, not `3x`), exponents are
//! non-negative integers, and a leading minus negates the whole first term.

use vem::poly::Poly2;
use vem::{Result, VemError};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Token {
    Num(f64),
    X,
    Y,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn parse_error(msg: String) -> VemError {
    VemError::ParseError(msg)
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                tokens.push(Token::Plus);
                i += 1;
            }
            '-' => {
                tokens.push(Token::Minus);
                i += 1;
            }
            '*' => {
                tokens.push(Token::Star);
                i += 1;
            }
            '^' => {
                tokens.push(Token::Caret);
                i += 1;
            }
            '(' => {
                tokens.push(Token::LParen);
                i += 1;
            }
            ')' => {
                tokens.push(Token::RParen);
                i += 1;
            }
            'x' => {
                tokens.push(Token::X);
                i += 1;
            }
            'y' => {
                tokens.push(Token::Y);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                // Exponent part: e or E, optional sign, digits.
                if i < bytes.len() && matches!(bytes[i] as char, 'e' | 'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && matches!(bytes[j] as char, '+' | '-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| {
                    parse_error(format!("bad number literal '{text}' at byte {start}"))
                })?;
                tokens.push(Token::Num(value));
            }
            other => {
                return Err(parse_error(format!(
                    "unexpected character '{other}' at byte {i} \
                     (expected a number, x, y, or one of + - * ^ ( ))"
                )));
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<Token> {
        self.tokens.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.peek();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Poly2> {
        let mut negate = false;
        if let Some(sign @ (Token::Plus | Token::Minus)) = self.peek() {
            self.bump();
            negate = sign == Token::Minus;
        }
        let mut acc = self.term()?;
        if negate {
            acc = acc.scale(-1.0);
        }
        while let Some(sign @ (Token::Plus | Token::Minus)) = self.peek() {
            self.bump();
            let rhs = self.term()?;
            acc = if sign == Token::Minus {
                acc.add(&rhs.scale(-1.0))
            } else {
                acc.add(&rhs)
            };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly2> {
        let mut acc = self.factor()?;
        while self.peek() == Some(Token::Star) {
            self.bump();
            let rhs = self.factor()?;
            acc = acc.mul(&rhs);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Poly2> {
        let base = self.atom()?;
        if self.peek() == Some(Token::Caret) {
            self.bump();
            match self.bump() {
                Some(Token::Num(v)) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => {
                    Ok(base.pow(v as u32))
                }
                other => Err(parse_error(format!(
                    "exponent must be a non-negative integer, got {other:?}"
                ))),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Poly2> {
        match self.bump() {
            Some(Token::Num(v)) => Ok(Poly2::constant(v)),
            Some(Token::X) => Ok(Poly2::monomial(1, 0, 1.0)),
            Some(Token::Y) => Ok(Poly2::monomial(0, 1, 1.0)),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Token::RParen) => Ok(inner),
                    _ => Err(parse_error("missing closing parenthesis".into())),
                }
            }
            other => Err(parse_error(format!(
                "expected a number, x, y, or '(', got {other:?}"
            ))),
        }
    }
}

/// Parses a polynomial in the variables `x` and `y`.
pub fn parse_poly(src: &str) -> Result<Poly2> {
    let tokens = tokenize(src)?;
    if tokens.is_empty() {
        return Err(parse_error("empty polynomial expression".into()));
    }
    let mut parser = Parser { tokens, pos: 0 };
    let poly = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(parse_error(format!(
            "trailing input after the expression (token {:?})",
            parser.tokens[parser.pos]
        )));
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(src: &str, f: impl Fn(f64, f64) -> f64) {
        let p = parse_poly(src).unwrap();
        for &(x, y) in &[(0.0, 0.0), (1.0, 0.5), (-2.0, 3.0), (0.3, -0.7)] {
            let got = p.eval([x, y]);
            let want = f(x, y);
            assert!(
                (got - want).abs() <= 1e-12 * (1.0 + want.abs()),
                "{src} at ({x},{y}): got {got}, want {want}"
            );
        }
    }

    #[test]
    fn linear_and_constant_terms() {
        check("3*x - y + 0.5", |x, y| 3.0 * x - y + 0.5);
        check("-x + 2", |x, _| -x + 2.0);
        check("0.25", |_, _| 0.25);
    }

    #[test]
    fn powers_and_products() {
        check("x^2 - x*y", |x, y| x * x - x * y);
        check("x^3 - 3*x*y^2", |x, y| x.powi(3) - 3.0 * x * y * y);
        check("2*x^2*y^2", |x, y| 2.0 * x * x * y * y);
    }

    #[test]
    fn parentheses_group_subexpressions() {
        check("(x + y)^3", |x, y| (x + y).powi(3));
        check("(x - y)*(x + y)", |x, y| x * x - y * y);
        check("-(x + 1)*y", |x, y| -(x + 1.0) * y);
    }

    #[test]
    fn scientific_notation_literals() {
        check("2e-1*x + 1E2", |x, _| 0.2 * x + 100.0);
    }

    #[test]
    fn degree_is_tracked() {
        assert_eq!(parse_poly("x^4 - 6*x^2*y^2 + y^4").unwrap().degree(), Some(4));
        assert_eq!(parse_poly("x - x").unwrap().degree(), None);
    }

    #[test]
    fn malformed_input_is_rejected() {
        for bad in ["", "x +", "3x", "x^-1", "x^0.5", "(x", "x)", "z", "1..2"] {
            assert!(parse_poly(bad).is_err(), "'{bad}' should not parse");
        }
    }
}
