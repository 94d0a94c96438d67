//! Coefficient expressions: rational literals, parameter names, `+ - * /` and parentheses.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Num, Zero};
use thiserror::Error;

use super::scalar::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("unknown parameter `{name}` at position {pos}")]
    UnknownParameter { name: String, pos: usize },
    #[error("division by zero at position {pos}")]
    DivisionByZero { pos: usize },
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
}

impl ExprError {
    pub fn position(&self) -> usize {
        match self {
            ExprError::UnknownParameter { pos, .. }
            | ExprError::DivisionByZero { pos }
            | ExprError::Syntax { pos, .. } => *pos,
        }
    }
}

/// Evaluates `text` exactly, substituting `params`.
///
/// Decimal literals such as `0.2` are read as exact fractions.
pub fn parse_coefficient_expression(
    text: &str,
    params: &BTreeMap<String, Rational>,
) -> Result<Rational, ExprError> {
    let mut parser = Parser { src: text.as_bytes(), pos: 0, params };
    let value = parser.expr()?;
    parser.skip_ws();
    if parser.pos < parser.src.len() {
        return Err(parser.syntax(format!("unexpected `{}`", parser.src[parser.pos] as char)));
    }
    Ok(value)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    params: &'a BTreeMap<String, Rational>,
}

impl Parser<'_> {
    fn syntax(&self, msg: impl Into<String>) -> ExprError {
        ExprError::Syntax { pos: self.pos, msg: msg.into() }
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

    fn expr(&mut self) -> Result<Rational, ExprError> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            if c == b'+' {
                acc += rhs;
            } else {
                acc -= rhs;
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Rational, ExprError> {
        let mut acc = self.factor()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            let op_pos = self.pos;
            self.pos += 1;
            let rhs = self.factor()?;
            if c == b'*' {
                acc *= rhs;
            } else {
                if rhs.is_zero() {
                    return Err(ExprError::DivisionByZero { pos: op_pos });
                }
                acc /= rhs;
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Rational, ExprError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'+') => {
                self.pos += 1;
                self.factor()
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.factor()?)
            }
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.syntax("expected `)`"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.name(),
            Some(c) => Err(self.syntax(format!("unexpected `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Rational, ExprError> {
        let start = self.pos;
        let mut digits = String::new();
        let mut frac_len = 0usize;
        let mut seen_dot = false;
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_digit() {
                digits.push(c as char);
                if seen_dot {
                    frac_len += 1;
                }
            } else if c == b'.' && !seen_dot {
                seen_dot = true;
            } else {
                break;
            }
            self.pos += 1;
        }
        if digits.is_empty() {
            return Err(ExprError::Syntax { pos: start, msg: "malformed number".into() });
        }
        let numer = BigInt::from_str_radix(&digits, 10)
            .map_err(|_| ExprError::Syntax { pos: start, msg: "malformed number".into() })?;
        let denom = num_traits::pow(BigInt::from(10), frac_len);
        Ok(Rational::new(numer, denom))
    }

    fn name(&mut self) -> Result<Rational, ExprError> {
        let start = self.pos;
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        self.params
            .get(name)
            .cloned()
            .ok_or_else(|| ExprError::UnknownParameter { name: name.to_string(), pos: start })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    fn params(list: &[(&str, Rational)]) -> BTreeMap<String, Rational> {
        list.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn center_locus_expression() {
        let p = params(&[("A", rat(1, 1)), ("D", rat(-3, 1))]);
        assert_eq!(parse_coefficient_expression("3*A + D", &p).unwrap(), rat(0, 1));
    }

    #[test]
    fn powers_are_rejected() {
        let p = params(&[("a", rat(1, 1))]);
        let err = parse_coefficient_expression("32 - (1+3*a)^2", &p).unwrap_err();
        assert!(matches!(err, ExprError::Syntax { pos: 12, .. }), "{err:?}");
    }

    #[test]
    fn plain_fractions() {
        let p = BTreeMap::new();
        assert_eq!(parse_coefficient_expression("1/2 - 1/3", &p).unwrap(), rat(1, 6));
        assert_eq!(parse_coefficient_expression("-31/25", &p).unwrap(), rat(-31, 25));
        assert_eq!(parse_coefficient_expression("0.2", &p).unwrap(), rat(1, 5));
        assert_eq!(parse_coefficient_expression("-(2*-3)", &p).unwrap(), rat(6, 1));
    }

    #[test]
    fn error_positions() {
        let p = BTreeMap::new();
        assert_eq!(
            parse_coefficient_expression("1 + b", &p).unwrap_err(),
            ExprError::UnknownParameter { name: "b".into(), pos: 4 }
        );
        assert_eq!(
            parse_coefficient_expression("3/(1-1)", &p).unwrap_err(),
            ExprError::DivisionByZero { pos: 1 }
        );
        assert!(matches!(
            parse_coefficient_expression("(1+2", &p).unwrap_err(),
            ExprError::Syntax { pos: 4, .. }
        ));
        assert!(matches!(
            parse_coefficient_expression("", &p).unwrap_err(),
            ExprError::Syntax { pos: 0, .. }
        ));
    }
}
