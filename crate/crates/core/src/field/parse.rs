//! Recursive-descent parser for the scalar-field grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := base ('^' integer)?
//! base   := number | 'x' | 'y' | 'z' | 'exp' '(' expr ')' | '(' expr ')' | '-' factor
//! ```

use super::expr::{Expr, Var};
use super::FieldError;

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

pub fn parse_expr(src: &str) -> Result<Expr, FieldError> {
    let mut p = Parser { src, bytes: src.as_bytes(), pos: 0 };
    p.skip_ws();
    if p.at_end() {
        return Err(p.error("empty expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn error(&self, message: &str) -> FieldError {
        FieldError::Syntax { offset: self.pos, message: message.to_string() }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), FieldError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr, FieldError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, FieldError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, FieldError> {
        let base = self.base()?;
        if self.eat(b'^') {
            let n = self.integer()?;
            Ok(Expr::Pow(Box::new(base), n))
        } else {
            Ok(base)
        }
    }

    fn integer(&mut self) -> Result<i32, FieldError> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.bytes.get(self.pos), Some(b'-') | Some(b'+')) {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits {
            self.pos = start;
            return Err(self.error("expected integer exponent"));
        }
        self.src[start..self.pos].parse::<i32>().map_err(|_| {
            self.pos = start;
            self.error("exponent out of range")
        })
    }

    fn base(&mut self) -> Result<Expr, FieldError> {
        let Some(c) = self.peek() else {
            return Err(self.error("unexpected end of input"));
        };
        match c {
            b'-' => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            b'(' => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            b'0'..=b'9' | b'.' => self.number(),
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = self.pos;
                while self.pos < self.bytes.len()
                    && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                match &self.src[start..self.pos] {
                    "x" => Ok(Expr::Var(Var::X)),
                    "y" => Ok(Expr::Var(Var::Y)),
                    "z" => Ok(Expr::Var(Var::Z)),
                    "exp" => {
                        self.expect(b'(')?;
                        let e = self.expr()?;
                        self.expect(b')')?;
                        Ok(Expr::Exp(Box::new(e)))
                    }
                    _ => {
                        self.pos = start;
                        Err(self.error("unknown identifier"))
                    }
                }
            }
            _ => Err(self.error("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr, FieldError> {
        let start = self.pos;
        let b = self.bytes;
        let digits = |pos: &mut usize| {
            let s = *pos;
            while *pos < b.len() && b[*pos].is_ascii_digit() {
                *pos += 1;
            }
            *pos > s
        };
        let mut pos = self.pos;
        let int_part = digits(&mut pos);
        let mut frac_part = false;
        if pos < b.len() && b[pos] == b'.' {
            pos += 1;
            frac_part = digits(&mut pos);
        }
        if !int_part && !frac_part {
            return Err(self.error("malformed number"));
        }
        if pos < b.len() && (b[pos] == b'e' || b[pos] == b'E') {
            let mut q = pos + 1;
            if q < b.len() && (b[q] == b'+' || b[q] == b'-') {
                q += 1;
            }
            if digits(&mut q) {
                pos = q;
            }
        }
        self.pos = pos;
        self.src[start..pos]
            .parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| {
                self.pos = start;
                self.error("malformed number")
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_offset_of_bad_token() {
        match parse_expr("x + + y") {
            Err(FieldError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        match parse_expr("exp(z") {
            Err(FieldError::Syntax { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("{other:?}"),
        }
        match parse_expr("x ^ y") {
            Err(FieldError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expr("sin(x)"), Err(FieldError::Syntax { offset: 0, .. })));
        assert!(matches!(parse_expr(""), Err(FieldError::Syntax { .. })));
        assert!(matches!(parse_expr("x y"), Err(FieldError::Syntax { offset: 2, .. })));
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(parse_expr("1.5e-3").unwrap(), Expr::Const(1.5e-3));
        assert_eq!(parse_expr("2E+2").unwrap(), Expr::Const(200.0));
        assert_eq!(parse_expr(".5").unwrap(), Expr::Const(0.5));
    }

    #[test]
    fn precedence() {
        let e = parse_expr("-x^2 + 2*y/4 - z").unwrap();
        let p = crate::frame::Point::new(3.0, 2.0, 1.0);
        assert_eq!(e.eval(&p).unwrap(), -9.0 + 1.0 - 1.0);
        let e = parse_expr("x^-2").unwrap();
        assert_eq!(e.eval(&p).unwrap(), 1.0 / 9.0);
    }
}
