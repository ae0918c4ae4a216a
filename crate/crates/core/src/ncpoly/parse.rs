//! Recursive-descent parser for polynomial expressions.
//!
//! ```text
//! expr    := matrix | poly
//! matrix  := "[" row ("," row)* "]"
//! row     := "[" poly ("," poly)* "]"
//! poly    := term (("+"|"-") term)*
//! term    := factor ("*" factor)*
//! factor  := base ("^" INT)?
//! base    := "x" INT | INT ("/" INT)? | "(" poly ")" | "-" factor
//! ```

use num_bigint::BigInt;

use super::{MatNCPoly, NCPoly};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Parses a polynomial or a square matrix of polynomials.
pub fn parse(text: &str) -> Result<MatNCPoly> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("end of input"));
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, expected: &str) -> Error {
        Error::Parse {
            pos: self.pos,
            expected: expected.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
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

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("{:?}", c as char)))
        }
    }

    fn int(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("integer"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(digits.parse().expect("digits form an integer"))
    }

    fn small_int(&mut self) -> Result<u32> {
        let start = self.pos;
        let n = self.int()?;
        u32::try_from(n).map_err(|_| Error::Parse {
            pos: start,
            expected: "small integer".into(),
        })
    }

    fn expr(&mut self) -> Result<MatNCPoly> {
        if self.peek() != Some(b'[') {
            return Ok(MatNCPoly::scalar(self.poly()?));
        }
        self.pos += 1;
        let mut rows = Vec::new();
        loop {
            self.expect(b'[')?;
            let mut row = vec![self.poly()?];
            while self.eat(b',') {
                row.push(self.poly()?);
            }
            self.expect(b']')?;
            rows.push(row);
            if !self.eat(b',') {
                break;
            }
        }
        let end = self.pos;
        self.expect(b']')?;
        let p = rows.len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::Parse {
                pos: end,
                expected: format!("{p} entries in every row"),
            });
        }
        MatNCPoly::new(p, rows.into_iter().flatten().collect())
    }

    fn poly(&mut self) -> Result<NCPoly> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<NCPoly> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<NCPoly> {
        let base = self.base()?;
        if self.eat(b'^') {
            let k = self.small_int()?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<NCPoly> {
        match self.peek() {
            Some(b'x') => {
                self.pos += 1;
                let start = self.pos;
                let i = self.small_int()?;
                if i == 0 {
                    return Err(Error::Parse {
                        pos: start,
                        expected: "generator index >= 1".into(),
                    });
                }
                Ok(NCPoly::var(i as usize))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.poly()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(self.factor()?.neg())
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.int()?;
                let den = if self.eat(b'/') {
                    let at = self.pos;
                    let d = self.int()?;
                    if d == BigInt::from(0) {
                        return Err(Error::Parse {
                            pos: at,
                            expected: "nonzero denominator".into(),
                        });
                    }
                    d
                } else {
                    BigInt::from(1)
                };
                Ok(NCPoly::constant(Scalar::from_bigints(num, den)))
            }
            _ => Err(self.error("one of x<index>, number, '(' or '-'")),
        }
    }
}
