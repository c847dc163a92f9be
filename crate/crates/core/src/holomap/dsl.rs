//! Text syntax for maps, used by the command line.
//!
//! ```text
//! map   := "id" | "const(" num "," num ")" | "rot(" num ")" | "scale(" num ")"
//!        | "phi(" num "," num ")" | "falpha(" num ")" | "kalpha(" num ")"
//!        | "galpha(" num ")"
//!        | "blaschke([" [ "(" num "," num "," int ")" { "," ... } ] "];" num "," num ")"
//!        | "compose(" map "," map ")" | "mul(" map "," map ")"
//!        | "smul(" num "," num "," map ")"
//! ```
//!
//! Whitespace is ignored everywhere. Errors carry the byte offset of the
//! offending token.

use num_complex::Complex64;

use super::{BlaschkeZero, HoloMap};
use crate::error::{Error, Result};

/// Parses a map expression.
pub fn parse(input: &str) -> Result<HoloMap> {
    let mut p = Parser { src: input.as_bytes(), pos: 0 };
    let map = p.map()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("trailing input"));
    }
    Ok(map)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse { offset: self.pos, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, ch: u8) -> Result<()> {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&ch) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected '{}'", ch as char)))
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn ident(&mut self) -> Result<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a map name"));
        }
        // identifiers are ASCII letters, so this slice is valid UTF-8
        Ok((start, std::str::from_utf8(&self.src[start..self.pos]).unwrap()))
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let b = self.src[self.pos];
            let exp_sign = (b == b'+' || b == b'-')
                && self.pos > start
                && matches!(self.src[self.pos - 1], b'e' | b'E');
            if b.is_ascii_digit() || b == b'.' || b == b'e' || b == b'E' || exp_sign || (self.pos == start && (b == b'-' || b == b'+')) {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>().map_err(|_| Error::Parse { offset: start, message: format!("invalid number '{text}'") })
    }

    fn integer(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<u32>().map_err(|_| Error::Parse { offset: start, message: format!("invalid multiplicity '{text}'") })
    }

    fn complex_args(&mut self) -> Result<Complex64> {
        let re = self.number()?;
        self.expect(b',')?;
        let im = self.number()?;
        Ok(Complex64::new(re, im))
    }

    fn map(&mut self) -> Result<HoloMap> {
        let (start, name) = self.ident()?;
        // Constructor errors point at the start of the offending call.
        let at = |e: Error| match e {
            Error::InvalidMap(m) => Error::Parse { offset: start, message: m },
            other => other,
        };
        if name == "id" {
            return Ok(HoloMap::Identity);
        }
        self.expect(b'(')?;
        let map = match name {
            "const" => HoloMap::constant(self.complex_args()?).map_err(at)?,
            "rot" => HoloMap::rotation(self.number()?).map_err(at)?,
            "scale" => HoloMap::scale(self.number()?).map_err(at)?,
            "phi" => HoloMap::mobius(self.complex_args()?).map_err(at)?,
            "falpha" => HoloMap::neg_mobius_neg(self.number()?).map_err(at)?,
            "kalpha" => HoloMap::ma_minda_k(self.number()?).map_err(at)?,
            "galpha" => HoloMap::ma_minda_g(self.number()?).map_err(at)?,
            "blaschke" => {
                self.expect(b'[')?;
                let mut zeros = Vec::new();
                if self.peek() != Some(b']') {
                    loop {
                        self.expect(b'(')?;
                        let zero = self.complex_args()?;
                        self.expect(b',')?;
                        let multiplicity = self.integer()?;
                        self.expect(b')')?;
                        zeros.push(BlaschkeZero { zero, multiplicity });
                        if self.peek() == Some(b',') {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                }
                self.expect(b']')?;
                self.expect(b';')?;
                let sigma = self.complex_args()?;
                HoloMap::blaschke(zeros, sigma).map_err(at)?
            }
            "compose" => {
                let outer = self.map()?;
                self.expect(b',')?;
                let inner = self.map()?;
                HoloMap::compose(outer, inner)
            }
            "mul" => {
                let left = self.map()?;
                self.expect(b',')?;
                let right = self.map()?;
                HoloMap::product(left, right)
            }
            "smul" => {
                let sigma = self.complex_args()?;
                self.expect(b',')?;
                let inner = self.map()?;
                HoloMap::scalar_mul(sigma, inner).map_err(at)?
            }
            other => return Err(Error::Parse { offset: start, message: format!("unknown map '{other}'") }),
        };
        self.expect(b')')?;
        Ok(map)
    }
}
