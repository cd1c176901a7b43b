use super::{p_pow, split_exponent, PuiseuxSeries};
use crate::arith::Prime;
use crate::error::{Error, Result};
use crate::valuation::{format_q, Q};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Canonical JSON form: `{"p":3,"level":1,"prec_num":15,"terms":[[num,coeff],...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub p: u64,
    pub level: u32,
    pub prec_num: u64,
    pub terms: Vec<(u64, u32)>,
}

impl From<&PuiseuxSeries> for SeriesJson {
    fn from(s: &PuiseuxSeries) -> SeriesJson {
        SeriesJson {
            p: s.prime().as_u64(),
            level: s.level(),
            prec_num: s.prec_num(),
            terms: s.terms().to_vec(),
        }
    }
}

impl TryFrom<SeriesJson> for PuiseuxSeries {
    type Error = Error;

    fn try_from(j: SeriesJson) -> Result<PuiseuxSeries> {
        let p = Prime::new(j.p)?;
        PuiseuxSeries::try_from_parts(p, j.level, j.prec_num, j.terms)
    }
}

impl PuiseuxSeries {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&SeriesJson::from(self)).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<PuiseuxSeries> {
        let j: SeriesJson = serde_json::from_str(s).map_err(|e| Error::Parse {
            offset: json_offset(s, &e),
            message: e.to_string(),
        })?;
        PuiseuxSeries::try_from(j)
    }
}

pub(crate) fn json_offset(s: &str, e: &serde_json::Error) -> usize {
    let line = e.line().max(1);
    let before: usize = s.split_inclusive('\n').take(line - 1).map(str::len).sum();
    before + e.column().saturating_sub(1)
}

pub(crate) fn format_exponent(q: Q) -> String {
    if q.is_integer() {
        format_q(q)
    } else {
        format!("({})", format_q(q))
    }
}

pub(crate) fn write_text(s: &PuiseuxSeries, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if s.is_zero() {
        return write!(f, "0");
    }
    for (i, &(e, c)) in s.terms().iter().enumerate() {
        if i > 0 {
            write!(f, " + ")?;
        }
        let q = s.exponent(e);
        match (e, c) {
            (0, c) => write!(f, "{c}")?,
            (_, 1) => write!(f, "X")?,
            (_, c) => write!(f, "{c}*X")?,
        }
        if e != 0 && q != Q::from_integer(1) {
            write!(f, "^{}", format_exponent(q))?;
        }
    }
    Ok(())
}

/// Plain-text input such as `X^(1/3) + 2*X^(4/3)`, truncated at `prec`.
pub fn parse_text(input: &str, p: Prime, prec: Q) -> Result<PuiseuxSeries> {
    let mut parser = TextParser {
        src: input.as_bytes(),
        pos: 0,
    };
    let mut terms: Vec<(Q, i64)> = Vec::new();
    parser.skip_ws();
    let mut sign = 1i64;
    if parser.eat(b'-') {
        sign = -1;
    }
    loop {
        let (e, c) = parser.term()?;
        terms.push((e, sign * c));
        parser.skip_ws();
        if parser.pos == parser.src.len() {
            break;
        }
        sign = if parser.eat(b'+') {
            1
        } else if parser.eat(b'-') {
            -1
        } else {
            return Err(parser.err("expected '+' or '-'"));
        };
    }
    let (tn, tl) = split_exponent(p, prec)?;
    let mut level = tl;
    let mut split = Vec::with_capacity(terms.len());
    for &(e, c) in &terms {
        let (n, l) = split_exponent(p, e)?;
        level = level.max(l);
        split.push((n, l, c));
    }
    let m = p.as_u64() as i64;
    let raw = split
        .into_iter()
        .map(|(n, l, c)| (n * p_pow(p, level - l), c.rem_euclid(m) as u64))
        .collect();
    Ok(PuiseuxSeries::from_parts(
        p,
        level,
        tn * p_pow(p, level - tl),
        raw,
    ))
}

struct TextParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl TextParser<'_> {
    fn err(&self, message: &str) -> Error {
        Error::Parse {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| Error::Parse {
                offset: start,
                message: "integer out of range".into(),
            })
    }

    fn rational(&mut self) -> Result<Q> {
        let n = self.integer()?;
        if self.eat(b'/') {
            let at = self.pos;
            let d = self.integer()?;
            if d == 0 {
                return Err(Error::Parse {
                    offset: at,
                    message: "zero denominator".into(),
                });
            }
            Ok(Q::new(n, d))
        } else {
            Ok(Q::from_integer(n))
        }
    }

    fn exponent(&mut self) -> Result<Q> {
        if self.eat(b'(') {
            let q = self.rational()?;
            if !self.eat(b')') {
                return Err(self.err("expected ')'"));
            }
            Ok(q)
        } else {
            Ok(Q::from_integer(self.integer()?))
        }
    }

    fn term(&mut self) -> Result<(Q, i64)> {
        self.skip_ws();
        let mut coeff = 1i64;
        let mut has_coeff = false;
        if self.peek().is_some_and(|b| b.is_ascii_digit()) {
            coeff = self.integer()?;
            has_coeff = true;
            if !self.eat(b'*') {
                self.skip_ws();
                if self.peek() == Some(b'X') {
                    return Err(self.err("expected '*' between coefficient and X"));
                }
                return Ok((Q::from_integer(0), coeff));
            }
        }
        self.skip_ws();
        if self.peek() != Some(b'X') {
            return Err(self.err(if has_coeff {
                "expected X after '*'"
            } else {
                "expected a coefficient or X"
            }));
        }
        self.pos += 1;
        if self.eat(b'^') {
            Ok((self.exponent()?, coeff))
        } else {
            Ok((Q::from_integer(1), coeff))
        }
    }
}
