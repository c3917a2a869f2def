use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use super::{BlaschkeFactor, MapError, MapExpr, Primitive};

const MAX_DEPTH: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    Type,
    Constraint,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::Type => "type error",
            ParseErrorKind::Constraint => "constraint violation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at offset {offset}: {message} (expected {expected})")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the input, at most the input length.
    pub offset: usize,
    pub message: String,
    pub expected: String,
}

type PResult<T> = Result<T, ParseError>;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
}

const PRIMITIVES: &str = "cayley, invcayley, rot, diskaut, hshift, hscale, hnudge, hmob, blaschke";

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            src: text.as_bytes(),
            pos: 0,
            depth: 0,
        }
    }

    fn err(&self, kind: ParseErrorKind, offset: usize, message: impl Into<String>, expected: impl Into<String>) -> ParseError {
        ParseError {
            kind,
            offset: offset.min(self.src.len()),
            message: message.into(),
            expected: expected.into(),
        }
    }

    fn syntax(&self, message: impl Into<String>, expected: impl Into<String>) -> ParseError {
        self.err(ParseErrorKind::Syntax, self.pos, message, expected)
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

    fn found(&mut self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(b) if b.is_ascii_graphic() => format!("'{}'", b as char),
            Some(b) => format!("byte 0x{b:02x}"),
        }
    }

    fn expect(&mut self, ch: u8) -> PResult<()> {
        if self.peek() == Some(ch) {
            self.pos += 1;
            Ok(())
        } else {
            let found = self.found();
            Err(self.syntax(format!("unexpected {found}"), format!("'{}'", ch as char)))
        }
    }

    fn map(&mut self) -> PResult<MapExpr> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.syntax("nesting too deep", format!("at most {MAX_DEPTH} levels")));
        }
        let mut acc = self.term()?;
        while self.peek() == Some(b'.') {
            let dot = self.pos;
            self.pos += 1;
            let next = self.term()?;
            acc = MapExpr::compose(acc, next).map_err(|e| self.map_error(dot, e))?;
        }
        self.depth -= 1;
        Ok(acc)
    }

    fn map_error(&self, offset: usize, e: MapError) -> ParseError {
        match e {
            MapError::Constraint(msg) => self.err(ParseErrorKind::Constraint, offset, msg, "parameters satisfying the constraint"),
            MapError::TypeMismatch {
                outer_domain,
                inner_codomain,
            } => self.err(
                ParseErrorKind::Type,
                offset,
                format!("composition mismatch: {inner_codomain} != {outer_domain}"),
                format!("a right operand with codomain {outer_domain}"),
            ),
            MapError::NotEndo { domain, codomain } => self.err(
                ParseErrorKind::Type,
                offset,
                format!("cannot iterate a {domain} -> {codomain} map"),
                "a self-map",
            ),
            MapError::ZeroIterate => self.err(ParseErrorKind::Syntax, offset, "iteration count 0", "natural number >= 1"),
        }
    }

    fn term(&mut self) -> PResult<MapExpr> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            let caret = self.pos;
            self.pos += 1;
            let n_at = {
                self.skip_ws();
                self.pos
            };
            let n = self.nat()?;
            if n == 0 {
                return Err(self.err(ParseErrorKind::Syntax, n_at, "iteration count 0", "natural number >= 1"));
            }
            return MapExpr::iterate(base, n).map_err(|e| self.map_error(caret, e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> PResult<MapExpr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.map()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(b) if b.is_ascii_alphabetic() => self.primitive(),
            _ => {
                let found = self.found();
                Err(self.syntax(format!("unexpected {found}"), format!("'(' or a primitive ({PRIMITIVES})")))
            }
        }
    }

    fn ident(&mut self) -> &'a str {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        // ASCII-only slice of valid UTF-8
        std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("")
    }

    fn primitive(&mut self) -> PResult<MapExpr> {
        self.skip_ws();
        let start = self.pos;
        let name = self.ident();
        let prim = match name {
            "cayley" => Primitive::Cayley,
            "invcayley" => Primitive::InvCayley,
            "rot" => {
                self.expect(b'(')?;
                let theta = self.real()?;
                self.expect(b')')?;
                Primitive::Rot { theta }
            }
            "diskaut" => {
                self.expect(b'(')?;
                let theta = self.real()?;
                self.expect(b',')?;
                let a = self.complex()?;
                self.expect(b')')?;
                Primitive::DiskAut { theta, a }
            }
            "hshift" => {
                self.expect(b'(')?;
                let b = self.complex()?;
                self.expect(b')')?;
                Primitive::HShift { b }
            }
            "hscale" => {
                self.expect(b'(')?;
                let a = self.real()?;
                self.expect(b')')?;
                Primitive::HScale { a }
            }
            "hnudge" => {
                self.expect(b'(')?;
                let c = self.complex()?;
                self.expect(b')')?;
                Primitive::HNudge { c }
            }
            "hmob" => {
                self.expect(b'(')?;
                let a = self.real()?;
                self.expect(b',')?;
                let b = self.real()?;
                self.expect(b',')?;
                let c = self.real()?;
                self.expect(b',')?;
                let d = self.real()?;
                self.expect(b')')?;
                Primitive::HMobius { a, b, c, d }
            }
            "blaschke" => {
                self.expect(b'(')?;
                let theta = self.real()?;
                self.expect(b';')?;
                let mut factors = vec![self.factor()?];
                while self.peek() == Some(b',') {
                    self.pos += 1;
                    factors.push(self.factor()?);
                }
                self.expect(b')')?;
                Primitive::Blaschke { theta, factors }
            }
            _ => {
                return Err(self.err(
                    ParseErrorKind::Syntax,
                    start,
                    format!("unknown primitive '{name}'"),
                    format!("one of {PRIMITIVES}"),
                ))
            }
        };
        MapExpr::prim(prim).map_err(|e| self.map_error(start, e))
    }

    fn factor(&mut self) -> PResult<BlaschkeFactor> {
        self.expect(b'(')?;
        let zero = self.complex()?;
        self.expect(b',')?;
        self.skip_ws();
        let m_at = self.pos;
        let multiplicity = self.nat()?;
        if multiplicity == 0 {
            return Err(self.err(ParseErrorKind::Syntax, m_at, "multiplicity 0", "natural number >= 1"));
        }
        self.expect(b')')?;
        Ok(BlaschkeFactor { zero, multiplicity })
    }

    fn nat(&mut self) -> PResult<u32> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            let found = self.found();
            return Err(self.syntax(format!("unexpected {found}"), "natural number"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse::<u32>()
            .map_err(|_| self.err(ParseErrorKind::Syntax, start, format!("'{text}' does not fit in 32 bits"), "natural number"))
    }

    /// Unsigned decimal: `digits[.digits][e[sign]digits]`.
    fn unsigned_number(&mut self) -> PResult<Option<f64>> {
        let start = self.pos;
        let s = self.src;
        let mut p = self.pos;
        let digits = |p: &mut usize| {
            let b = *p;
            while *p < s.len() && s[*p].is_ascii_digit() {
                *p += 1;
            }
            *p - b
        };
        let mut mantissa = digits(&mut p);
        if p < s.len() && s[p] == b'.' {
            p += 1;
            mantissa += digits(&mut p);
        }
        if mantissa == 0 {
            return Ok(None);
        }
        if p < s.len() && (s[p] == b'e' || s[p] == b'E') {
            let mut q = p + 1;
            if q < s.len() && (s[q] == b'+' || s[q] == b'-') {
                q += 1;
            }
            if digits(&mut q) > 0 {
                p = q;
            }
        }
        self.pos = p;
        let text = std::str::from_utf8(&s[start..p]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Some(x)),
            _ => Err(self.err(ParseErrorKind::Syntax, start, format!("number '{text}' out of range"), "finite real number")),
        }
    }

    fn sign(&mut self) -> Option<f64> {
        match self.peek() {
            Some(b'+') => {
                self.pos += 1;
                Some(1.0)
            }
            Some(b'-') => {
                self.pos += 1;
                Some(-1.0)
            }
            _ => None,
        }
    }

    fn real(&mut self) -> PResult<f64> {
        let sign = self.sign().unwrap_or(1.0);
        self.skip_ws();
        match self.unsigned_number()? {
            Some(x) => Ok(sign * x),
            None => {
                let found = self.found();
                Err(self.syntax(format!("unexpected {found}"), "real number"))
            }
        }
    }

    /// `a`, `bi`, `i`, or `a±bi`.
    fn complex(&mut self) -> PResult<Complex64> {
        let sign = self.sign().unwrap_or(1.0);
        self.skip_ws();
        let first = self.unsigned_number()?;
        if self.src.get(self.pos) == Some(&b'i') {
            self.pos += 1;
            return Ok(Complex64::new(0.0, sign * first.unwrap_or(1.0)));
        }
        let re = match first {
            Some(x) => sign * x,
            None => {
                let found = self.found();
                return Err(self.syntax(format!("unexpected {found}"), "complex literal"));
            }
        };
        let save = self.pos;
        if let Some(s2) = self.sign() {
            self.skip_ws();
            let mag = self.unsigned_number()?;
            if self.src.get(self.pos) == Some(&b'i') {
                self.pos += 1;
                return Ok(Complex64::new(re, s2 * mag.unwrap_or(1.0)));
            }
            let found = self.found();
            return Err(self.syntax(format!("unexpected {found}"), "imaginary part ending in 'i'"));
        }
        self.pos = save;
        Ok(Complex64::new(re, 0.0))
    }

    fn end(&mut self) -> PResult<()> {
        match self.peek() {
            None => Ok(()),
            Some(_) => {
                let found = self.found();
                Err(self.syntax(format!("unexpected {found}"), "'.', '^' or end of input"))
            }
        }
    }
}

/// Parses DSL text into a well-typed expression.
pub fn parse_map(text: &str) -> Result<MapExpr, ParseError> {
    let mut p = Parser::new(text);
    let m = p.map()?;
    p.end()?;
    Ok(m)
}

/// Parses a standalone complex literal such as `0.3`, `-2i` or `1+0.5i`.
pub(crate) fn parse_complex_literal(text: &str) -> Result<Complex64, ParseError> {
    let mut p = Parser::new(text);
    let z = p.complex()?;
    p.end()?;
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Model;
    use crate::map::{format_map, Node};

    #[test]
    fn parses_primitives() {
        let m = parse_map("hshift(1+0i)").unwrap();
        assert_eq!(m.node(), &Node::Prim(Primitive::HShift { b: Complex64::new(1.0, 0.0) }));
        let m = parse_map("hshift(1)").unwrap();
        assert_eq!(format_map(&m), "hshift(1+0i)");
        let m = parse_map("blaschke(0;(0+0i,2))").unwrap();
        assert_eq!(format_map(&m), "blaschke(0;(0+0i,2))");
        let m = parse_map(" blaschke( 0.5 ; (0.1-0.2i, 1) , (-0.3i,3) ) ").unwrap();
        assert_eq!(format_map(&m), "blaschke(0.5;(0.1-0.2i,1),(0-0.3i,3))");
    }

    #[test]
    fn type_tags_propagate() {
        let m = parse_map("invcayley . hshift(1) . cayley").unwrap();
        assert_eq!((m.domain(), m.codomain()), (Model::Disk, Model::Disk));
        let m = parse_map("hshift(1) . cayley").unwrap();
        assert_eq!((m.domain(), m.codomain()), (Model::Disk, Model::HalfPlane));
        let m = parse_map("(invcayley . hscale(2) . cayley)^3").unwrap();
        assert!(m.is_endo());
    }

    #[test]
    fn composition_type_error_points_at_operator() {
        let e = parse_map("cayley . cayley").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Type);
        assert_eq!(e.offset, 7);
        assert!(e.message.contains("HalfPlane != Disk"), "{}", e.message);
        let e = parse_map("rot(1) . hshift(1)").unwrap_err();
        assert_eq!((e.kind, e.offset), (ParseErrorKind::Type, 7));
        let e = parse_map("cayley^2").unwrap_err();
        assert_eq!((e.kind, e.offset), (ParseErrorKind::Type, 6));
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let e = parse_map("rot(x)").unwrap_err();
        assert_eq!((e.kind, e.offset), (ParseErrorKind::Syntax, 4));
        let e = parse_map("frob(1)").unwrap_err();
        assert_eq!(e.offset, 0);
        let e = parse_map("hshift(1) .").unwrap_err();
        assert_eq!(e.offset, 11);
        let e = parse_map("hshift(1+2)").unwrap_err();
        assert_eq!(e.offset, 10);
        let e = parse_map("hshift(1)^0").unwrap_err();
        assert_eq!(e.offset, 10);
        let e = parse_map("hshift(1)^99999999999").unwrap_err();
        assert_eq!(e.offset, 10);
        let e = parse_map("hscale(1e999)").unwrap_err();
        assert_eq!(e.offset, 7);
    }

    #[test]
    fn constraint_errors_name_the_constraint() {
        let e = parse_map("diskaut(0, 1.5)").unwrap_err();
        assert_eq!((e.kind, e.offset), (ParseErrorKind::Constraint, 0));
        assert!(e.message.contains("|a| < 1"));
        let e = parse_map("hscale(2) . hshift(0-1i)").unwrap_err();
        assert_eq!((e.kind, e.offset), (ParseErrorKind::Constraint, 12));
    }

    #[test]
    fn complex_literals() {
        let cases = [
            ("1.5", Complex64::new(1.5, 0.0)),
            ("2i", Complex64::new(0.0, 2.0)),
            ("1+0.5i", Complex64::new(1.0, 0.5)),
            ("-0.3-1i", Complex64::new(-0.3, -1.0)),
            ("i", Complex64::new(0.0, 1.0)),
            ("-i", Complex64::new(0.0, -1.0)),
            ("1-i", Complex64::new(1.0, -1.0)),
            ("2.5e-3+1E2i", Complex64::new(2.5e-3, 100.0)),
        ];
        for (text, want) in cases {
            assert_eq!(parse_complex_literal(text).unwrap(), want, "{text}");
        }
        assert!(parse_complex_literal("1+2").is_err());
        assert!(parse_complex_literal("").is_err());
        assert!(parse_complex_literal("0.5x").is_err());
    }

    #[test]
    fn deep_nesting_is_rejected_not_overflowed() {
        let text = "(".repeat(10_000);
        let e = parse_map(&text).unwrap_err();
        assert!(e.offset <= text.len());
    }
}
