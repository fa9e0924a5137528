//! Serialization and parsing: the JSON schemas shared by all modules
//! (polygons as vertex lists, extended dual vectors as triples, polynomials
//! as term lists with exact coefficient strings) and a small human syntax
//! for Laurent polynomials.

use crate::error::{Error, Result};
use crate::geometry::{ext, lv, ExtDualVec, LatticeVec, Polygon, Rat};
use crate::laurent::LaurentPoly;
use num_bigint::BigInt;
use num_traits::One;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::str::FromStr;

impl Serialize for LatticeVec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.x, self.y].serialize(s)
    }
}

impl<'de> Deserialize<'de> for LatticeVec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [x, y] = <[i64; 2]>::deserialize(d)?;
        Ok(lv(x, y))
    }
}

impl Serialize for ExtDualVec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.c.a, self.c.b, self.h].serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExtDualVec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [a, b, h] = <[i64; 3]>::deserialize(d)?;
        Ok(ext(a, b, h))
    }
}

#[derive(Serialize, Deserialize)]
struct PolygonRepr {
    vertices: Vec<LatticeVec>,
}

impl Serialize for Polygon {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolygonRepr { vertices: self.vertices().to_vec() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polygon {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PolygonRepr::deserialize(d)?;
        Polygon::from_vertices(repr.vertices).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exp: [i64; 2],
    coeff: String,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    terms: Vec<TermRepr>,
}

/// Formats an exact rational in lowest terms, omitting a unit denominator.
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p` or `p/q`.
pub fn rat_from_string(s: &str) -> Result<Rat> {
    let parse_int =
        |t: &str| BigInt::from_str(t.trim()).map_err(|e| Error::Parse(format!("{t:?}: {e}")));
    match s.split_once('/') {
        None => Ok(Rat::from_integer(parse_int(s)?)),
        Some((num, den)) => {
            let d = parse_int(den)?;
            if d == BigInt::from(0) {
                return Err(Error::Parse("zero denominator".into()));
            }
            Ok(Rat::new(parse_int(num)?, d))
        }
    }
}

impl Serialize for LaurentPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms = self
            .terms()
            .map(|(v, c)| TermRepr { exp: [v.x, v.y], coeff: rat_to_string(c) })
            .collect();
        PolyRepr { terms }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PolyRepr::deserialize(d)?;
        let mut terms = Vec::with_capacity(repr.terms.len());
        for t in repr.terms {
            let c = rat_from_string(&t.coeff).map_err(D::Error::custom)?;
            terms.push((lv(t.exp[0], t.exp[1]), c));
        }
        Ok(LaurentPoly::from_terms(terms))
    }
}

/// Parser for the human polynomial syntax: integers (optionally `p/q`),
/// the variables `x` and `y`, `+`, `-`, `*` (juxtaposition also multiplies),
/// `^` with integer exponents, and parentheses.
///
/// ```
/// use mutoric::io::parse_poly;
/// let f = parse_poly("1 + 2y + y^2 + x*y^2").unwrap();
/// assert_eq!(f.num_terms(), 4);
/// let g = parse_poly("(1+x)^4 + y^-1").unwrap();
/// assert_eq!(g.num_terms(), 6);
/// ```
pub fn parse_poly(input: &str) -> Result<LaurentPoly> {
    let tokens = tokenize(input)?;
    let mut parser = Parser { tokens, pos: 0 };
    let poly = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(Error::Parse(format!(
            "unexpected trailing token {:?}",
            parser.tokens[parser.pos]
        )));
    }
    Ok(poly)
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Int(BigInt),
    Var(char),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    Open,
    Close,
}

fn tokenize(input: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = input.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ' ' | '\t' | '\n' => {
                chars.next();
            }
            '0'..='9' => {
                let mut digits = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        digits.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Token::Int(BigInt::from_str(&digits).unwrap()));
            }
            'x' | 'y' => {
                out.push(Token::Var(c));
                chars.next();
            }
            '+' => {
                out.push(Token::Plus);
                chars.next();
            }
            '-' => {
                out.push(Token::Minus);
                chars.next();
            }
            '*' => {
                out.push(Token::Star);
                chars.next();
            }
            '^' => {
                out.push(Token::Caret);
                chars.next();
            }
            '/' => {
                out.push(Token::Slash);
                chars.next();
            }
            '(' => {
                out.push(Token::Open);
                chars.next();
            }
            ')' => {
                out.push(Token::Close);
                chars.next();
            }
            other => return Err(Error::Parse(format!("unexpected character {other:?}"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<LaurentPoly> {
        let mut negate = false;
        if matches!(self.peek(), Some(Token::Minus)) {
            self.next();
            negate = true;
        } else if matches!(self.peek(), Some(Token::Plus)) {
            self.next();
        }
        let mut acc = self.term()?;
        if negate {
            acc = acc.scale(&-Rat::one());
        }
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.next();
                    let t = self.term()?;
                    acc = &acc + &t;
                }
                Some(Token::Minus) => {
                    self.next();
                    let t = self.term()?;
                    acc = &acc - &t;
                }
                _ => return Ok(acc),
            }
        }
    }

    /// A product of factors, with `*` optional between them.
    fn term(&mut self) -> Result<LaurentPoly> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.next();
                    let f = self.factor()?;
                    acc = &acc * &f;
                }
                Some(Token::Int(_)) | Some(Token::Var(_)) | Some(Token::Open) => {
                    let f = self.factor()?;
                    acc = &acc * &f;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<LaurentPoly> {
        let base = match self.next() {
            Some(Token::Int(n)) => {
                // Fraction literal p/q.
                if matches!(self.peek(), Some(Token::Slash)) {
                    self.next();
                    match self.next() {
                        Some(Token::Int(d)) => {
                            if d == BigInt::from(0) {
                                return Err(Error::Parse("zero denominator".into()));
                            }
                            LaurentPoly::monomial(LatticeVec::ZERO, Rat::new(n, d))
                        }
                        other => {
                            return Err(Error::Parse(format!(
                                "expected denominator, found {other:?}"
                            )))
                        }
                    }
                } else {
                    LaurentPoly::monomial(LatticeVec::ZERO, Rat::from_integer(n))
                }
            }
            Some(Token::Var(v)) => {
                let e = if v == 'x' { lv(1, 0) } else { lv(0, 1) };
                LaurentPoly::monomial(e, Rat::one())
            }
            Some(Token::Open) => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Token::Close) => inner,
                    other => {
                        return Err(Error::Parse(format!("expected ')', found {other:?}")))
                    }
                }
            }
            other => return Err(Error::Parse(format!("expected a factor, found {other:?}"))),
        };
        if matches!(self.peek(), Some(Token::Caret)) {
            self.next();
            let mut neg = false;
            if matches!(self.peek(), Some(Token::Minus)) {
                self.next();
                neg = true;
            }
            match self.next() {
                Some(Token::Int(n)) => {
                    let e: i64 = n
                        .try_into()
                        .map_err(|_| Error::Parse("exponent out of range".into()))?;
                    if neg {
                        // Negative exponents only for single monomials.
                        if base.num_terms() != 1 {
                            return Err(Error::Parse(
                                "negative exponent on a non-monomial".into(),
                            ));
                        }
                        let (v, c) = base.terms().next().map(|(v, c)| (*v, c.clone())).unwrap();
                        if !c.is_one() {
                            return Err(Error::Parse(
                                "negative exponent on a non-unit coefficient".into(),
                            ));
                        }
                        Ok(LaurentPoly::monomial(lv(-e * v.x, -e * v.y), Rat::one()))
                    } else {
                        Ok(base.pow(e as u32))
                    }
                }
                other => Err(Error::Parse(format!("expected an exponent, found {other:?}"))),
            }
        } else {
            Ok(base)
        }
    }
}

/// Parses a comma-separated degree triple `a,b,h`.
pub fn parse_degree(s: &str) -> Result<ExtDualVec> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::Parse("expected a triple a,b,h".into()));
    }
    let mut vals = [0i64; 3];
    for (slot, p) in vals.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|e| Error::Parse(format!("{p:?}: {e}")))?;
    }
    Ok(ext(vals[0], vals[1], vals[2]))
}

/// Parses a semicolon-separated vertex list `x0,y0; x1,y1; …` into a polygon.
pub fn parse_polygon(s: &str) -> Result<Polygon> {
    let mut vertices = Vec::new();
    for part in s.split(';') {
        let coords: Vec<&str> = part.split(',').map(str::trim).collect();
        if coords.len() != 2 {
            return Err(Error::Parse("expected pairs x,y separated by ';'".into()));
        }
        let x: i64 = coords[0].parse().map_err(|e| Error::Parse(format!("{e}")))?;
        let y: i64 = coords[1].parse().map_err(|e| Error::Parse(format!("{e}")))?;
        vertices.push(lv(x, y));
    }
    Polygon::hull(&vertices)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_roundtrip_through_json() {
        let f = parse_poly("1+2y+y^2+x*y^2").unwrap();
        let json = serde_json::to_string(&f).unwrap();
        let back: LaurentPoly = serde_json::from_str(&json).unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn human_syntax_matches_term_lists() {
        let f = parse_poly("1+2y+y^2+xy^2").unwrap();
        assert_eq!(f, LaurentPoly::from_int_terms([(0, 0, 1), (0, 1, 2), (0, 2, 1), (1, 2, 1)]));
        let g = parse_poly("(1+x)^4 + y(5-15x^2-10x^3)").unwrap();
        assert_eq!(
            g,
            LaurentPoly::from_int_terms([
                (0, 0, 1),
                (1, 0, 4),
                (2, 0, 6),
                (3, 0, 4),
                (4, 0, 1),
                (0, 1, 5),
                (2, 1, -15),
                (3, 1, -10),
            ])
        );
        let h = parse_poly("x^-2*y + 1/2").unwrap();
        assert_eq!(h.coeff(lv(-2, 1)), Rat::one());
        assert_eq!(h.coeff(lv(0, 0)), Rat::new(1.into(), 2.into()));
        assert!(parse_poly("x + $").is_err());
        assert!(parse_poly("(1+x").is_err());
    }

    #[test]
    fn polygon_json_schema() {
        let p = parse_polygon("0,0; 3,0; 0,2").unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"vertices":[[0,0],[3,0],[0,2]]}"#);
        let back: Polygon = serde_json::from_str(&json).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn degree_json_schema() {
        let m = parse_degree("0,2,-3").unwrap();
        assert_eq!(serde_json::to_string(&m).unwrap(), "[0,2,-3]");
    }
}
