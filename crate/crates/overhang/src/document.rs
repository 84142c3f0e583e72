//! Stack and profile documents (JSON).
//!
//! A stack document:
//!
//! ```json
//! {
//!   "name": "harmonic-3",
//!   "blocks": [{ "x": -0.5, "level": 0 }],
//!   "point_weights": [{ "block": 0, "position": -0.5, "magnitude": 2 }],
//!   "order": [0]
//! }
//! ```
//!
//! Coordinates and magnitudes are JSON numbers read as exact decimals, or
//! strings `"p/q"` for fractions that have no finite decimal form. `name`,
//! `point_weights` and `order` (a laying order) are optional.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use overhang_core::search::BrickWallProfile;
use overhang_core::{Block, PointWeight, Rational, Stack};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum DocError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Invalid(String),
}

/// A stack plus an optional laying order.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub stack: Stack,
    pub order: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Num {
    Number(serde_json::Number),
    Text(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBlock {
    x: Num,
    level: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeight {
    block: usize,
    position: Num,
    magnitude: Num,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    blocks: Vec<RawBlock>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    point_weights: Vec<RawWeight>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<Vec<usize>>,
}

/// Exact value of a decimal literal such as `-1.25e-3`.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all = format!("{int}{frac}");
    let n = BigInt::from_str(if all.is_empty() { "0" } else { &all }).ok()?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = Rational::from_integer(n);
    if scale >= 0 {
        r *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -r } else { r })
}

/// Exact value and nearest double of a number field.
fn read_num(n: &Num, what: &str) -> Result<(Rational, f64), DocError> {
    let bad = || DocError::Invalid(format!("{what}: not a number"));
    match n {
        Num::Number(v) => {
            let s = v.to_string();
            let r = parse_decimal(&s).ok_or_else(bad)?;
            let f = s.parse::<f64>().map_err(|_| bad())?;
            Ok((r, f))
        }
        Num::Text(s) => {
            let r = match s.split_once('/') {
                Some((p, q)) => {
                    let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
                    let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
                    if q.is_zero() {
                        return Err(DocError::Invalid(format!("{what}: zero denominator")));
                    }
                    Rational::new(p, q)
                }
                None => parse_decimal(s.trim()).ok_or_else(bad)?,
            };
            let f = match s.split_once('/') {
                Some(_) => r.to_f64().ok_or_else(bad)?,
                None => s.trim().parse::<f64>().map_err(|_| bad())?,
            };
            Ok((r, f))
        }
    }
}

/// Finite decimal expansion of r, if it has one.
pub fn decimal_string(r: &Rational) -> Option<String> {
    let mut den = r.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return None;
    }
    let digits = twos.max(fives);
    let scaled = r * Rational::from_integer(num_traits::pow(BigInt::from(10), digits));
    let n = scaled.to_integer();
    let neg = n.is_negative();
    let s = n.abs().to_string();
    let out = if digits == 0 {
        s
    } else {
        let padded = format!("{:0>width$}", s, width = digits + 1);
        let (a, b) = padded.split_at(padded.len() - digits);
        format!("{a}.{b}")
    };
    Some(if neg { format!("-{out}") } else { out })
}

fn write_num(exact: Option<&Rational>, float: f64) -> Num {
    let text = match exact {
        Some(r) => match decimal_string(r) {
            Some(d) => d,
            None => return Num::Text(format!("{}/{}", r.numer(), r.denom())),
        },
        None => format!("{float}"),
    };
    Num::Number(serde_json::Number::from_str(&text).expect("decimal literal"))
}

fn syntax(e: serde_json::Error) -> DocError {
    DocError::Syntax {
        line: e.line(),
        column: e.column(),
        message: {
            let m = e.to_string();
            match m.rfind(" at line ") {
                Some(i) => m[..i].to_string(),
                None => m,
            }
        },
    }
}

pub fn parse_document(text: &str) -> Result<Document, DocError> {
    let raw: RawDoc = serde_json::from_str(text).map_err(syntax)?;
    let mut blocks = Vec::with_capacity(raw.blocks.len());
    for (i, b) in raw.blocks.iter().enumerate() {
        let (r, f) = read_num(&b.x, &format!("block {i} x"))?;
        blocks.push(Block {
            x: f,
            level: b.level,
            exact: Some(r),
        });
    }
    let mut weights = Vec::with_capacity(raw.point_weights.len());
    for (i, w) in raw.point_weights.iter().enumerate() {
        let (p, pf) = read_num(&w.position, &format!("point weight {i} position"))?;
        let (m, mf) = read_num(&w.magnitude, &format!("point weight {i} magnitude"))?;
        weights.push(PointWeight {
            block: w.block,
            position: pf,
            magnitude: mf,
            exact: Some((p, m)),
        });
    }
    let mut stack = Stack::new(blocks).with_weights(weights);
    stack.name = raw.name;
    if let Some(order) = &raw.order {
        let mut seen = vec![false; stack.len()];
        for &b in order {
            if b >= stack.len() || std::mem::replace(&mut seen[b], true) {
                return Err(DocError::Invalid(format!("order: bad or repeated block {b}")));
            }
        }
    }
    Ok(Document {
        stack,
        order: raw.order,
    })
}

pub fn write_document(doc: &Document) -> String {
    let s = &doc.stack;
    let raw = RawDoc {
        name: s.name.clone(),
        blocks: s
            .blocks
            .iter()
            .map(|b| RawBlock {
                x: write_num(b.exact.as_ref(), b.x),
                level: b.level,
            })
            .collect(),
        point_weights: s
            .weights
            .iter()
            .map(|w| RawWeight {
                block: w.block,
                position: write_num(w.exact.as_ref().map(|e| &e.0), w.position),
                magnitude: write_num(w.exact.as_ref().map(|e| &e.1), w.magnitude),
            })
            .collect(),
        order: doc.order.clone(),
    };
    let mut out = serde_json::to_string_pretty(&raw).expect("documents always serialize");
    out.push('\n');
    out
}

pub fn stack_document(stack: Stack) -> Document {
    Document { stack, order: None }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLevel {
    width: i64,
    /// 0 or 0.5: fractional part of `left`.
    offset: Num,
    left: Num,
    #[serde(default)]
    splitter: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    symmetric: bool,
    levels: Vec<RawLevel>,
}

/// Profile document: `{"symmetric": true, "levels": [{"width": 1,
/// "offset": 0.5, "left": -0.5}, ...]}`, bottom level first.
pub fn parse_profile(text: &str) -> Result<BrickWallProfile, DocError> {
    let raw: RawProfile = serde_json::from_str(text).map_err(syntax)?;
    let mut rows = Vec::with_capacity(raw.levels.len());
    let mut splitters = Vec::with_capacity(raw.levels.len());
    for (i, l) in raw.levels.iter().enumerate() {
        let (left, _) = read_num(&l.left, &format!("level {i} left"))?;
        let (offset, _) = read_num(&l.offset, &format!("level {i} offset"))?;
        let twice = left.clone() * Rational::from_integer(2.into());
        if !twice.is_integer() || l.width < 1 {
            return Err(DocError::Invalid(format!("level {i}: left must be a multiple of ½ and width positive")));
        }
        if (left.clone() - left.floor()) != offset {
            return Err(DocError::Invalid(format!("level {i}: offset does not match left")));
        }
        let lh = twice.to_integer().to_i64().ok_or_else(|| DocError::Invalid(format!("level {i}: left too large")))?;
        rows.push((lh, lh + 2 * l.width));
        splitters.push(l.splitter);
    }
    let p = BrickWallProfile {
        rows,
        symmetric: raw.symmetric,
        splitters,
    };
    p.validate().map_err(|e| DocError::Invalid(e.to_string()))?;
    Ok(p)
}

pub fn write_profile(p: &BrickWallProfile) -> String {
    let half = |h: i64| Rational::new(h.into(), 2.into());
    let raw = RawProfile {
        symmetric: p.symmetric,
        levels: p
            .rows
            .iter()
            .zip(&p.splitters)
            .map(|(&(l, r), &s)| {
                let left = half(l);
                let offset = left.clone() - left.floor();
                RawLevel {
                    width: (r - l) / 2,
                    offset: write_num(Some(&offset), 0.0),
                    left: write_num(Some(&left), 0.0),
                    splitter: s,
                }
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&raw).expect("profiles always serialize");
    out.push('\n');
    out
}

/// Outline polygon as CSV with an `x,y` header.
pub fn outline_csv(points: &[(f64, f64)]) -> String {
    let mut s = String::from("x,y\n");
    for (x, y) in points {
        s.push_str(&format!("{x},{y}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_decimal("0.1").unwrap(), Rational::new(1.into(), 10.into()));
        assert_eq!(parse_decimal("-2.5e-1").unwrap(), Rational::new((-1).into(), 4.into()));
        assert_eq!(parse_decimal("3").unwrap(), Rational::from_integer(3.into()));
        assert!(parse_decimal("1.2.3").is_none());
        assert!(parse_decimal("").is_none());
    }

    #[test]
    fn decimal_strings() {
        let r = |p: i64, q: i64| Rational::new(p.into(), q.into());
        assert_eq!(decimal_string(&r(-1, 2)).unwrap(), "-0.5");
        assert_eq!(decimal_string(&r(3, 1)).unwrap(), "3");
        assert_eq!(decimal_string(&r(1, 80)).unwrap(), "0.0125");
        assert!(decimal_string(&r(1, 3)).is_none());
    }

    #[test]
    fn round_trip() {
        let text = r#"{"name":"t","blocks":[{"x":-0.123456789012,"level":0},{"x":"1/3","level":1}],
            "point_weights":[{"block":1,"position":0.3333,"magnitude":2}]}"#;
        let d = parse_document(text).unwrap();
        let again = parse_document(&write_document(&d)).unwrap();
        assert_eq!(d, again);
        assert!(write_document(&d).contains("\"1/3\""));
    }

    #[test]
    fn errors_carry_location() {
        match parse_document("{\n \"blocks\": [ {\"x\": 1,, } ] }") {
            Err(DocError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse_document(r#"{"blocks":[{"x":"abc","level":0}]}"#).is_err());
        assert!(parse_document(r#"{"blocks":[],"order":[0]}"#).is_err());
    }

    #[test]
    fn profile_round_trip() {
        let p = BrickWallProfile::symmetric(&[1, 2, 3, 2]);
        let q = parse_profile(&write_profile(&p)).unwrap();
        assert_eq!(p, q);
    }
}
