//! Text formats: Gauss codes, planar front files and atlas files.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{Coorientation, DiagramError, LegendrianGaussDiagram, Sign, Site};
use crate::geometry::{Point, COORD_LIMIT};
use crate::realization::PlanarFrontDiagram;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    /// `position` counts whitespace-separated tokens from 0 (the base token).
    #[error("syntax error at token {position} ({token:?}): {message}")]
    Syntax { position: usize, token: String, message: String },
    #[error("invalid diagram: {0}")]
    Validation(#[from] DiagramError),
}

fn syntax(position: usize, token: &str, message: &str) -> ParseError {
    ParseError::Syntax { position, token: token.to_string(), message: message.to_string() }
}

fn parse_id(digits: &str) -> Option<u32> {
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

fn parse_token(position: usize, tok: &str) -> Result<Site, ParseError> {
    match tok {
        "C+" => return Ok(Site::Cusp(Sign::Pos)),
        "C-" => return Ok(Site::Cusp(Sign::Neg)),
        _ => {}
    }
    if let Some(rest) = tok.strip_prefix('A') {
        let (digits, kind) = rest.split_at(rest.len().saturating_sub(1));
        let id = parse_id(digits).ok_or_else(|| syntax(position, tok, "expected A<digits>h or A<digits>t"))?;
        return match kind {
            "h" => Ok(Site::Head(id)),
            "t" => Ok(Site::Tail(id)),
            _ => Err(syntax(position, tok, "arrow endpoint must end in h or t")),
        };
    }
    if let Some(digits) = tok.strip_prefix('S') {
        let id = parse_id(digits).ok_or_else(|| syntax(position, tok, "expected S<digits>"))?;
        return Ok(Site::Mark(id));
    }
    Err(syntax(position, tok, "unknown token"))
}

/// Parses `@L` / `@R` followed by site tokens, reading the cyclic word from
/// index 0.
pub fn parse_gauss_code(text: &str) -> Result<LegendrianGaussDiagram, ParseError> {
    let line = text.strip_suffix('\n').unwrap_or(text);
    let line = line.strip_suffix('\r').unwrap_or(line);
    if line.contains(['\n', '\r']) {
        return Err(syntax(0, "", "a Gauss code is a single line"));
    }
    let mut tokens = line.split_whitespace();
    let base = match tokens.next() {
        Some("@L") => Coorientation::L,
        Some("@R") => Coorientation::R,
        Some(t) => return Err(syntax(0, t, "expected @L or @R")),
        None => return Err(syntax(0, "", "empty input")),
    };
    let sites = tokens.enumerate().map(|(i, t)| parse_token(i + 1, t)).collect::<Result<Vec<_>, _>>()?;
    Ok(LegendrianGaussDiagram::new(sites, base)?)
}

/// Canonical rotation in text form.
pub fn emit_gauss_code(d: &LegendrianGaussDiagram) -> Result<String, DiagramError> {
    Ok(d.canonical_code()?.0)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct PlanarParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

fn perr(line: usize, column: usize, message: impl Into<String>) -> PlanarParseError {
    PlanarParseError { line, column, message: message.into() }
}

/// Exact decimal (`-1.25`) or rational (`3/7`) number.
fn parse_number(s: &str) -> Option<(BigInt, BigInt)> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        let (p, q) = if q < BigInt::zero() { (-p, -q) } else { (p, q) };
        let g = p.gcd(&q);
        return Some((p / &g, q / g));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let mut num: BigInt = digits.parse().ok()?;
    if neg {
        num = -num;
    }
    let den = BigInt::from(10u32).pow(frac.len() as u32);
    let g = num.gcd(&den);
    Some((num / &g, den / g))
}

/// Splits `(a, b) (c, d)` into items with their starting columns (1-based).
fn parenthesized(text: &str, offset: usize, line: usize) -> Result<Vec<(usize, String)>, PlanarParseError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c.is_whitespace() || c == ',' {
            continue;
        }
        if c != '(' {
            return Err(perr(line, offset + i + 1, format!("expected '(' but found {c:?}")));
        }
        let start = i + 1;
        let mut end = None;
        for (j, d) in chars.by_ref() {
            if d == ')' {
                end = Some(j);
                break;
            }
        }
        let end = end.ok_or_else(|| perr(line, offset + i + 1, "unclosed '('"))?;
        out.push((offset + start + 1, text[start..end].to_string()));
    }
    Ok(out)
}

// numerator, denominator
type Fraction = (BigInt, BigInt);

/// Reads a planar front file:
///
/// ```text
/// coorientation_seed: L
/// vertices: (0, 0) (10, 0) (5/2, 7.5)
/// cusps: (1, +) (2, -)
/// virtual: 0:2
/// ```
///
/// Coordinates are exact; all points are scaled by the least common
/// denominator to integers. `#` starts a comment.
pub fn parse_planar(text: &str) -> Result<PlanarFrontDiagram, PlanarParseError> {
    let mut coords: Vec<(usize, usize, Fraction, Fraction)> = Vec::new();
    let mut cusps = Vec::new();
    let mut virtual_raw: Vec<(usize, usize, usize, usize)> = Vec::new();
    let mut seed = None;
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once(':') else {
            return Err(perr(line_no, 1, "expected 'key: value'"));
        };
        let offset = key.len() + 1;
        match key.trim() {
            "vertices" => {
                for (col, item) in parenthesized(value, offset, line_no)? {
                    let Some((x, y)) = item.split_once(',') else {
                        return Err(perr(line_no, col, "expected 'x, y'"));
                    };
                    let px = parse_number(x).ok_or_else(|| perr(line_no, col, format!("bad number {:?}", x.trim())))?;
                    let py = parse_number(y)
                        .ok_or_else(|| perr(line_no, col + x.len() + 1, format!("bad number {:?}", y.trim())))?;
                    coords.push((line_no, col, px, py));
                }
            }
            "cusps" => {
                for (col, item) in parenthesized(value, offset, line_no)? {
                    let Some((i, s)) = item.split_once(',') else {
                        return Err(perr(line_no, col, "expected 'index, sign'"));
                    };
                    let idx: usize =
                        i.trim().parse().map_err(|_| perr(line_no, col, format!("bad vertex index {:?}", i.trim())))?;
                    let sign = match s.trim() {
                        "+" => Sign::Pos,
                        "-" => Sign::Neg,
                        other => return Err(perr(line_no, col + i.len() + 1, format!("bad cusp sign {other:?}"))),
                    };
                    cusps.push((idx, sign));
                }
            }
            "virtual" => {
                let mut col = offset + 1;
                for tok in value.split(|c: char| c.is_whitespace() || c == ',') {
                    if tok.is_empty() {
                        col += 1;
                        continue;
                    }
                    let bad = || perr(line_no, col, format!("bad crossing id {tok:?}, expected a:b"));
                    let (a, b) = tok.split_once(':').ok_or_else(bad)?;
                    let a: usize = a.parse().map_err(|_| bad())?;
                    let b: usize = b.parse().map_err(|_| bad())?;
                    virtual_raw.push((line_no, col, a, b));
                    col += tok.len() + 1;
                }
            }
            "coorientation_seed" => {
                seed = Some(match value.trim() {
                    "L" => Coorientation::L,
                    "R" => Coorientation::R,
                    other => return Err(perr(line_no, offset + 2, format!("expected L or R, found {other:?}"))),
                });
            }
            other => return Err(perr(line_no, 1, format!("unknown field {other:?}"))),
        }
    }
    if coords.len() < 3 {
        return Err(perr(text.lines().count().max(1), 1, "a closed polyline needs at least three vertices"));
    }
    let mut lcm = BigInt::one();
    for (_, _, (_, qx), (_, qy)) in &coords {
        lcm = lcm.lcm(qx).lcm(qy);
    }
    let limit = BigInt::from(COORD_LIMIT);
    let mut vertices = Vec::with_capacity(coords.len());
    for (line, col, (px, qx), (py, qy)) in &coords {
        let x = px * (&lcm / qx);
        let y = py * (&lcm / qy);
        if x.magnitude() > limit.magnitude() || y.magnitude() > limit.magnitude() {
            return Err(perr(*line, *col, "coordinate exceeds the supported range after scaling"));
        }
        vertices.push(Point::new(x.to_i64().expect("bounded"), y.to_i64().expect("bounded")));
    }
    let n = vertices.len();
    for &(idx, _) in &cusps {
        if idx >= n {
            return Err(perr(1, 1, format!("cusp on missing vertex {idx}")));
        }
    }
    let mut virtual_pairs = BTreeSet::new();
    for (line, col, a, b) in virtual_raw {
        if a >= n || b >= n || a == b {
            return Err(perr(line, col, format!("crossing {a}:{b} names a missing segment")));
        }
        virtual_pairs.insert((a.min(b), a.max(b)));
    }
    Ok(PlanarFrontDiagram { vertices, cusps, virtual_pairs, coorientation_seed: seed.unwrap_or(Coorientation::L) })
}

pub fn emit_planar(p: &PlanarFrontDiagram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "coorientation_seed: {}", p.coorientation_seed.symbol());
    out.push_str("vertices:");
    for v in &p.vertices {
        let _ = write!(out, " ({}, {})", v.x, v.y);
    }
    out.push('\n');
    out.push_str("cusps:");
    for (i, s) in &p.cusps {
        let _ = write!(out, " ({}, {})", i, s.symbol());
    }
    out.push('\n');
    out.push_str("virtual:");
    for (a, b) in &p.virtual_pairs {
        let _ = write!(out, " {a}:{b}");
    }
    out.push('\n');
    out
}

/// Minimal SVG of a planar front; virtual crossings get a small circle.
pub fn planar_svg(p: &PlanarFrontDiagram) -> String {
    let (mut x0, mut y0, mut x1, mut y1) = (i64::MAX, i64::MAX, i64::MIN, i64::MIN);
    for v in &p.vertices {
        x0 = x0.min(v.x);
        y0 = y0.min(v.y);
        x1 = x1.max(v.x);
        y1 = y1.max(v.y);
    }
    let w = (x1 - x0).max(1);
    let h = (y1 - y0).max(1);
    let r = (w.max(h) / 200).max(1);
    let mut out = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{x0} {y0} {w} {h}\">\n");
    let pts: Vec<String> = p.vertices.iter().map(|v| format!("{},{}", v.x, v.y)).collect();
    let _ = writeln!(
        out,
        "<polygon points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"{}\"/>",
        pts.join(" "),
        r / 2 + 1
    );
    for (i, _) in &p.cusps {
        let v = p.vertices[*i];
        let _ = writeln!(out, "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"red\"/>", v.x, v.y, r);
    }
    if let Ok(cs) = crate::geometry::crossings(&p.vertices) {
        for c in cs.iter().filter(|c| p.virtual_pairs.contains(&(c.a, c.b))) {
            let (a, b) = crate::geometry::segment(&p.vertices, c.a);
            let t = c.ta.num as f64 / c.ta.den as f64;
            let x = a.x as f64 + (b.x - a.x) as f64 * t;
            let y = a.y as f64 + (b.y - a.y) as f64 * t;
            let _ =
                writeln!(out, "<circle cx=\"{x:.0}\" cy=\"{y:.0}\" r=\"{}\" fill=\"none\" stroke=\"blue\"/>", r * 2);
        }
    }
    out.push_str("</svg>\n");
    out
}

pub const ATLAS_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtlasHeader {
    pub mode: String,
    pub budget: crate::engine::SearchBudget,
    pub format_version: u32,
    pub max_word_length: usize,
    pub max_arrows: usize,
    pub max_cusps: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtlasFileRecord {
    pub code: String,
    pub maslov: i64,
    pub arrows: usize,
    pub cusps: usize,
    pub genus: usize,
    pub rho: u8,
    pub orbit_id: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtlasFile {
    pub header: AtlasHeader,
    pub records: Vec<AtlasFileRecord>,
}

#[derive(Debug, Error)]
pub enum AtlasFileError {
    #[error("malformed atlas file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported atlas format version {0}")]
    Version(u32),
}

pub fn atlas_to_json(a: &AtlasFile) -> String {
    let mut s = serde_json::to_string_pretty(a).expect("atlas serializes");
    s.push('\n');
    s
}

pub fn atlas_from_json(text: &str) -> Result<AtlasFile, AtlasFileError> {
    let a: AtlasFile = serde_json::from_str(text)?;
    if a.header.format_version != ATLAS_FORMAT_VERSION {
        return Err(AtlasFileError::Version(a.header.format_version));
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_examples() {
        let d = parse_gauss_code("@L C+ C-").unwrap();
        assert_eq!(d.cusp_count(), 2);
        let k = parse_gauss_code("@R A1t A1h").unwrap();
        assert_eq!(k.arrow_count(), 1);
        assert_eq!(parse_gauss_code("@L C+"), Err(ParseError::Validation(DiagramError::OddCuspCount)));
    }

    #[test]
    fn gauss_syntax_positions() {
        for (text, pos) in [
            ("", 0),
            ("@X C+ C-", 0),
            ("@L C+ Q", 2),
            ("@L A1x A1h", 1),
            ("@L A1t Ah", 2),
            ("@L S", 1),
            ("@L C+ C−", 2),
            ("@L A99999999999t", 1),
        ] {
            match parse_gauss_code(text) {
                Err(ParseError::Syntax { position, .. }) => assert_eq!(position, pos, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn emit_is_canonical() {
        let d = parse_gauss_code("@R C- C+").unwrap();
        let e = emit_gauss_code(&d).unwrap();
        assert_eq!(parse_gauss_code(&e).unwrap().canonical_code().unwrap().0, e);
        assert_eq!(e, d.canonical_code().unwrap().0);
    }

    #[test]
    fn planar_parsing() {
        let text = "# square\ncoorientation_seed: R\nvertices: (0, 0) (1/2, 0) (0.5, 1.25) (0, 1)\ncusps: (1, +) (3, -)\nvirtual:\n";
        let p = parse_planar(text).unwrap();
        assert_eq!(p.vertices[1], Point::new(2, 0));
        assert_eq!(p.vertices[2], Point::new(2, 5));
        assert_eq!(p.coorientation_seed, Coorientation::R);
        assert_eq!(parse_planar(&emit_planar(&p)).unwrap(), p);
        let e = parse_planar("vertices: (0, 0) (1, x) (2, 2)\n").unwrap_err();
        assert_eq!(e.line, 1);
        assert!(e.column > 1);
        let e = parse_planar("vertices: (0,0) (1,0) (1,1)\ncusps: (1, *)\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(parse_planar("vertices: (0,0) (1,0) (1,1)\nvirtual: 0-1\n").is_err());
    }
}
