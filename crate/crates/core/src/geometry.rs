//! Exact planar predicates on closed integer polylines.
//!
//! Coordinates are `i64` bounded by [`COORD_LIMIT`]; every predicate runs in
//! `i128`, so classification of intersections is exact.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const COORD_LIMIT: i64 = 1 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const fn new(x: i64, y: i64) -> Point {
        Point { x, y }
    }
}

impl std::ops::Sub for Point {
    type Output = Vec2;

    fn sub(self, o: Point) -> Vec2 {
        Vec2 { x: (self.x - o.x) as i128, y: (self.y - o.y) as i128 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vec2 {
    pub x: i128,
    pub y: i128,
}

impl Vec2 {
    pub fn cross(self, o: Vec2) -> i128 {
        self.x * o.y - self.y * o.x
    }

    pub fn dot(self, o: Vec2) -> i128 {
        self.x * o.x + self.y * o.y
    }

    pub fn is_zero(self) -> bool {
        self.x == 0 && self.y == 0
    }

    fn half(self) -> u8 {
        if self.y > 0 || (self.y == 0 && self.x > 0) {
            0
        } else {
            1
        }
    }

    /// Compares polar angles in `[0, 2π)` measured from the positive x axis.
    pub fn angle_cmp(self, o: Vec2) -> Ordering {
        self.half().cmp(&o.half()).then_with(|| 0.cmp(&self.cross(o)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("segment {0} has zero length")]
    DegenerateSegment(usize),
    #[error("non-generic input: {0}")]
    NonGenericInput(String),
    #[error("coordinate out of range at vertex {0}")]
    CoordinateRange(usize),
    #[error("a closed polyline needs at least three vertices")]
    TooFewVertices,
}

/// Exact rational `num / den` with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: i128,
    pub den: i128,
}

impl Ratio {
    fn new(num: i128, den: i128) -> Ratio {
        if den < 0 {
            Ratio { num: -num, den: -den }
        } else {
            Ratio { num, den }
        }
    }

    fn strictly_inside_unit(self) -> bool {
        self.num > 0 && self.num < self.den
    }

    fn on_closed_unit(self) -> bool {
        self.num >= 0 && self.num <= self.den
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

/// Transverse double point between segments `a < b`, with positions along
/// each segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Crossing {
    pub a: usize,
    pub b: usize,
    pub ta: Ratio,
    pub tb: Ratio,
}

pub fn segment(vertices: &[Point], i: usize) -> (Point, Point) {
    (vertices[i], vertices[(i + 1) % vertices.len()])
}

pub fn direction(vertices: &[Point], i: usize) -> Vec2 {
    let (p, q) = segment(vertices, i);
    q - p
}

/// Checks vertex-level genericity: range, nonzero segments, no U-turns.
pub fn check_polyline(vertices: &[Point]) -> Result<(), GeometryError> {
    let n = vertices.len();
    if n < 3 {
        return Err(GeometryError::TooFewVertices);
    }
    for (i, v) in vertices.iter().enumerate() {
        if v.x.abs() > COORD_LIMIT || v.y.abs() > COORD_LIMIT {
            return Err(GeometryError::CoordinateRange(i));
        }
    }
    for i in 0..n {
        if direction(vertices, i).is_zero() {
            return Err(GeometryError::DegenerateSegment(i));
        }
    }
    for i in 0..n {
        let u = direction(vertices, (i + n - 1) % n);
        let w = direction(vertices, i);
        if u.cross(w) == 0 && u.dot(w) < 0 {
            return Err(GeometryError::NonGenericInput(format!("strand reverses at vertex {i}")));
        }
    }
    Ok(())
}

fn intersect(vertices: &[Point], a: usize, b: usize) -> Result<Option<Crossing>, GeometryError> {
    let n = vertices.len();
    let (p, _) = segment(vertices, a);
    let (r, _) = segment(vertices, b);
    let d1 = direction(vertices, a);
    let d2 = direction(vertices, b);
    let rp = r - p;
    let denom = d1.cross(d2);
    let adjacent_after = (a + 1) % n == b;
    let adjacent_before = (b + 1) % n == a;
    if denom == 0 {
        if rp.cross(d1) != 0 {
            return Ok(None);
        }
        // collinear: overlap beyond a shared vertex is degenerate
        let len = d1.dot(d1);
        let s0 = rp.dot(d1);
        let s1 = s0 + d2.dot(d1);
        let (lo, hi) = (s0.min(s1), s0.max(s1));
        if hi < 0 || lo > len {
            return Ok(None);
        }
        if (adjacent_after && lo == len) || (adjacent_before && hi == 0) {
            return Ok(None);
        }
        return Err(GeometryError::NonGenericInput(format!("segments {a} and {b} overlap")));
    }
    let ta = Ratio::new(rp.cross(d2), denom);
    let tb = Ratio::new(rp.cross(d1), denom);
    if !ta.on_closed_unit() || !tb.on_closed_unit() {
        return Ok(None);
    }
    if ta.strictly_inside_unit() && tb.strictly_inside_unit() {
        return Ok(Some(Crossing { a, b, ta, tb }));
    }
    let shared_vertex =
        (adjacent_after && ta.num == ta.den && tb.num == 0) || (adjacent_before && ta.num == 0 && tb.num == tb.den);
    if shared_vertex {
        return Ok(None);
    }
    Err(GeometryError::NonGenericInput(format!("segments {a} and {b} touch at a vertex")))
}

/// All double points of a closed polyline, sorted by `(a, b)`. Fails on
/// tangencies, vertex incidences, overlaps and triple points.
pub fn crossings(vertices: &[Point]) -> Result<Vec<Crossing>, GeometryError> {
    check_polyline(vertices)?;
    let n = vertices.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if let Some(c) = intersect(vertices, a, b)? {
                out.push(c);
            }
        }
    }
    // a triple point shows up as two crossings at one parameter of a segment
    let mut per_segment: Vec<Vec<Ratio>> = vec![Vec::new(); n];
    for c in &out {
        per_segment[c.a].push(c.ta);
        per_segment[c.b].push(c.tb);
    }
    for (s, ts) in per_segment.iter_mut().enumerate() {
        ts.sort();
        if ts.windows(2).any(|w| w[0] == w[1]) {
            return Err(GeometryError::NonGenericInput(format!("triple point on segment {s}")));
        }
    }
    Ok(out)
}

/// Whitney index of a closed polyline: signed count of tangent wraps past
/// the positive x direction.
pub fn turning_number(vertices: &[Point]) -> Result<i64, GeometryError> {
    check_polyline(vertices)?;
    let n = vertices.len();
    let mut r = 0i64;
    for i in 0..n {
        let u = direction(vertices, (i + n - 1) % n);
        let w = direction(vertices, i);
        let turn = u.cross(w);
        if turn > 0 && w.angle_cmp(u) == Ordering::Less {
            r += 1;
        } else if turn < 0 && w.angle_cmp(u) == Ordering::Greater {
            r -= 1;
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(i64, i64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    #[test]
    fn square_turning() {
        let sq = pts(&[(0, 0), (10, 0), (10, 10), (0, 10)]);
        assert_eq!(turning_number(&sq).unwrap(), 1);
        let mut rev = sq.clone();
        rev.reverse();
        assert_eq!(turning_number(&rev).unwrap(), -1);
        assert!(crossings(&sq).unwrap().is_empty());
    }

    #[test]
    fn figure_eight() {
        let f = pts(&[(0, 0), (10, 10), (10, 0), (0, 10)]);
        let c = crossings(&f).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(turning_number(&f).unwrap(), 0);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(crossings(&pts(&[(0, 0), (0, 0), (1, 1)])), Err(GeometryError::DegenerateSegment(0)));
        assert!(matches!(crossings(&pts(&[(0, 0), (10, 0), (5, 0), (5, 5)])), Err(GeometryError::NonGenericInput(_))));
        // a vertex lying on another segment
        assert!(matches!(
            crossings(&pts(&[(0, 0), (10, 0), (10, 10), (5, 0), (0, 10)])),
            Err(GeometryError::NonGenericInput(_))
        ));
        // three segments through one point
        let star = pts(&[(-10, 0), (10, 0), (10, 10), (-10, -10), (-10, 10), (10, -10)]);
        assert!(matches!(crossings(&star), Err(GeometryError::NonGenericInput(_))));
    }

    #[test]
    fn angle_order() {
        let e = Vec2 { x: 1, y: 0 };
        let n = Vec2 { x: 0, y: 1 };
        let w = Vec2 { x: -1, y: 0 };
        let s = Vec2 { x: 0, y: -1 };
        assert_eq!(e.angle_cmp(n), Ordering::Less);
        assert_eq!(n.angle_cmp(w), Ordering::Less);
        assert_eq!(w.angle_cmp(s), Ordering::Less);
        assert_eq!(s.angle_cmp(e), Ordering::Greater);
    }
}
