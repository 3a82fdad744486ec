//! Maslov number, rotation number, the ρ parity and kinks.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{CanonicalCode, DiagramError, LegendrianGaussDiagram, Site};
use crate::geometry::{self, GeometryError, Point};
use crate::realization::{self, PlanarFlatDiagram, RealizationError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvariantError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Realization(#[from] RealizationError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("no straight stretch has room for a kink")]
    NoRoomForKink,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InvariantVector {
    pub maslov: i64,
    pub positive_cusps: usize,
    pub negative_cusps: usize,
    pub arrow_count: usize,
    pub string_code: CanonicalCode,
    pub rho: u8,
    pub genus: usize,
}

/// Positive cusps minus negative cusps.
pub fn maslov(d: &LegendrianGaussDiagram) -> i64 {
    d.sites.iter().filter_map(|s| s.cusp_sign()).map(|s| s.as_i64()).sum()
}

pub fn rotation_number(p: &PlanarFlatDiagram) -> Result<i64, InvariantError> {
    Ok(geometry::turning_number(&p.vertices)?)
}

/// `(rotation number + virtual crossings) mod 2`.
pub fn rho(p: &PlanarFlatDiagram) -> Result<u8, InvariantError> {
    let r = rotation_number(p)?;
    let v = p.virtual_count()? as i64;
    Ok((r + v).rem_euclid(2) as u8)
}

/// ρ of the planar realization of the underlying string.
pub fn rho_of_diagram(d: &LegendrianGaussDiagram) -> Result<u8, InvariantError> {
    let s = d.underlying_string()?;
    rho(&realization::planar_flat_of_string(&s)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KinkSide {
    Left,
    Right,
}

// loop drawn in local frame (along, normal); it crosses itself once
const KINK: [(i128, i128); 5] = [(-2, 0), (1, 2), (0, 3), (-1, 2), (2, 0)];

/// Inserts a small curl on the longest segment with room for it. A left
/// curl turns counterclockwise and raises the rotation number by one.
pub fn add_kink(p: &PlanarFlatDiagram, side: KinkSide) -> Result<PlanarFlatDiagram, InvariantError> {
    let before = geometry::crossings(&p.vertices)?;
    let n = p.vertices.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| {
        std::cmp::Reverse(geometry::direction(&p.vertices, i).dot(geometry::direction(&p.vertices, i)))
    });
    for seg in order {
        if let Some(out) = try_kink(p, &before, seg, side) {
            return Ok(out);
        }
    }
    Err(InvariantError::NoRoomForKink)
}

fn try_kink(
    p: &PlanarFlatDiagram,
    before: &[geometry::Crossing],
    seg: usize,
    side: KinkSide,
) -> Option<PlanarFlatDiagram> {
    let n = p.vertices.len();
    let (a, b) = geometry::segment(&p.vertices, seg);
    let d = b - a;
    // free parameter interval on the segment, as f64 for placement only
    let mut ts: Vec<f64> = vec![0.0, 1.0];
    for c in before {
        if c.a == seg {
            ts.push(c.ta.num as f64 / c.ta.den as f64);
        }
        if c.b == seg {
            ts.push(c.tb.num as f64 / c.tb.den as f64);
        }
    }
    ts.sort_by(|x, y| x.total_cmp(y));
    let (lo, hi) = ts.windows(2).map(|w| (w[0], w[1])).max_by(|x, y| (x.1 - x.0).total_cmp(&(y.1 - y.0)))?;
    let mid = (lo + hi) / 2.0;
    let len = ((d.x * d.x + d.y * d.y) as f64).sqrt();
    // unit of the local frame, at most a tenth of the free stretch
    let unit = ((hi - lo) * len / 10.0).min(200.0);
    if unit < 4.0 {
        return None;
    }
    let (ex, ey) = (d.x as f64 / len, d.y as f64 / len);
    let sgn = match side {
        KinkSide::Left => 1.0,
        KinkSide::Right => -1.0,
    };
    let (nx, ny) = (-ey * sgn, ex * sgn);
    let (mx, my) = (a.x as f64 + d.x as f64 * mid, a.y as f64 + d.y as f64 * mid);
    let new_pts: Vec<Point> = KINK
        .iter()
        .map(|&(u, v)| {
            let (u, v) = (u as f64 * unit, v as f64 * unit);
            Point::new((mx + u * ex + v * nx).round() as i64, (my + u * ey + v * ny).round() as i64)
        })
        .collect();
    let mut vertices = Vec::with_capacity(n + 5);
    vertices.extend_from_slice(&p.vertices[..=seg]);
    vertices.extend_from_slice(&new_pts);
    vertices.extend_from_slice(&p.vertices[seg + 1..]);
    // segment `seg` splits into seg..=seg+5; the old crossings stay on the
    // outer pieces because the kink sits in a crossing-free stretch
    let shift = |s: usize, t: f64| -> usize {
        if s < seg {
            s
        } else if s == seg {
            if t < mid {
                seg
            } else {
                seg + 5
            }
        } else {
            s + 5
        }
    };
    let mut virtual_pairs = BTreeSet::new();
    for c in before {
        if !p.virtual_pairs.contains(&(c.a, c.b)) {
            continue;
        }
        let x = shift(c.a, c.ta.num as f64 / c.ta.den as f64);
        let y = shift(c.b, c.tb.num as f64 / c.tb.den as f64);
        virtual_pairs.insert((x.min(y), x.max(y)));
    }
    let after = geometry::crossings(&vertices).ok()?;
    if after.len() != before.len() + 1 {
        return None;
    }
    let present: BTreeSet<(usize, usize)> = after.iter().map(|c| (c.a, c.b)).collect();
    if !present.contains(&(seg + 1, seg + 4)) || !virtual_pairs.is_subset(&present) {
        return None;
    }
    Some(PlanarFlatDiagram { vertices, virtual_pairs })
}

pub fn invariant_vector(d: &LegendrianGaussDiagram) -> Result<InvariantVector, InvariantError> {
    d.validate()?;
    if d.is_singular() {
        return Err(DiagramError::SingularNotAllowed.into());
    }
    let (pos, neg) = d.cusp_counts();
    let s = d.underlying_string()?;
    let genus = realization::surface_genus(&realization::realize_surface(&s)?)?;
    Ok(InvariantVector {
        maslov: pos as i64 - neg as i64,
        positive_cusps: pos,
        negative_cusps: neg,
        arrow_count: d.arrow_count(),
        string_code: s.canonical_code()?,
        rho: rho_of_diagram(d)?,
        genus,
    })
}

/// Cheap invariants that need no geometry: `(maslov, cusps+, cusps-, arrows)`.
pub fn combinatorial_key(d: &LegendrianGaussDiagram) -> (i64, usize, usize, usize) {
    let mut pos = 0;
    let mut neg = 0;
    let mut arrows = 0;
    for s in &d.sites {
        match s {
            Site::Cusp(crate::diagram::Sign::Pos) => pos += 1,
            Site::Cusp(crate::diagram::Sign::Neg) => neg += 1,
            Site::Head(_) => arrows += 1,
            _ => {}
        }
    }
    (pos as i64 - neg as i64, pos, neg, arrows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{Coorientation, FlatVirtualString, Sign};
    use crate::moves::stabilize;
    use crate::realization::{gauss_of_planar_flat, planar_flat_of_string_with, LayoutOptions};

    const CP: Site = Site::Cusp(Sign::Pos);
    const CN: Site = Site::Cusp(Sign::Neg);

    fn d(sites: Vec<Site>) -> LegendrianGaussDiagram {
        LegendrianGaussDiagram::new(sites, Coorientation::L).unwrap()
    }

    #[test]
    fn maslov_examples() {
        assert_eq!(maslov(&d(vec![CP, CN])), 0);
        assert_eq!(maslov(&d(vec![CP, CP])), 2);
        let k = d(vec![CP, Site::Tail(1), CN, Site::Head(1)]);
        assert_eq!(maslov(&stabilize(&k, 2, 2, 1).unwrap()), 0);
        assert_eq!(maslov(&stabilize(&k, 3, 1, 0).unwrap()), 4);
    }

    #[test]
    fn embedded_circle_rho_is_one() {
        let p = realization::planar_flat_of_string(&FlatVirtualString::new(vec![]).unwrap()).unwrap();
        assert_eq!(rotation_number(&p).unwrap().abs(), 1);
        assert_eq!(rho(&p).unwrap(), 1);
    }

    #[test]
    fn kinks_shift_rotation() {
        let s = FlatVirtualString::new(vec![Site::Tail(1), Site::Tail(2), Site::Head(1), Site::Head(2)]).unwrap();
        let p = realization::planar_flat_of_string(&s).unwrap();
        let r = rotation_number(&p).unwrap();
        let rh = rho(&p).unwrap();
        let left = add_kink(&p, KinkSide::Left).unwrap();
        assert_eq!(rotation_number(&left).unwrap(), r + 1);
        assert_eq!(rho(&left).unwrap(), 1 - rh);
        let right = add_kink(&p, KinkSide::Right).unwrap();
        assert_eq!(rotation_number(&right).unwrap(), r - 1);
        let two = add_kink(&left, KinkSide::Left).unwrap();
        assert_eq!(rho(&two).unwrap(), rh);
        assert_eq!(gauss_of_planar_flat(&left).unwrap().arrow_count(), 3);
    }

    #[test]
    fn rho_is_layout_independent() {
        let s = FlatVirtualString::new(vec![Site::Tail(1), Site::Head(2), Site::Head(1), Site::Tail(2)]).unwrap();
        let mut seen = BTreeSet::new();
        for seed in 0..6 {
            let p = planar_flat_of_string_with(&s, LayoutOptions { seed, shuffle: seed % 2 == 1 }).unwrap();
            seen.insert(rho(&p).unwrap());
        }
        assert_eq!(seen.len(), 1);
    }

    #[test]
    fn vector_examples() {
        let v = invariant_vector(&d(vec![CP, CN])).unwrap();
        assert_eq!((v.maslov, v.arrow_count, v.genus), (0, 0, 0));
        let w = invariant_vector(&d(vec![Site::Tail(1), Site::Tail(2), Site::Head(1), Site::Head(2)])).unwrap();
        assert_eq!(w.genus, 1);
    }
}
