//! Planar realizations of Gauss diagrams, Gauss-diagram extraction from
//! planar fronts, and disk-band surfaces.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{Coorientation, DiagramError, FlatVirtualString, LegendrianGaussDiagram, Sign, Site};
use crate::geometry::{self, Crossing, GeometryError, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossingTag {
    Real,
    Virtual,
}

/// Closed polyline front. Segment `i` runs from vertex `i` to vertex `i+1`.
/// Crossings are real unless their segment pair is listed in `virtual_pairs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanarFrontDiagram {
    pub vertices: Vec<Point>,
    pub cusps: Vec<(usize, Sign)>,
    pub virtual_pairs: BTreeSet<(usize, usize)>,
    /// Coorientation of segment 0.
    pub coorientation_seed: Coorientation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanarFlatDiagram {
    pub vertices: Vec<Point>,
    pub virtual_pairs: BTreeSet<(usize, usize)>,
}

impl PlanarFrontDiagram {
    pub fn flat(&self) -> PlanarFlatDiagram {
        PlanarFlatDiagram { vertices: self.vertices.clone(), virtual_pairs: self.virtual_pairs.clone() }
    }

    pub fn crossing_tags(&self) -> Result<BTreeMap<(usize, usize), CrossingTag>, GeometryError> {
        tags(&self.vertices, &self.virtual_pairs)
    }
}

impl PlanarFlatDiagram {
    pub fn crossing_tags(&self) -> Result<BTreeMap<(usize, usize), CrossingTag>, GeometryError> {
        tags(&self.vertices, &self.virtual_pairs)
    }

    pub fn virtual_count(&self) -> Result<usize, GeometryError> {
        Ok(self.crossing_tags()?.values().filter(|t| **t == CrossingTag::Virtual).count())
    }
}

fn tags(
    vertices: &[Point],
    virtual_pairs: &BTreeSet<(usize, usize)>,
) -> Result<BTreeMap<(usize, usize), CrossingTag>, GeometryError> {
    Ok(geometry::crossings(vertices)?
        .into_iter()
        .map(|c| {
            let tag = if virtual_pairs.contains(&(c.a, c.b)) { CrossingTag::Virtual } else { CrossingTag::Real };
            ((c.a, c.b), tag)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealizationError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("cusp tags do not close up: odd number of cusps")]
    OddCusps,
    #[error("cusp tag at vertex {0} has no turn")]
    StraightCusp(usize),
    #[error("virtual tag ({0}, {1}) names no crossing")]
    UnknownVirtualTag(usize, usize),
    #[error("no generic layout found")]
    LayoutFailed,
    #[error("ribbon surface is not orientable")]
    NonOrientableDetected,
}

/// Gadget placement choices. Any choice yields the same Gauss diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayoutOptions {
    pub seed: u64,
    /// Place gadgets around the circle in a seeded random order instead of
    /// word order.
    pub shuffle: bool,
}

impl Default for LayoutOptions {
    fn default() -> Self {
        LayoutOptions { seed: 0x5eed, shuffle: false }
    }
}

const RADIUS: f64 = 1_000_000.0;
const GADGET: f64 = 3_000.0;
const ATTEMPTS: u64 = 64;

pub fn realize_planar(d: &LegendrianGaussDiagram) -> Result<PlanarFrontDiagram, RealizationError> {
    realize_planar_with(d, LayoutOptions::default())
}

/// Draws every cusp and crossing as a local gadget on a large circle and
/// joins consecutive gadgets by straight arcs. Every crossing outside the
/// crossing gadgets is tagged virtual.
pub fn realize_planar_with(
    d: &LegendrianGaussDiagram,
    opts: LayoutOptions,
) -> Result<PlanarFrontDiagram, RealizationError> {
    d.validate()?;
    if d.is_singular() {
        return Err(DiagramError::SingularNotAllowed.into());
    }
    let d = d.relabeled();
    for attempt in 0..ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9)));
        let layout = build_layout(&d, opts.shuffle, &mut rng);
        let Ok(crossings) = geometry::crossings(&layout.vertices) else { continue };
        let mut virtual_pairs = BTreeSet::new();
        for c in &crossings {
            if !layout.real_pairs.contains(&(c.a, c.b)) {
                virtual_pairs.insert((c.a, c.b));
            }
        }
        if crossings.len() - virtual_pairs.len() != layout.real_pairs.len() {
            continue;
        }
        let front = PlanarFrontDiagram {
            vertices: layout.vertices,
            cusps: layout.cusps,
            virtual_pairs,
            coorientation_seed: d.base,
        };
        return Ok(front);
    }
    Err(RealizationError::LayoutFailed)
}

pub fn planar_flat_of_string(s: &FlatVirtualString) -> Result<PlanarFlatDiagram, RealizationError> {
    planar_flat_of_string_with(s, LayoutOptions::default())
}

pub fn planar_flat_of_string_with(
    s: &FlatVirtualString,
    opts: LayoutOptions,
) -> Result<PlanarFlatDiagram, RealizationError> {
    s.validate()?;
    Ok(realize_planar_with(&s.as_diagram(), opts)?.flat())
}

struct Layout {
    vertices: Vec<Point>,
    cusps: Vec<(usize, Sign)>,
    real_pairs: BTreeSet<(usize, usize)>,
}

/// Reduces an angle to `(-π, π]` and clamps it into `[lo, hi]`.
fn clamp_turn(angle: f64, lo: f64, hi: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut x = angle.rem_euclid(tau);
    if x > std::f64::consts::PI {
        x -= tau;
    }
    x.clamp(lo, hi)
}

fn to_point(x: f64, y: f64) -> Point {
    Point::new(x.round() as i64, y.round() as i64)
}

fn build_layout(d: &LegendrianGaussDiagram, shuffle: bool, rng: &mut ChaCha8Rng) -> Layout {
    // one gadget per arrow and per cusp site, in order of first appearance
    let mut gadget_of_site = Vec::with_capacity(d.sites.len());
    let mut arrow_gadget: BTreeMap<u32, usize> = BTreeMap::new();
    let mut count = 0usize;
    for s in &d.sites {
        let g = match s.arrow() {
            Some(a) => *arrow_gadget.entry(a).or_insert_with(|| {
                count += 1;
                count - 1
            }),
            None => {
                count += 1;
                count - 1
            }
        };
        gadget_of_site.push(g);
    }
    let slots = count.max(3);
    let mut order: Vec<usize> = (0..slots).collect();
    if shuffle {
        order.shuffle(rng);
    }
    let centers: Vec<(f64, f64)> = (0..slots)
        .map(|g| {
            let theta = std::f64::consts::TAU * (order[g] as f64 + rng.gen_range(0.2..0.8)) / slots as f64;
            let r = RADIUS * rng.gen_range(0.97..1.0);
            (r * theta.cos(), r * theta.sin())
        })
        .collect();

    let labels = d.gap_labels();
    let mut vertices = Vec::new();
    let mut cusps = Vec::new();
    // segment index of the gadget strand for each arrow visit
    let mut strand: BTreeMap<u32, Vec<(bool, usize)>> = BTreeMap::new();
    // strand directions per arrow gadget: head strand angle, tail strand angle
    let mut arrow_dirs: BTreeMap<u32, (f64, f64)> = BTreeMap::new();

    if d.sites.is_empty() {
        for (x, y) in centers.iter().take(3) {
            vertices.push(to_point(*x, *y));
        }
        return Layout { vertices, cusps, real_pairs: BTreeSet::new() };
    }

    let nsites = d.sites.len();
    let angle_to = |from: (f64, f64), to: (f64, f64)| (to.1 - from.1).atan2(to.0 - from.0);
    for (k, site) in d.sites.iter().enumerate() {
        let here = centers[gadget_of_site[k]];
        let prev = centers[gadget_of_site[(k + nsites - 1) % nsites]];
        let next = centers[gadget_of_site[(k + 1) % nsites]];
        let (cx, cy) = here;
        let size = GADGET * rng.gen_range(0.8..1.2);
        let jitter = rng.gen_range(-0.05..0.05);
        match *site {
            Site::Head(a) | Site::Tail(a) => {
                // strands point along the chord from the previous gadget to the next
                let along = if prev == next && prev == here {
                    rng.gen_range(0.0..std::f64::consts::TAU)
                } else {
                    angle_to(prev, next) + jitter
                };
                let (h, t) = match arrow_dirs.get(&a) {
                    Some(&pair) => pair,
                    None => {
                        let first_is_head = site.is_head();
                        let pair = if first_is_head { (along, f64::NAN) } else { (f64::NAN, along) };
                        arrow_dirs.insert(a, pair);
                        pair
                    }
                };
                let ang = match (site.is_head(), h.is_nan(), t.is_nan()) {
                    (true, true, _) => {
                        // head strand must sit clockwise of the tail strand
                        let h = t - clamp_turn(t - along, 0.4, std::f64::consts::PI - 0.4);
                        arrow_dirs.insert(a, (h, t));
                        h
                    }
                    (false, _, true) => {
                        let t = h + clamp_turn(along - h, 0.4, std::f64::consts::PI - 0.4);
                        arrow_dirs.insert(a, (h, t));
                        t
                    }
                    (true, _, _) => h,
                    (false, _, _) => t,
                };
                let (dx, dy) = (size * ang.cos(), size * ang.sin());
                let seg = vertices.len();
                vertices.push(to_point(cx - dx, cy - dy));
                vertices.push(to_point(cx + dx, cy + dy));
                strand.entry(a).or_default().push((site.is_head(), seg));
            }
            Site::Cusp(s) => {
                let turn_left = (s == Sign::Pos) == (labels[k] == Coorientation::L);
                let a = angle_to(here, prev) + jitter;
                let want = angle_to(here, next) - a;
                // incoming along -a, outgoing along b: left turn iff cross(a, b) < 0
                let b = if turn_left {
                    a - clamp_turn(-want, 0.4, std::f64::consts::PI - 0.4)
                } else {
                    a + clamp_turn(want, 0.4, std::f64::consts::PI - 0.4)
                };
                vertices.push(to_point(cx + size * a.cos(), cy + size * a.sin()));
                cusps.push((vertices.len(), s));
                vertices.push(to_point(cx, cy));
                vertices.push(to_point(cx + size * b.cos(), cy + size * b.sin()));
            }
            Site::Mark(_) => unreachable!("singular diagrams are rejected"),
        }
    }
    let real_pairs = strand
        .values()
        .map(|v| {
            let (a, b) = (v[0].1, v[1].1);
            (a.min(b), a.max(b))
        })
        .collect();
    Layout { vertices, cusps, real_pairs }
}

/// Reads the Gauss diagram of a planar front: arrows at real crossings,
/// heads on the branch whose velocity turns counterclockwise onto the other
/// branch, cusps with the tagged signs.
pub fn gauss_of_planar(p: &PlanarFrontDiagram) -> Result<LegendrianGaussDiagram, RealizationError> {
    let n = p.vertices.len();
    let crossings = geometry::crossings(&p.vertices)?;
    check_virtual_tags(&crossings, &p.virtual_pairs)?;
    if p.cusps.len() % 2 == 1 {
        return Err(RealizationError::OddCusps);
    }
    let mut cusp_at: BTreeMap<usize, Sign> = BTreeMap::new();
    for &(v, s) in &p.cusps {
        if v >= n {
            return Err(GeometryError::NonGenericInput(format!("cusp tag on missing vertex {v}")).into());
        }
        let u = geometry::direction(&p.vertices, (v + n - 1) % n);
        let w = geometry::direction(&p.vertices, v);
        if u.cross(w) == 0 {
            return Err(RealizationError::StraightCusp(v));
        }
        cusp_at.insert(v, s);
    }
    let events = traverse(&p.vertices, &crossings, &p.virtual_pairs, |v| cusp_at.get(&v).copied());
    let base = if cusp_at.contains_key(&0) { p.coorientation_seed.flip() } else { p.coorientation_seed };
    let d = LegendrianGaussDiagram { sites: events, base }.relabeled();
    d.validate()?;
    Ok(d)
}

/// Underlying string of a flat planar diagram.
pub fn gauss_of_planar_flat(p: &PlanarFlatDiagram) -> Result<FlatVirtualString, RealizationError> {
    let crossings = geometry::crossings(&p.vertices)?;
    check_virtual_tags(&crossings, &p.virtual_pairs)?;
    let sites = traverse(&p.vertices, &crossings, &p.virtual_pairs, |_| None);
    Ok(FlatVirtualString::new(crate::diagram::relabel(&sites))?)
}

fn check_virtual_tags(
    crossings: &[Crossing],
    virtual_pairs: &BTreeSet<(usize, usize)>,
) -> Result<(), RealizationError> {
    let present: BTreeSet<(usize, usize)> = crossings.iter().map(|c| (c.a, c.b)).collect();
    for &(a, b) in virtual_pairs {
        if !present.contains(&(a, b)) {
            return Err(RealizationError::UnknownVirtualTag(a, b));
        }
    }
    Ok(())
}

fn traverse(
    vertices: &[Point],
    crossings: &[Crossing],
    virtual_pairs: &BTreeSet<(usize, usize)>,
    cusp: impl Fn(usize) -> Option<Sign>,
) -> Vec<Site> {
    let n = vertices.len();
    let mut on_segment: Vec<Vec<(geometry::Ratio, Site)>> = vec![Vec::new(); n];
    let mut id = 1u32;
    for c in crossings {
        if virtual_pairs.contains(&(c.a, c.b)) {
            continue;
        }
        let va = geometry::direction(vertices, c.a);
        let vb = geometry::direction(vertices, c.b);
        let head_on_a = va.cross(vb) > 0;
        let (sa, sb) = if head_on_a { (Site::Head(id), Site::Tail(id)) } else { (Site::Tail(id), Site::Head(id)) };
        on_segment[c.a].push((c.ta, sa));
        on_segment[c.b].push((c.tb, sb));
        id += 1;
    }
    let mut out = Vec::new();
    for (i, list) in on_segment.iter_mut().enumerate() {
        if let Some(s) = cusp(i) {
            out.push(Site::Cusp(s));
        }
        list.sort_by_key(|x| x.0);
        out.extend(list.iter().map(|e| e.1));
    }
    out
}

/// Geometric cusp sign for a cusp vertex given the coorientation of the
/// arc arriving at it.
pub fn cusp_sign_from_turn(turn_left: bool, incoming: Coorientation) -> Sign {
    if turn_left == (incoming == Coorientation::L) {
        Sign::Pos
    } else {
        Sign::Neg
    }
}

/// One disk with a band per arrow. Band ends sit around the disk boundary in
/// word order; all bands are attached untwisted, which keeps the surface
/// orientable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RibbonSurface {
    pub band_end_order: Vec<u32>,
    /// `(tail end, head end)` positions per band.
    pub band_pairing: Vec<(usize, usize)>,
}

pub fn realize_surface(s: &FlatVirtualString) -> Result<RibbonSurface, RealizationError> {
    s.validate()?;
    let s = crate::diagram::relabel(&s.sites);
    let mut ends: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
    let mut order = Vec::with_capacity(s.len());
    for (i, site) in s.iter().enumerate() {
        let a = site.arrow().expect("strings carry arrows only");
        order.push(a);
        let e = ends.entry(a).or_insert((usize::MAX, usize::MAX));
        if site.is_head() {
            e.1 = i;
        } else {
            e.0 = i;
        }
    }
    Ok(RibbonSurface { band_end_order: order, band_pairing: ends.into_values().collect() })
}

/// Genus of the closed surface obtained by capping the boundary circles.
pub fn surface_genus(r: &RibbonSurface) -> Result<usize, RealizationError> {
    let m = r.band_end_order.len();
    let bands = r.band_pairing.len();
    if m != 2 * bands {
        return Err(RealizationError::NonOrientableDetected);
    }
    let mut other = vec![usize::MAX; m];
    for &(t, h) in &r.band_pairing {
        if t >= m || h >= m || t == h || other[t] != usize::MAX || other[h] != usize::MAX {
            return Err(RealizationError::NonOrientableDetected);
        }
        other[t] = h;
        other[h] = t;
    }
    if m == 0 {
        return Ok(0);
    }
    // boundary: leave the disk at an end, cross the band, continue along the disk
    let mut seen = vec![false; m];
    let mut boundary = 0usize;
    for start in 0..m {
        if seen[start] {
            continue;
        }
        boundary += 1;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = (other[i] + 1) % m;
        }
    }
    let twice = 1 + bands as i64 - boundary as i64;
    if twice < 0 || twice % 2 != 0 {
        return Err(RealizationError::NonOrientableDetected);
    }
    Ok((twice / 2) as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::Site::*;

    const CP: Site = Cusp(Sign::Pos);
    const CN: Site = Cusp(Sign::Neg);

    fn d(sites: Vec<Site>, base: Coorientation) -> LegendrianGaussDiagram {
        LegendrianGaussDiagram::new(sites, base).unwrap()
    }

    fn round_trip(x: &LegendrianGaussDiagram) {
        for seed in 0..3 {
            for shuffle in [false, true] {
                let p = realize_planar_with(x, LayoutOptions { seed, shuffle }).unwrap();
                let back = gauss_of_planar(&p).unwrap();
                assert_eq!(back.canonical_code().unwrap(), x.canonical_code().unwrap(), "{x}");
                let tags = p.crossing_tags().unwrap();
                let real = tags.values().filter(|t| **t == CrossingTag::Real).count();
                assert_eq!(real, x.arrow_count());
            }
        }
    }

    #[test]
    fn small_round_trips() {
        round_trip(&d(vec![], Coorientation::L));
        round_trip(&d(vec![CP, CN], Coorientation::L));
        round_trip(&d(vec![CP, CN], Coorientation::R));
        round_trip(&d(vec![Tail(1), Head(1)], Coorientation::L));
        round_trip(&d(vec![Tail(1), Tail(2), Head(1), Head(2)], Coorientation::L));
        round_trip(&d(vec![CP, Tail(1), CP, Head(1), CN, CN], Coorientation::R));
    }

    #[test]
    fn unknot_front_has_no_crossings() {
        let p = realize_planar(&d(vec![CP, CN], Coorientation::L)).unwrap();
        assert_eq!(p.cusps.len(), 2);
        assert!(p.crossing_tags().unwrap().is_empty());
    }

    #[test]
    fn all_virtual_curve_has_no_arrows() {
        let p = realize_planar(&d(vec![Tail(1), Tail(2), Head(1), Head(2)], Coorientation::L)).unwrap();
        let mut flat = p.flat();
        for (a, b) in flat.crossing_tags().unwrap().into_keys() {
            flat.virtual_pairs.insert((a, b));
        }
        assert!(gauss_of_planar_flat(&flat).unwrap().sites.is_empty());
    }

    #[test]
    fn figure_eight_orientation() {
        // segments 0: (0,0)->(10,10) and 2: (10,0)->(0,10) cross
        let f = PlanarFlatDiagram {
            vertices: vec![Point::new(0, 0), Point::new(10, 10), Point::new(10, 0), Point::new(0, 10)],
            virtual_pairs: BTreeSet::new(),
        };
        let s = gauss_of_planar_flat(&f).unwrap();
        // v0 = (10,10), v2 = (-10,10): cross = 200 > 0, so the head is met first
        assert_eq!(s.sites, vec![Head(1), Tail(1)]);
    }

    #[test]
    fn genus_examples() {
        let g = |sites: Vec<Site>| {
            surface_genus(&realize_surface(&FlatVirtualString::new(sites).unwrap()).unwrap()).unwrap()
        };
        assert_eq!(g(vec![]), 0);
        assert_eq!(g(vec![Tail(1), Head(1)]), 0);
        assert_eq!(g(vec![Tail(1), Tail(2), Head(1), Head(2)]), 1);
        assert_eq!(g(vec![Tail(1), Head(1), Tail(2), Head(2)]), 0);
    }
}
