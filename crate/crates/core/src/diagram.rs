//! Legendrian Gauss diagrams and virtual strings.
//!
//! A diagram is a cyclic word of sites read counter-clockwise around the core
//! circle. Arc coorientations are not stored per arc: the diagram keeps the
//! label of the arc that starts at index 0 and every cusp flips it.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }

    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Pos => '+',
            Sign::Neg => '-',
        }
    }
}

/// Side of the travel direction the coorienting normal points to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Coorientation {
    L,
    R,
}

impl Coorientation {
    pub fn flip(self) -> Coorientation {
        match self {
            Coorientation::L => Coorientation::R,
            Coorientation::R => Coorientation::L,
        }
    }

    pub fn flipped_if(self, cond: bool) -> Coorientation {
        if cond {
            self.flip()
        } else {
            self
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Coorientation::L => 'L',
            Coorientation::R => 'R',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Site {
    Head(u32),
    Tail(u32),
    Cusp(Sign),
    Mark(u32),
}

impl Site {
    pub fn arrow(self) -> Option<u32> {
        match self {
            Site::Head(a) | Site::Tail(a) => Some(a),
            _ => None,
        }
    }

    pub fn is_head(self) -> bool {
        matches!(self, Site::Head(_))
    }

    pub fn is_cusp(self) -> bool {
        matches!(self, Site::Cusp(_))
    }

    pub fn cusp_sign(self) -> Option<Sign> {
        match self {
            Site::Cusp(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Head(a) => write!(f, "A{a}h"),
            Site::Tail(a) => write!(f, "A{a}t"),
            Site::Cusp(s) => write!(f, "C{}", s.symbol()),
            Site::Mark(m) => write!(f, "S{m}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("arrow {0} does not have exactly one head and one tail")]
    UnpairedArrow(u32),
    #[error("odd number of cusps")]
    OddCuspCount,
    #[error("singular mark {0} does not appear exactly twice")]
    BadMarkMultiplicity(u32),
    #[error("arrow or mark ids are not contiguous from 1")]
    NonContiguousIds,
    #[error("singular marks are not allowed here")]
    SingularNotAllowed,
    #[error("a virtual string may only contain arrow endpoints")]
    NotAString,
    #[error("gap {0} is out of range")]
    BadPosition(usize),
}

/// Oriented, cooriented front read off as a cyclic word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LegendrianGaussDiagram {
    pub sites: Vec<Site>,
    /// Label of the arc that starts at cyclic index 0.
    pub base: Coorientation,
}

/// Arrows on the core circle, nothing else.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FlatVirtualString {
    pub sites: Vec<Site>,
}

/// Rotation- and relabeling-invariant text key of a diagram.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalCode(pub String);

impl CanonicalCode {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn check_ids(counts: &BTreeMap<u32, (u32, u32)>, max_ok: bool) -> Result<(), DiagramError> {
    if !max_ok {
        return Err(DiagramError::NonContiguousIds);
    }
    for (expected, id) in (1u32..).zip(counts.keys()) {
        if *id != expected {
            return Err(DiagramError::NonContiguousIds);
        }
    }
    Ok(())
}

fn validate_sites(sites: &[Site]) -> Result<(), DiagramError> {
    let mut arrows: BTreeMap<u32, (u32, u32)> = BTreeMap::new();
    let mut marks: BTreeMap<u32, (u32, u32)> = BTreeMap::new();
    let mut cusps = 0usize;
    let mut zero_id = false;
    for site in sites {
        match *site {
            Site::Head(a) => {
                zero_id |= a == 0;
                arrows.entry(a).or_default().0 += 1;
            }
            Site::Tail(a) => {
                zero_id |= a == 0;
                arrows.entry(a).or_default().1 += 1;
            }
            Site::Cusp(_) => cusps += 1,
            Site::Mark(m) => {
                zero_id |= m == 0;
                marks.entry(m).or_default().0 += 1;
            }
        }
    }
    for (id, &(h, t)) in &arrows {
        if h != 1 || t != 1 {
            return Err(DiagramError::UnpairedArrow(*id));
        }
    }
    for (id, &(n, _)) in &marks {
        if n != 2 {
            return Err(DiagramError::BadMarkMultiplicity(*id));
        }
    }
    if cusps % 2 == 1 {
        return Err(DiagramError::OddCuspCount);
    }
    check_ids(&arrows, !zero_id)?;
    check_ids(&marks, !zero_id)?;
    Ok(())
}

impl LegendrianGaussDiagram {
    pub fn new(sites: Vec<Site>, base: Coorientation) -> Result<Self, DiagramError> {
        let d = LegendrianGaussDiagram { sites, base };
        d.validate()?;
        Ok(d)
    }

    /// The diagram with no sites: an embedded front without cusps.
    pub fn empty(base: Coorientation) -> Self {
        LegendrianGaussDiagram { sites: Vec::new(), base }
    }

    pub fn validate(&self) -> Result<(), DiagramError> {
        validate_sites(&self.sites)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn arrow_count(&self) -> usize {
        self.sites.iter().filter(|s| s.is_head()).count()
    }

    pub fn cusp_count(&self) -> usize {
        self.sites.iter().filter(|s| s.is_cusp()).count()
    }

    pub fn cusp_counts(&self) -> (usize, usize) {
        let pos = self.sites.iter().filter(|s| **s == Site::Cusp(Sign::Pos)).count();
        let neg = self.sites.iter().filter(|s| **s == Site::Cusp(Sign::Neg)).count();
        (pos, neg)
    }

    pub fn mark_count(&self) -> usize {
        self.sites.iter().filter(|s| matches!(s, Site::Mark(_))).count() / 2
    }

    pub fn is_singular(&self) -> bool {
        self.sites.iter().any(|s| matches!(s, Site::Mark(_)))
    }

    /// Number of gaps between sites. A word with no sites still has one arc.
    pub fn gap_count(&self) -> usize {
        self.sites.len().max(1)
    }

    /// Coorientation of the arc in front of site `position` (gap `position`).
    /// Positions are taken modulo the word length, so a full cycle returns
    /// the base label.
    pub fn arc_coorientation(&self, position: usize) -> Coorientation {
        let n = self.sites.len();
        let (cycles, rest) = position.checked_div(n).map_or((0, 0), |c| (c, position % n));
        let per_cycle = self.cusp_count();
        let flips = cycles * per_cycle + self.sites[..rest].iter().filter(|s| s.is_cusp()).count();
        self.base.flipped_if(flips % 2 == 1)
    }

    /// Labels of every gap 0..len in one pass.
    pub fn gap_labels(&self) -> Vec<Coorientation> {
        let mut out = Vec::with_capacity(self.sites.len() + 1);
        let mut cur = self.base;
        out.push(cur);
        for s in &self.sites {
            if s.is_cusp() {
                cur = cur.flip();
            }
            out.push(cur);
        }
        out
    }

    /// Cyclic rotation so that the site at `start` becomes index 0.
    pub fn rotated(&self, start: usize) -> LegendrianGaussDiagram {
        let n = self.sites.len();
        if n == 0 {
            return self.clone();
        }
        let start = start % n;
        let mut sites = Vec::with_capacity(n);
        sites.extend_from_slice(&self.sites[start..]);
        sites.extend_from_slice(&self.sites[..start]);
        LegendrianGaussDiagram { sites, base: self.arc_coorientation(start) }
    }

    /// Renumber arrows and marks by first occurrence.
    pub fn relabeled(&self) -> LegendrianGaussDiagram {
        LegendrianGaussDiagram { sites: relabel(&self.sites), base: self.base }
    }

    pub fn canonical_code(&self) -> Result<CanonicalCode, DiagramError> {
        self.validate()?;
        Ok(self.canonical_code_unchecked())
    }

    /// Canonical code of a diagram already known to be valid.
    pub fn canonical_code_unchecked(&self) -> CanonicalCode {
        CanonicalCode(render(&self.canonical_form_unchecked()))
    }

    /// The canonical rotation, relabeled by first occurrence.
    pub fn canonical_form(&self) -> Result<LegendrianGaussDiagram, DiagramError> {
        self.validate()?;
        Ok(self.canonical_form_unchecked())
    }

    pub fn canonical_form_unchecked(&self) -> LegendrianGaussDiagram {
        let n = self.sites.len();
        if n == 0 {
            return self.clone();
        }
        let labels = self.gap_labels();
        let mut best: Option<(Vec<u32>, Coorientation, usize)> = None;
        let mut key = Vec::with_capacity(n);
        for (start, &base) in labels.iter().enumerate().take(n) {
            rotation_key(&self.sites, start, &mut key);
            let better = match &best {
                None => true,
                Some((bk, bb, _)) => (key.as_slice(), base) < (bk.as_slice(), *bb),
            };
            if better {
                best = Some((key.clone(), base, start));
            }
        }
        let (_, _, start) = best.expect("non-empty word");
        self.rotated(start).relabeled()
    }

    pub fn underlying_string(&self) -> Result<FlatVirtualString, DiagramError> {
        self.validate()?;
        if self.is_singular() {
            return Err(DiagramError::SingularNotAllowed);
        }
        let sites = self.sites.iter().copied().filter(|s| s.arrow().is_some()).collect();
        Ok(FlatVirtualString { sites })
    }

    /// Index of the other endpoint of the arrow at `i`.
    pub fn partner(&self, i: usize) -> Option<usize> {
        let target = match self.sites[i] {
            Site::Head(a) => Site::Tail(a),
            Site::Tail(a) => Site::Head(a),
            Site::Mark(m) => {
                return self.sites.iter().enumerate().position(|(j, s)| j != i && *s == Site::Mark(m));
            }
            Site::Cusp(_) => return None,
        };
        self.sites.iter().position(|s| *s == target)
    }

    /// Partner index for every arrow endpoint, `usize::MAX` elsewhere.
    pub fn partner_table(&self) -> Vec<usize> {
        let mut head = BTreeMap::new();
        let mut tail = BTreeMap::new();
        for (i, s) in self.sites.iter().enumerate() {
            match s {
                Site::Head(a) => {
                    head.insert(*a, i);
                }
                Site::Tail(a) => {
                    tail.insert(*a, i);
                }
                _ => {}
            }
        }
        let mut out = vec![usize::MAX; self.sites.len()];
        for (a, &h) in &head {
            if let Some(&t) = tail.get(a) {
                out[h] = t;
                out[t] = h;
            }
        }
        out
    }

    pub fn next_arrow_id(&self) -> u32 {
        self.sites.iter().filter_map(|s| s.arrow()).max().unwrap_or(0) + 1
    }

    pub fn next_mark_id(&self) -> u32 {
        self.sites
            .iter()
            .filter_map(|s| match s {
                Site::Mark(m) => Some(*m),
                _ => None,
            })
            .max()
            .unwrap_or(0)
            + 1
    }
}

impl fmt::Display for LegendrianGaussDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

impl FlatVirtualString {
    pub fn new(sites: Vec<Site>) -> Result<Self, DiagramError> {
        let s = FlatVirtualString { sites };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), DiagramError> {
        if self.sites.iter().any(|s| s.arrow().is_none()) {
            return Err(DiagramError::NotAString);
        }
        validate_sites(&self.sites)
    }

    pub fn arrow_count(&self) -> usize {
        self.sites.len() / 2
    }

    /// The string viewed as a cusp-free diagram with base label `L`.
    pub fn as_diagram(&self) -> LegendrianGaussDiagram {
        LegendrianGaussDiagram { sites: self.sites.clone(), base: Coorientation::L }
    }

    pub fn canonical_code(&self) -> Result<CanonicalCode, DiagramError> {
        self.validate()?;
        Ok(self.as_diagram().canonical_code_unchecked())
    }
}

impl fmt::Display for FlatVirtualString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(&self.as_diagram()))
    }
}

/// Relabels arrows and marks in order of first appearance.
pub fn relabel(sites: &[Site]) -> Vec<Site> {
    let mut arrows: BTreeMap<u32, u32> = BTreeMap::new();
    let mut marks: BTreeMap<u32, u32> = BTreeMap::new();
    sites
        .iter()
        .map(|s| match *s {
            Site::Head(a) => {
                let n = arrows.len() as u32 + 1;
                Site::Head(*arrows.entry(a).or_insert(n))
            }
            Site::Tail(a) => {
                let n = arrows.len() as u32 + 1;
                Site::Tail(*arrows.entry(a).or_insert(n))
            }
            Site::Mark(m) => {
                let n = marks.len() as u32 + 1;
                Site::Mark(*marks.entry(m).or_insert(n))
            }
            c => c,
        })
        .collect()
}

// Numeric key of the word read from `start` with ids renumbered on the fly.
// Equal keys imply equal rendered text.
fn rotation_key(sites: &[Site], start: usize, key: &mut Vec<u32>) {
    key.clear();
    let n = sites.len();
    let mut arrow_ids: Vec<(u32, u32)> = Vec::new();
    let mut mark_ids: Vec<(u32, u32)> = Vec::new();
    fn lookup(table: &mut Vec<(u32, u32)>, id: u32) -> u32 {
        if let Some(&(_, v)) = table.iter().find(|(k, _)| *k == id) {
            v
        } else {
            let v = table.len() as u32 + 1;
            table.push((id, v));
            v
        }
    }
    for k in 0..n {
        let code = match sites[(start + k) % n] {
            Site::Cusp(Sign::Pos) => 0,
            Site::Cusp(Sign::Neg) => 1,
            Site::Head(a) => 4 * lookup(&mut arrow_ids, a),
            Site::Tail(a) => 4 * lookup(&mut arrow_ids, a) + 1,
            Site::Mark(m) => 4 * lookup(&mut mark_ids, m) + 2,
        };
        key.push(code);
    }
}

/// Text form `@L tok tok ...` of the word as stored (no canonicalization).
pub fn render(d: &LegendrianGaussDiagram) -> String {
    let mut out = String::with_capacity(2 + d.sites.len() * 4);
    out.push('@');
    out.push(d.base.symbol());
    for s in &d.sites {
        out.push(' ');
        out.push_str(&s.to_string());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use Coorientation::*;
    use Site::*;

    const CP: Site = Cusp(Sign::Pos);
    const CN: Site = Cusp(Sign::Neg);

    fn d(sites: Vec<Site>, base: Coorientation) -> LegendrianGaussDiagram {
        LegendrianGaussDiagram { sites, base }
    }

    #[test]
    fn validate_examples() {
        assert_eq!(d(vec![CP, CN], L).validate(), Ok(()));
        assert_eq!(d(vec![Tail(1), Head(1), CP], L).validate(), Err(DiagramError::OddCuspCount));
        assert_eq!(d(vec![Tail(1), Head(2)], R).validate(), Err(DiagramError::UnpairedArrow(1)));
        assert_eq!(d(vec![Tail(2), Head(2)], R).validate(), Err(DiagramError::NonContiguousIds));
        assert_eq!(d(vec![Mark(1)], R).validate(), Err(DiagramError::BadMarkMultiplicity(1)));
        assert_eq!(d(vec![Mark(1), Mark(1), CP, CP], R).validate(), Ok(()));
    }

    #[test]
    fn canonical_code_examples() {
        let a = d(vec![CP, CN], L).canonical_code().unwrap();
        let b = d(vec![CN, CP], R).canonical_code().unwrap();
        assert_eq!(a, b);
        let one = d(vec![Tail(1), Head(1)], L).canonical_code().unwrap();
        let seven = d(vec![Tail(7), Head(7)], L).canonical_code();
        // id 7 alone is non-contiguous, so compare through relabeling
        assert!(seven.is_err());
        assert_eq!(d(vec![Tail(7), Head(7)], L).relabeled().canonical_code().unwrap(), one);
        let x = d(vec![Tail(1), Tail(2), Head(1), Head(2)], L).canonical_code().unwrap();
        let y = d(vec![Tail(1), Tail(2), Head(2), Head(1)], L).canonical_code().unwrap();
        assert_ne!(x, y);
    }

    #[test]
    fn underlying_string_drops_cusps() {
        let s = d(vec![CP, Tail(1), CN, Head(1)], L).underlying_string().unwrap();
        assert_eq!(s.sites, vec![Tail(1), Head(1)]);
        assert!(d(vec![CP, CN], L).underlying_string().unwrap().sites.is_empty());
        assert_eq!(d(vec![Mark(1), Mark(1)], L).underlying_string(), Err(DiagramError::SingularNotAllowed));
    }

    #[test]
    fn arc_labels() {
        let x = d(vec![CP, CN], L);
        assert_eq!(x.arc_coorientation(0), L);
        assert_eq!(x.arc_coorientation(1), R);
        assert_eq!(x.arc_coorientation(2), L);
        assert_eq!(x.gap_labels(), vec![L, R, L]);
    }

    #[test]
    fn rotation_keeps_labels_consistent() {
        let x = d(vec![CP, Tail(1), CN, Head(1)], R);
        for k in 0..4 {
            let r = x.rotated(k);
            assert_eq!(r.base, x.arc_coorientation(k));
            assert_eq!(r.canonical_code().unwrap(), x.canonical_code().unwrap());
        }
    }
}
