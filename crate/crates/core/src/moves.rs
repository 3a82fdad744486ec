//! Gauss-diagram moves induced by the generic front bifurcations, plus
//! stabilization and singular-mark insertion.
//!
//! Families:
//!
//! * `Swallowtail` (MV1): birth/death of a loop carrying two opposite cusps
//!   and one crossing, pattern `[X C± C∓ X']`.
//! * `Tangency` (MV2): self-tangency, two arrows whose endpoints form two
//!   adjacent pairs.
//! * `Triple` (MV3): triple point, three pairwise-linked adjacent pairs whose
//!   order is reversed.
//! * `CuspPass` (MV4): a branch passing through a cusp, pattern
//!   `[X C Y] ... [X' Y']`.
//! * `KinkPair`: two same-handed kinks, flat framed mode only.
//!
//! Variants are small integers whose bits are documented on [`MoveKind`].

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{Coorientation, DiagramError, LegendrianGaussDiagram, Sign, Site};

pub mod selftest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MoveFamily {
    Swallowtail,
    Tangency,
    Triple,
    CuspPass,
    KinkPair,
}

impl MoveFamily {
    pub fn label(self) -> &'static str {
        match self {
            MoveFamily::Swallowtail => "MV1",
            MoveFamily::Tangency => "MV2",
            MoveFamily::Triple => "MV3",
            MoveFamily::CuspPass => "MV4",
            MoveFamily::KinkPair => "KINK_PAIR",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sense {
    Create,
    Delete,
    Slide,
}

/// One row of the move table.
///
/// Variant bits:
/// * Swallowtail: bit0 first cusp negative, bit1 arc label `R`.
/// * Tangency: bit0 antiparallel strands, bit1 first site of the first run is
///   a head, bit2 first run on an `R` arc, bit3 second run on an `R` arc.
/// * Triple: index into [`triangle_configs`].
/// * CuspPass: bit0 cusp negative, bit1 arc before the cusp labeled `R`,
///   bit2 the endpoint before the cusp is a tail.
/// * KinkPair: bit0 clockwise kinks (head endpoint first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MoveKind {
    pub family: MoveFamily,
    pub variant: u8,
    pub sense: Sense,
}

impl MoveKind {
    /// Only tangencies can be dangerous: the two coorienting normals agree
    /// at the moment of tangency.
    pub fn dangerous(&self) -> bool {
        if self.family != MoveFamily::Tangency {
            return false;
        }
        let anti = self.variant & 1 != 0;
        let l1 = self.variant & 4 != 0;
        let l2 = self.variant & 8 != 0;
        if anti {
            l1 != l2
        } else {
            l1 == l2
        }
    }

    /// Change in word length when applied.
    pub fn growth(&self) -> isize {
        let size = match self.family {
            MoveFamily::Triple => 0,
            _ => 4,
        };
        match self.sense {
            Sense::Create => size,
            Sense::Delete => -size,
            Sense::Slide => 0,
        }
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sense = match self.sense {
            Sense::Create => "create",
            Sense::Delete => "delete",
            Sense::Slide => "slide",
        };
        write!(f, "{}.{}.{}", self.family.label(), self.variant, sense)?;
        if self.dangerous() {
            f.write_str("!")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MoveMode {
    LegendrianIsotopy,
    LegendrianHomotopy,
    FlatFramedHomotopy,
}

impl MoveMode {
    pub fn name(self) -> &'static str {
        match self {
            MoveMode::LegendrianIsotopy => "isotopy",
            MoveMode::LegendrianHomotopy => "homotopy",
            MoveMode::FlatFramedHomotopy => "flat",
        }
    }

    pub fn parse(s: &str) -> Option<MoveMode> {
        match s {
            "isotopy" | "legendrian_isotopy" => Some(MoveMode::LegendrianIsotopy),
            "homotopy" | "legendrian_homotopy" => Some(MoveMode::LegendrianHomotopy),
            "flat" | "flat_framed_homotopy" => Some(MoveMode::FlatFramedHomotopy),
            _ => None,
        }
    }

    pub fn is_flat(self) -> bool {
        self == MoveMode::FlatFramedHomotopy
    }
}

/// A move located in a specific word.
///
/// Anchors are gaps for `Create` (gap `g` sits in front of site `g`) and
/// site indices in run order for `Delete`/`Slide`. `CuspPass` creation
/// anchors are `[cusp site, gap]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MoveInstance {
    pub kind: MoveKind,
    pub anchors: Vec<usize>,
}

impl fmt::Display for MoveInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@", self.kind)?;
        for (i, a) in self.anchors.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for MoveInstance {
    type Err = MoveError;

    /// Reads the display form, e.g. `MV2.5.create@0,3`; a trailing `!` on
    /// the kind is optional.
    fn from_str(s: &str) -> Result<Self, MoveError> {
        let bad = || MoveError::IllegalMove(format!("cannot read move {s:?}"));
        let (kind, anchors) = s.trim().split_once('@').ok_or_else(bad)?;
        let mut parts = kind.trim_end_matches('!').split('.');
        let family = match parts.next() {
            Some("MV1") => MoveFamily::Swallowtail,
            Some("MV2") => MoveFamily::Tangency,
            Some("MV3") => MoveFamily::Triple,
            Some("MV4") => MoveFamily::CuspPass,
            Some("KINK_PAIR") => MoveFamily::KinkPair,
            _ => return Err(bad()),
        };
        let variant: u8 = parts.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        let sense = match parts.next() {
            Some("create") => Sense::Create,
            Some("delete") => Sense::Delete,
            Some("slide") => Sense::Slide,
            _ => return Err(bad()),
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        let anchors = if anchors.is_empty() {
            Vec::new()
        } else {
            anchors.split(',').map(|a| a.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
        };
        Ok(MoveInstance { kind: MoveKind { family, variant, sense }, anchors })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("illegal move {0}")]
    IllegalMove(String),
    #[error("flat framed mode needs a cusp-free diagram")]
    NotFlat,
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

fn label_bit(l: Coorientation) -> u8 {
    match l {
        Coorientation::L => 0,
        Coorientation::R => 1,
    }
}

fn label_of_bit(b: bool) -> Coorientation {
    if b {
        Coorientation::R
    } else {
        Coorientation::L
    }
}

/// Valid triangle configurations `(σ1, σ2, σ3, ε12, ε13, ε23)`.
///
/// `σ1` is `+` when, on the first run, the endpoint of the arrow to run 2
/// comes first; `σ2` compares arrows to runs 1 and 3 on run 2; `σ3` compares
/// arrows to runs 1 and 2 on run 3. `εij` is `+` when the arrow between runs
/// `i < j` has its head on run `i`. Three straight strands bound a triangle
/// exactly when `σ1σ2ε12 = σ1σ3ε13 = σ2σ3ε23`.
pub fn triangle_configs() -> &'static [[i8; 6]] {
    static TABLE: std::sync::OnceLock<Vec<[i8; 6]>> = std::sync::OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = Vec::new();
        for bits in 0u8..64 {
            let v: [i8; 6] = std::array::from_fn(|k| if bits >> k & 1 == 0 { 1 } else { -1 });
            let [s1, s2, s3, e12, e13, e23] = v;
            let a = s1 * s2 * e12;
            if a == s1 * s3 * e13 && a == s2 * s3 * e23 {
                out.push(v);
            }
        }
        out
    })
}

fn triangle_index(cfg: [i8; 6]) -> Option<u8> {
    triangle_configs().iter().position(|c| *c == cfg).map(|i| i as u8)
}

/// The complete table of move kinds legal in `mode`.
pub fn move_schemas(mode: MoveMode) -> Vec<MoveKind> {
    let mut out = Vec::new();
    let both = [Sense::Create, Sense::Delete];
    let tri = triangle_configs().len() as u8;
    match mode {
        MoveMode::LegendrianIsotopy | MoveMode::LegendrianHomotopy => {
            for sense in both {
                for v in 0..4 {
                    out.push(MoveKind { family: MoveFamily::Swallowtail, variant: v, sense });
                }
                for v in 0..16 {
                    let k = MoveKind { family: MoveFamily::Tangency, variant: v, sense };
                    if mode == MoveMode::LegendrianHomotopy || !k.dangerous() {
                        out.push(k);
                    }
                }
                for v in 0..8 {
                    out.push(MoveKind { family: MoveFamily::CuspPass, variant: v, sense });
                }
            }
        }
        MoveMode::FlatFramedHomotopy => {
            for sense in both {
                for v in 0..4 {
                    out.push(MoveKind { family: MoveFamily::Tangency, variant: v, sense });
                }
                for v in 0..2 {
                    out.push(MoveKind { family: MoveFamily::KinkPair, variant: v, sense });
                }
            }
        }
    }
    for v in 0..tri {
        out.push(MoveKind { family: MoveFamily::Triple, variant: v, sense: Sense::Slide });
    }
    out.sort();
    out
}

fn mode_allows(mode: MoveMode, kind: &MoveKind) -> bool {
    match mode {
        MoveMode::LegendrianIsotopy => kind.family != MoveFamily::KinkPair && !kind.dangerous(),
        MoveMode::LegendrianHomotopy => kind.family != MoveFamily::KinkPair,
        MoveMode::FlatFramedHomotopy => {
            matches!(kind.family, MoveFamily::Tangency | MoveFamily::Triple | MoveFamily::KinkPair)
        }
    }
}

fn check_mode(d: &LegendrianGaussDiagram, mode: MoveMode) -> Result<(), MoveError> {
    if mode.is_flat() && (d.cusp_count() > 0 || d.base != Coorientation::L) {
        return Err(MoveError::NotFlat);
    }
    Ok(())
}

/// Every instance applicable to `d` in `mode`, sorted by kind then anchors.
pub fn enumerate_moves(d: &LegendrianGaussDiagram, mode: MoveMode) -> Result<Vec<MoveInstance>, MoveError> {
    d.validate()?;
    check_mode(d, mode)?;
    Ok(enumerate_unchecked(d, mode))
}

/// Enumeration without validation; `d` must be valid.
pub fn enumerate_unchecked(d: &LegendrianGaussDiagram, mode: MoveMode) -> Vec<MoveInstance> {
    enumerate_senses(d, mode, true)
}

/// Enumeration that can skip creations, which dominate the count.
pub fn enumerate_senses(d: &LegendrianGaussDiagram, mode: MoveMode, creations: bool) -> Vec<MoveInstance> {
    let ctx = Ctx::new(d);
    let mut out = Vec::new();
    let legendrian = !mode.is_flat();
    if legendrian {
        if creations {
            ctx.swallowtail_create(&mut out);
            ctx.cusp_pass_create(&mut out);
        }
        ctx.swallowtail_delete(&mut out);
        ctx.cusp_pass_delete(&mut out);
    } else {
        if creations {
            ctx.kink_pair_create(&mut out);
        }
        ctx.kink_pair_delete(&mut out);
    }
    if creations {
        ctx.tangency_create(&mut out);
    }
    ctx.tangency_delete(&mut out);
    ctx.triple_slides(&mut out);
    out.retain(|m| mode_allows(mode, &m.kind));
    out.sort();
    out
}

/// Instances of one family only (both senses), unsorted mode filtering.
pub fn enumerate_family(d: &LegendrianGaussDiagram, family: MoveFamily, mode: MoveMode) -> Vec<MoveInstance> {
    enumerate_unchecked(d, mode).into_iter().filter(|m| m.kind.family == family).collect()
}

/// Applies `m` after checking that it is one of `enumerate_moves(d, mode)`.
pub fn apply_move(
    d: &LegendrianGaussDiagram,
    m: &MoveInstance,
    mode: MoveMode,
) -> Result<LegendrianGaussDiagram, MoveError> {
    d.validate()?;
    check_mode(d, mode)?;
    if !mode_allows(mode, &m.kind) {
        return Err(MoveError::IllegalMove(format!("{m} is not allowed in {} mode", mode.name())));
    }
    let legal = enumerate_family(d, m.kind.family, mode);
    if !legal.contains(m) {
        return Err(MoveError::IllegalMove(format!("{m} does not match {d}")));
    }
    Ok(apply_unchecked(d, m))
}

/// Instance on `apply_move(d, m)` that undoes `m` (up to canonical code).
pub fn inverse(d: &LegendrianGaussDiagram, m: &MoveInstance, mode: MoveMode) -> Result<MoveInstance, MoveError> {
    let e = apply_move(d, m, mode)?;
    let target = d.canonical_code_unchecked();
    enumerate_family(&e, m.kind.family, mode)
        .into_iter()
        .find(|inv| apply_unchecked(&e, inv).canonical_code_unchecked() == target)
        .ok_or_else(|| MoveError::IllegalMove(format!("no inverse for {m}")))
}

/// Replays a path in which each instance is located on the canonical form
/// of the previous diagram. Returns the final canonical form.
pub fn replay_path(
    start: &LegendrianGaussDiagram,
    path: &[MoveInstance],
    mode: MoveMode,
) -> Result<LegendrianGaussDiagram, MoveError> {
    let mut cur = start.canonical_form()?;
    for m in path {
        cur = apply_move(&cur, m, mode)?.canonical_form_unchecked();
    }
    Ok(cur)
}

/// Rewrites the word; the instance must come from `enumerate_unchecked`.
pub fn apply_unchecked(d: &LegendrianGaussDiagram, m: &MoveInstance) -> LegendrianGaussDiagram {
    let v = m.kind.variant;
    match m.kind.sense {
        Sense::Delete if m.kind.family == MoveFamily::CuspPass => {
            // the cusp (anchor 1) stays
            let a = &m.anchors;
            delete_sites(d, &[a[0], a[2], a[3], a[4]])
        }
        Sense::Delete => delete_sites(d, &m.anchors),
        Sense::Slide => {
            let mut sites = d.sites.clone();
            for pair in m.anchors.chunks(2) {
                sites.swap(pair[0], pair[1]);
            }
            LegendrianGaussDiagram { sites, base: d.base }
        }
        Sense::Create => {
            let a = d.next_arrow_id();
            let b = a + 1;
            let end = |head: bool, id: u32| if head { Site::Head(id) } else { Site::Tail(id) };
            match m.kind.family {
                MoveFamily::Swallowtail => {
                    let s1 = if v & 1 == 0 { Sign::Pos } else { Sign::Neg };
                    let label = label_of_bit(v & 2 != 0);
                    let tail_first = (s1 == Sign::Pos) == (label == Coorientation::L);
                    let run = vec![end(!tail_first, a), Site::Cusp(s1), Site::Cusp(s1.flip()), end(tail_first, a)];
                    insert_runs(d, &[(m.anchors[0], run)], None)
                }
                MoveFamily::Tangency => {
                    let anti = v & 1 != 0;
                    let x = v & 2 != 0;
                    let run1 = vec![end(x, a), end(!x, b)];
                    let run2 = if anti { vec![end(x, b), end(!x, a)] } else { vec![end(!x, a), end(x, b)] };
                    insert_runs(d, &[(m.anchors[0], run1), (m.anchors[1], run2)], None)
                }
                MoveFamily::CuspPass => {
                    let s = if v & 1 == 0 { Sign::Pos } else { Sign::Neg };
                    let label = label_of_bit(v & 2 != 0);
                    let beta_pos = v & 4 == 0;
                    let turn_left = (s == Sign::Pos) == (label == Coorientation::L);
                    let x_first = beta_pos == turn_left;
                    let run_a = vec![end(beta_pos, a), Site::Cusp(s), end(!beta_pos, b)];
                    let run_b = if x_first {
                        vec![end(!beta_pos, a), end(beta_pos, b)]
                    } else {
                        vec![end(beta_pos, b), end(!beta_pos, a)]
                    };
                    insert_runs(d, &[(m.anchors[1], run_b)], Some((m.anchors[0], run_a)))
                }
                MoveFamily::KinkPair => {
                    let cw = v & 1 != 0;
                    let run = vec![end(cw, a), end(!cw, a), end(cw, b), end(!cw, b)];
                    insert_runs(d, &[(m.anchors[0], run)], None)
                }
                MoveFamily::Triple => unreachable!("triple moves are slides"),
            }
        }
    }
}

/// Inserts runs at gaps (in the given order when gaps coincide) and
/// optionally replaces one site by a run. Arc labels are preserved.
fn insert_runs(
    d: &LegendrianGaussDiagram,
    runs: &[(usize, Vec<Site>)],
    replace: Option<(usize, Vec<Site>)>,
) -> LegendrianGaussDiagram {
    let n = d.sites.len();
    let extra: usize = runs.iter().map(|r| r.1.len()).sum::<usize>() + replace.as_ref().map_or(0, |r| r.1.len());
    let mut sites = Vec::with_capacity(n + extra);
    for p in 0..n.max(1) {
        for (g, run) in runs {
            if *g == p {
                sites.extend_from_slice(run);
            }
        }
        if p < n {
            match &replace {
                Some((c, run)) if *c == p => sites.extend_from_slice(run),
                _ => sites.push(d.sites[p]),
            }
        }
    }
    LegendrianGaussDiagram { sites, base: d.base }.relabeled()
}

/// Removes the listed sites; the merged arcs keep their labels.
fn delete_sites(d: &LegendrianGaussDiagram, idx: &[usize]) -> LegendrianGaussDiagram {
    let n = d.sites.len();
    let mut removed = vec![false; n];
    for &i in idx {
        removed[i] = true;
    }
    let first_kept = (0..n).find(|&i| !removed[i]);
    let base = match first_kept {
        Some(k) => d.arc_coorientation(k),
        None => d.arc_coorientation(idx[0]),
    };
    let sites: Vec<Site> = (0..n).filter(|&i| !removed[i]).map(|i| d.sites[i]).collect();
    LegendrianGaussDiagram { sites, base }.relabeled()
}

struct Ctx<'a> {
    d: &'a LegendrianGaussDiagram,
    n: usize,
    labels: Vec<Coorientation>,
    partner: Vec<usize>,
}

impl<'a> Ctx<'a> {
    fn new(d: &'a LegendrianGaussDiagram) -> Self {
        Ctx { d, n: d.sites.len(), labels: d.gap_labels(), partner: d.partner_table() }
    }

    fn at(&self, i: usize) -> Site {
        self.d.sites[i % self.n]
    }

    fn next(&self, i: usize) -> usize {
        (i + 1) % self.n
    }

    fn prev(&self, i: usize) -> usize {
        (i + self.n - 1) % self.n
    }

    fn is_arrow(&self, i: usize) -> bool {
        self.partner[i] != usize::MAX
    }

    fn gaps(&self) -> std::ops::Range<usize> {
        0..self.n.max(1)
    }

    fn swallowtail_create(&self, out: &mut Vec<MoveInstance>) {
        for g in self.gaps() {
            let lb = label_bit(self.labels[g]);
            for s in 0..2u8 {
                let kind = MoveKind { family: MoveFamily::Swallowtail, variant: s | lb << 1, sense: Sense::Create };
                out.push(MoveInstance { kind, anchors: vec![g] });
            }
        }
    }

    fn swallowtail_delete(&self, out: &mut Vec<MoveInstance>) {
        if self.n < 4 {
            return;
        }
        for i in 0..self.n {
            let (i1, i2, i3) = (self.next(i), self.next(i + 1), self.next(i + 2));
            let (Some(s1), Some(s2)) = (self.at(i1).cusp_sign(), self.at(i2).cusp_sign()) else { continue };
            if s1 == s2 || !self.is_arrow(i) || self.partner[i] != i3 {
                continue;
            }
            let label = self.labels[i];
            let tail_first = (s1 == Sign::Pos) == (label == Coorientation::L);
            if self.at(i).is_head() == tail_first {
                continue;
            }
            let variant = u8::from(s1 == Sign::Neg) | label_bit(label) << 1;
            let kind = MoveKind { family: MoveFamily::Swallowtail, variant, sense: Sense::Delete };
            out.push(MoveInstance { kind, anchors: vec![i, i1, i2, i3] });
        }
    }

    fn tangency_create(&self, out: &mut Vec<MoveInstance>) {
        for g1 in self.gaps() {
            for g2 in g1..self.n.max(1) {
                let lb = label_bit(self.labels[g1]) << 2 | label_bit(self.labels[g2]) << 3;
                for low in 0..4u8 {
                    let kind = MoveKind { family: MoveFamily::Tangency, variant: low | lb, sense: Sense::Create };
                    out.push(MoveInstance { kind, anchors: vec![g1, g2] });
                }
            }
        }
    }

    fn tangency_delete(&self, out: &mut Vec<MoveInstance>) {
        if self.n < 4 {
            return;
        }
        for i in 0..self.n {
            let i1 = self.next(i);
            if !self.is_arrow(i) || !self.is_arrow(i1) || self.partner[i] == i1 {
                continue;
            }
            if self.at(i).is_head() == self.at(i1).is_head() {
                continue;
            }
            let (pa, pb) = (self.partner[i], self.partner[i1]);
            let (j, anti) = if self.next(pa) == pb {
                (pa, false)
            } else if self.next(pb) == pa {
                (pb, true)
            } else {
                continue;
            };
            // each pair is seen from both runs; keep the one whose run starts first
            if j < i {
                continue;
            }
            let variant = u8::from(anti)
                | u8::from(self.at(i).is_head()) << 1
                | label_bit(self.labels[i]) << 2
                | label_bit(self.labels[j]) << 3;
            let kind = MoveKind { family: MoveFamily::Tangency, variant, sense: Sense::Delete };
            out.push(MoveInstance { kind, anchors: vec![i, i1, j, self.next(j)] });
        }
    }

    fn cusp_pass_create(&self, out: &mut Vec<MoveInstance>) {
        for c in 0..self.n {
            let Some(s) = self.at(c).cusp_sign() else { continue };
            let base = u8::from(s == Sign::Neg) | label_bit(self.labels[c]) << 1;
            for g in self.gaps() {
                for beta in 0..2u8 {
                    let kind =
                        MoveKind { family: MoveFamily::CuspPass, variant: base | beta << 2, sense: Sense::Create };
                    out.push(MoveInstance { kind, anchors: vec![c, g] });
                }
            }
        }
    }

    fn cusp_pass_delete(&self, out: &mut Vec<MoveInstance>) {
        if self.n < 5 {
            return;
        }
        for c in 0..self.n {
            let Some(s) = self.at(c).cusp_sign() else { continue };
            let (x, y) = (self.prev(c), self.next(c));
            if !self.is_arrow(x) || !self.is_arrow(y) || self.partner[x] == y {
                continue;
            }
            let beta_pos = self.at(x).is_head();
            if self.at(y).is_head() == beta_pos {
                continue;
            }
            let (px, py) = (self.partner[x], self.partner[y]);
            let x_first = if self.next(px) == py {
                true
            } else if self.next(py) == px {
                false
            } else {
                continue;
            };
            let label = self.labels[x];
            let turn_left = (s == Sign::Pos) == (label == Coorientation::L);
            if x_first != (beta_pos == turn_left) {
                continue;
            }
            let variant = u8::from(s == Sign::Neg) | label_bit(label) << 1 | u8::from(!beta_pos) << 2;
            let kind = MoveKind { family: MoveFamily::CuspPass, variant, sense: Sense::Delete };
            let b_run = if x_first { [px, py] } else { [py, px] };
            out.push(MoveInstance { kind, anchors: vec![x, c, y, b_run[0], b_run[1]] });
        }
    }

    fn kink_pair_create(&self, out: &mut Vec<MoveInstance>) {
        for g in self.gaps() {
            for cw in 0..2u8 {
                let kind = MoveKind { family: MoveFamily::KinkPair, variant: cw, sense: Sense::Create };
                out.push(MoveInstance { kind, anchors: vec![g] });
            }
        }
    }

    fn kink_pair_delete(&self, out: &mut Vec<MoveInstance>) {
        if self.n < 4 {
            return;
        }
        for i in 0..self.n {
            let (i1, i2, i3) = (self.next(i), self.next(i + 1), self.next(i + 2));
            if !self.is_arrow(i) || self.partner[i] != i1 || !self.is_arrow(i2) || self.partner[i2] != i3 {
                continue;
            }
            let cw = self.at(i).is_head();
            if self.at(i2).is_head() != cw {
                continue;
            }
            let kind = MoveKind { family: MoveFamily::KinkPair, variant: u8::from(cw), sense: Sense::Delete };
            out.push(MoveInstance { kind, anchors: vec![i, i1, i2, i3] });
        }
    }

    // a run is an adjacent pair of endpoints of two different arrows
    fn run_with(&self, site: usize, exclude: &[usize]) -> Vec<usize> {
        let mut starts = Vec::new();
        for start in [self.prev(site), site] {
            let other = if start == site { self.next(site) } else { start };
            if other == site || !self.is_arrow(other) || exclude.contains(&other) {
                continue;
            }
            if self.partner[other] == site {
                continue;
            }
            starts.push(start);
        }
        starts
    }

    fn triple_slides(&self, out: &mut Vec<MoveInstance>) {
        if self.n < 6 {
            return;
        }
        let mut seen: BTreeSet<[usize; 3]> = BTreeSet::new();
        for i in 0..self.n {
            let i1 = self.next(i);
            if !self.is_arrow(i) || !self.is_arrow(i1) || self.partner[i] == i1 {
                continue;
            }
            let (pa, pb) = (self.partner[i], self.partner[i1]);
            for ra in self.run_with(pa, &[i, i1]) {
                let ra_sites = [ra, self.next(ra)];
                let c_site = if ra_sites[0] == pa { ra_sites[1] } else { ra_sites[0] };
                if c_site == pb {
                    continue;
                }
                let pc = self.partner[c_site];
                for rb in self.run_with(pb, &[i, i1, ra_sites[0], ra_sites[1]]) {
                    let rb_sites = [rb, self.next(rb)];
                    if !rb_sites.contains(&pc) {
                        continue;
                    }
                    let mut all = vec![i, i1, ra_sites[0], ra_sites[1], rb_sites[0], rb_sites[1]];
                    all.sort_unstable();
                    all.dedup();
                    if all.len() != 6 {
                        continue;
                    }
                    let mut starts = [i, ra, rb];
                    starts.sort_unstable();
                    seen.insert(starts);
                }
            }
        }
        for starts in seen {
            if let Some(m) = self.triple_instance(starts) {
                out.push(m);
            }
        }
    }

    fn triple_instance(&self, starts: [usize; 3]) -> Option<MoveInstance> {
        let runs: Vec<[usize; 2]> = starts.iter().map(|&s| [s, self.next(s)]).collect();
        let arrow = |i: usize| self.at(i).arrow().expect("arrow site");
        let run_of = |site: usize| runs.iter().position(|r| r.contains(&site));
        // σ for run r: the first site connects to the lower-numbered other run
        let mut sigma = [0i8; 3];
        for (r, run) in runs.iter().enumerate() {
            let o0 = run_of(self.partner[run[0]])?;
            let o1 = run_of(self.partner[run[1]])?;
            if o0 == r || o1 == r || o0 == o1 {
                return None;
            }
            sigma[r] = if o0 < o1 { 1 } else { -1 };
        }
        let mut eps = [0i8; 3];
        for (k, (a, b)) in [(0usize, 1usize), (0, 2), (1, 2)].into_iter().enumerate() {
            let site = runs[a].iter().copied().find(|&s| run_of(self.partner[s]) == Some(b))?;
            eps[k] = if self.at(site).is_head() { 1 } else { -1 };
            let _ = arrow(site);
        }
        let idx = triangle_index([sigma[0], sigma[1], sigma[2], eps[0], eps[1], eps[2]])?;
        let kind = MoveKind { family: MoveFamily::Triple, variant: idx, sense: Sense::Slide };
        let anchors = runs.iter().flat_map(|r| r.iter().copied()).collect();
        Some(MoveInstance { kind, anchors })
    }
}

/// Inserts `n1` positive and `n2` negative zigzags at gap `position`.
///
/// Pairs alternate `(C+ C+)(C- C-)` while both kinds remain, so that
/// `stabilize(d, j, j, p)` is the word produced by `j` negative resolutions
/// of singular marks at `p`.
pub fn stabilize(
    d: &LegendrianGaussDiagram,
    n1: usize,
    n2: usize,
    position: usize,
) -> Result<LegendrianGaussDiagram, DiagramError> {
    d.validate()?;
    if d.is_singular() {
        return Err(DiagramError::SingularNotAllowed);
    }
    if position >= d.gap_count() {
        return Err(DiagramError::BadPosition(position));
    }
    Ok(LegendrianGaussDiagram { sites: splice(&d.sites, position, &zigzags(n1, n2)), base: d.base })
}

pub(crate) fn zigzags(n1: usize, n2: usize) -> Vec<Site> {
    let mut run = Vec::with_capacity(2 * (n1 + n2));
    for k in 0..n1.max(n2) {
        if k < n1 {
            run.extend([Site::Cusp(Sign::Pos); 2]);
        }
        if k < n2 {
            run.extend([Site::Cusp(Sign::Neg); 2]);
        }
    }
    run
}

pub(crate) fn splice(sites: &[Site], position: usize, run: &[Site]) -> Vec<Site> {
    let mut out = Vec::with_capacity(sites.len() + run.len());
    out.extend_from_slice(&sites[..position.min(sites.len())]);
    out.extend_from_slice(run);
    out.extend_from_slice(&sites[position.min(sites.len())..]);
    out
}

/// Inserts one self-tangency mark pair `[S S]` at gap `position`.
pub fn insert_singular(d: &LegendrianGaussDiagram, position: usize) -> Result<LegendrianGaussDiagram, DiagramError> {
    d.validate()?;
    if position >= d.gap_count() {
        return Err(DiagramError::BadPosition(position));
    }
    let m = d.next_mark_id();
    let sites = splice(&d.sites, position, &[Site::Mark(m), Site::Mark(m)]);
    Ok(LegendrianGaussDiagram { sites, base: d.base })
}

/// `z` marks inserted at the same gap.
pub fn insert_singular_n(
    d: &LegendrianGaussDiagram,
    position: usize,
    z: usize,
) -> Result<LegendrianGaussDiagram, DiagramError> {
    let mut out = d.clone();
    out.validate()?;
    for _ in 0..z {
        out = insert_singular(&out, position)?;
    }
    Ok(out)
}
