//! Bounded search over the move graph.
//!
//! `search_equivalence` first runs a bidirectional breadth-first search in
//! which the longest cyclic block shared by both words is frozen, so only
//! the differing window is rewritten. If that fails it falls back to a
//! bidirectional search over all canonical codes.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{render, CanonicalCode, DiagramError, LegendrianGaussDiagram};
use crate::invariants::{maslov, rho_of_diagram, InvariantError};
use crate::moves::{apply_unchecked, enumerate_unchecked, MoveError, MoveFamily, MoveInstance, MoveMode, Sense};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("search budget must be positive")]
    BudgetZero,
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Move(#[from] MoveError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error("could not express a search step as a move on the canonical form")]
    PathReconstruction,
}

/// Extra sites allowed above the longer input when no cap is given.
pub const DEFAULT_WORD_SLACK: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_depth: usize,
    pub max_nodes: usize,
    /// Words longer than this are not expanded. `None` means the longer
    /// input plus [`DEFAULT_WORD_SLACK`].
    pub max_word_length: Option<usize>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_depth: 16, max_nodes: 1_000_000, max_word_length: None }
    }
}

impl SearchBudget {
    pub fn new(max_depth: usize, max_nodes: usize) -> SearchBudget {
        SearchBudget { max_depth, max_nodes, max_word_length: None }
    }

    pub fn with_word_length(mut self, n: usize) -> SearchBudget {
        self.max_word_length = Some(n);
        self
    }

    pub fn word_cap(&self, longest_input: usize) -> usize {
        self.max_word_length.unwrap_or(longest_input + DEFAULT_WORD_SLACK)
    }

    fn check(&self) -> Result<(), EngineError> {
        if self.max_depth == 0 || self.max_nodes == 0 || self.max_word_length == Some(0) {
            return Err(EngineError::BudgetZero);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub depth_reached: usize,
    pub nodes: usize,
    pub localized_nodes: usize,
    pub word_length_cap: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// Each instance applies to the canonical form of the previous diagram.
    Connected {
        path: Vec<MoveInstance>,
    },
    Distinguished {
        by: String,
    },
    Exhausted {
        stats: SearchStats,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub verdict: Verdict,
    pub nodes_visited: usize,
}

impl SearchResult {
    pub fn is_connected(&self) -> bool {
        matches!(self.verdict, Verdict::Connected { .. })
    }

    pub fn path(&self) -> Option<&[MoveInstance]> {
        match &self.verdict {
            Verdict::Connected { path } => Some(path),
            _ => None,
        }
    }
}

trait Space: Sync {
    type State: Clone + Send + Sync;
    fn key(&self, s: &Self::State) -> String;
    fn neighbors(&self, s: &Self::State) -> Vec<Self::State>;
}

struct GlobalSpace {
    mode: MoveMode,
    cap: usize,
}

impl Space for GlobalSpace {
    type State = LegendrianGaussDiagram;

    fn key(&self, s: &LegendrianGaussDiagram) -> String {
        render(s)
    }

    fn neighbors(&self, s: &LegendrianGaussDiagram) -> Vec<LegendrianGaussDiagram> {
        let len = s.len() as isize;
        enumerate_unchecked(s, self.mode)
            .into_iter()
            .filter(|m| (len + m.kind.growth()) as usize <= self.cap)
            .map(|m| apply_unchecked(s, &m).canonical_form_unchecked())
            .collect()
    }
}

/// Words kept as `[context, window]`; the context is never touched.
struct LocalSpace {
    mode: MoveMode,
    cap: usize,
    ctx: usize,
}

impl LocalSpace {
    fn allowed(&self, n: usize, m: &MoveInstance) -> bool {
        let gap_ok = |g: usize| g == 0 || (g >= self.ctx && g < n.max(1));
        match m.kind.sense {
            Sense::Create => match m.kind.family {
                MoveFamily::CuspPass => m.anchors[0] >= self.ctx && gap_ok(m.anchors[1]),
                _ => m.anchors.iter().all(|&g| gap_ok(g)),
            },
            Sense::Delete | Sense::Slide => m.anchors.iter().all(|&i| i >= self.ctx),
        }
    }

    // sites inserted in front of the context by a creation at gap 0
    fn front_insertions(m: &MoveInstance) -> usize {
        if m.kind.sense != Sense::Create {
            return 0;
        }
        match m.kind.family {
            MoveFamily::Swallowtail | MoveFamily::KinkPair => {
                if m.anchors[0] == 0 {
                    4
                } else {
                    0
                }
            }
            MoveFamily::Tangency => m.anchors.iter().filter(|&&g| g == 0).count() * 2,
            MoveFamily::CuspPass => {
                if m.anchors[1] == 0 {
                    2
                } else {
                    0
                }
            }
            MoveFamily::Triple => 0,
        }
    }
}

impl Space for LocalSpace {
    type State = LegendrianGaussDiagram;

    fn key(&self, s: &LegendrianGaussDiagram) -> String {
        render(s)
    }

    fn neighbors(&self, s: &LegendrianGaussDiagram) -> Vec<LegendrianGaussDiagram> {
        let n = s.len();
        enumerate_unchecked(s, self.mode)
            .into_iter()
            .filter(|m| (n as isize + m.kind.growth()) as usize <= self.cap && self.allowed(n, m))
            .map(|m| {
                let y = apply_unchecked(s, &m);
                y.rotated(Self::front_insertions(&m)).relabeled()
            })
            .collect()
    }
}

struct Node<S> {
    state: S,
    parent: Option<String>,
    depth: usize,
}

struct BfsOutcome<S> {
    path: Option<Vec<S>>,
    nodes: usize,
    depth_reached: usize,
}

fn chain<S: Clone>(map: &HashMap<String, Node<S>>, mut key: String) -> Vec<S> {
    let mut out = Vec::new();
    loop {
        let node = &map[&key];
        out.push(node.state.clone());
        match &node.parent {
            Some(p) => key = p.clone(),
            None => return out,
        }
    }
}

/// Level-synchronous bidirectional breadth-first search. Children are
/// generated in parallel and merged in frontier order, so the result does
/// not depend on scheduling.
fn bidirectional<SP: Space>(
    space: &SP,
    a: SP::State,
    b: SP::State,
    max_depth: usize,
    max_nodes: usize,
) -> BfsOutcome<SP::State> {
    let ka = space.key(&a);
    let kb = space.key(&b);
    if ka == kb {
        return BfsOutcome { path: Some(vec![a]), nodes: 1, depth_reached: 0 };
    }
    let mut maps: [HashMap<String, Node<SP::State>>; 2] = [HashMap::new(), HashMap::new()];
    maps[0].insert(ka.clone(), Node { state: a, parent: None, depth: 0 });
    maps[1].insert(kb.clone(), Node { state: b, parent: None, depth: 0 });
    let mut frontiers = [vec![ka], vec![kb]];
    let mut depths = [0usize, 0usize];
    let mut nodes = 2usize;
    while depths[0] + depths[1] < max_depth {
        let side = if frontiers[0].len() <= frontiers[1].len() { 0 } else { 1 };
        if frontiers[side].is_empty() {
            break;
        }
        let other = 1 - side;
        let children: Vec<Vec<SP::State>> =
            frontiers[side].par_iter().map(|k| space.neighbors(&maps[side][k].state)).collect();
        let mut next = Vec::new();
        let mut meetings: Vec<(usize, String)> = Vec::new();
        let mut full = false;
        'outer: for (parent, kids) in frontiers[side].iter().zip(children) {
            for kid in kids {
                let key = space.key(&kid);
                if maps[side].contains_key(&key) {
                    continue;
                }
                if nodes >= max_nodes {
                    full = true;
                    break 'outer;
                }
                if let Some(n) = maps[other].get(&key) {
                    meetings.push((n.depth, key.clone()));
                }
                maps[side]
                    .insert(key.clone(), Node { state: kid, parent: Some(parent.clone()), depth: depths[side] + 1 });
                nodes += 1;
                next.push(key);
            }
        }
        depths[side] += 1;
        if let Some((_, meet)) = meetings.into_iter().min() {
            let mut fwd = chain(&maps[0], meet.clone());
            fwd.reverse();
            let bwd = chain(&maps[1], meet);
            fwd.extend(bwd.into_iter().skip(1));
            return BfsOutcome { path: Some(fwd), nodes, depth_reached: depths[0] + depths[1] };
        }
        if full {
            break;
        }
        frontiers[side] = next;
    }
    BfsOutcome { path: None, nodes, depth_reached: depths[0] + depths[1] }
}

/// Rotates both words so the longest common block comes first. Returns the
/// rotated words and the block length.
fn shared_context(
    a: &LegendrianGaussDiagram,
    b: &LegendrianGaussDiagram,
) -> Option<(LegendrianGaussDiagram, LegendrianGaussDiagram, usize)> {
    let (na, nb) = (a.len(), b.len());
    if na == 0 || nb == 0 {
        return None;
    }
    let rb: Vec<LegendrianGaussDiagram> = (0..nb).map(|j| b.rotated(j).relabeled()).collect();
    let mut best: Option<(usize, usize, usize)> = None;
    for i in 0..na {
        let ra = a.rotated(i).relabeled();
        for (j, y) in rb.iter().enumerate() {
            if ra.base != y.base {
                continue;
            }
            let k = ra.sites.iter().zip(&y.sites).take_while(|(p, q)| p == q).count();
            if best.is_none_or(|(bk, _, _)| k > bk) {
                best = Some((k, i, j));
            }
        }
    }
    let (k, i, j) = best?;
    if k == 0 {
        return None;
    }
    Some((a.rotated(i).relabeled(), rb[j].clone(), k))
}

/// Turns a sequence of diagrams into instances on successive canonical forms.
pub(crate) fn instance_path(
    states: &[LegendrianGaussDiagram],
    mode: MoveMode,
) -> Result<Vec<MoveInstance>, EngineError> {
    let mut path = Vec::with_capacity(states.len().saturating_sub(1));
    for w in states.windows(2) {
        let cur = w[0].canonical_form_unchecked();
        let target = w[1].canonical_code_unchecked();
        let growth = w[1].len() as isize - cur.len() as isize;
        let m = enumerate_unchecked(&cur, mode)
            .into_iter()
            .filter(|m| m.kind.growth() == growth)
            .find(|m| apply_unchecked(&cur, m).canonical_code_unchecked() == target)
            .ok_or(EngineError::PathReconstruction)?;
        path.push(m);
    }
    Ok(path)
}

fn check_inputs(d: &LegendrianGaussDiagram, mode: MoveMode) -> Result<(), EngineError> {
    d.validate()?;
    if d.is_singular() {
        return Err(DiagramError::SingularNotAllowed.into());
    }
    if mode.is_flat() && (d.cusp_count() > 0 || d.base != crate::diagram::Coorientation::L) {
        return Err(MoveError::NotFlat.into());
    }
    Ok(())
}

/// Name of a mode invariant separating `a` and `b`, if any.
pub fn distinguishing_invariant(
    a: &LegendrianGaussDiagram,
    b: &LegendrianGaussDiagram,
    mode: MoveMode,
) -> Result<Option<&'static str>, EngineError> {
    if mode.is_flat() {
        if rho_of_diagram(a)? != rho_of_diagram(b)? {
            return Ok(Some("rho"));
        }
    } else if maslov(a) != maslov(b) {
        return Ok(Some("maslov"));
    }
    Ok(None)
}

pub fn search_equivalence(
    a: &LegendrianGaussDiagram,
    b: &LegendrianGaussDiagram,
    mode: MoveMode,
    budget: SearchBudget,
) -> Result<SearchResult, EngineError> {
    budget.check()?;
    check_inputs(a, mode)?;
    check_inputs(b, mode)?;
    let ca = a.canonical_form_unchecked();
    let cb = b.canonical_form_unchecked();
    if render(&ca) == render(&cb) {
        return Ok(SearchResult { verdict: Verdict::Connected { path: Vec::new() }, nodes_visited: 1 });
    }
    if let Some(by) = distinguishing_invariant(&ca, &cb, mode)? {
        return Ok(SearchResult { verdict: Verdict::Distinguished { by: by.to_string() }, nodes_visited: 0 });
    }
    let cap = budget.word_cap(ca.len().max(cb.len()));
    let mut stats = SearchStats { word_length_cap: cap, ..SearchStats::default() };

    if let Some((la, lb, ctx)) = shared_context(&ca, &cb) {
        let space = LocalSpace { mode, cap, ctx };
        let out = bidirectional(&space, la, lb, budget.max_depth, budget.max_nodes.div_ceil(2));
        stats.localized_nodes = out.nodes;
        stats.depth_reached = out.depth_reached;
        if let Some(states) = out.path {
            let path = instance_path(&states, mode)?;
            return Ok(SearchResult { verdict: Verdict::Connected { path }, nodes_visited: out.nodes });
        }
    }
    let remaining = budget.max_nodes.saturating_sub(stats.localized_nodes).max(1);
    let space = GlobalSpace { mode, cap };
    let out = bidirectional(&space, ca, cb, budget.max_depth, remaining);
    let nodes = stats.localized_nodes + out.nodes;
    stats.nodes = nodes;
    stats.depth_reached = stats.depth_reached.max(out.depth_reached);
    match out.path {
        Some(states) => {
            let path = instance_path(&states, mode)?;
            Ok(SearchResult { verdict: Verdict::Connected { path }, nodes_visited: nodes })
        }
        None => Ok(SearchResult { verdict: Verdict::Exhausted { stats }, nodes_visited: nodes }),
    }
}

/// Plain breadth-first search from `a` only; used to cross-check the
/// bidirectional search on small budgets.
pub fn search_unidirectional(
    a: &LegendrianGaussDiagram,
    b: &LegendrianGaussDiagram,
    mode: MoveMode,
    budget: SearchBudget,
) -> Result<Option<usize>, EngineError> {
    budget.check()?;
    check_inputs(a, mode)?;
    check_inputs(b, mode)?;
    let cap = budget.word_cap(a.len().max(b.len()));
    let target = b.canonical_code_unchecked().0;
    let space = GlobalSpace { mode, cap };
    let mut seen: HashMap<String, usize> = HashMap::new();
    let start = a.canonical_form_unchecked();
    seen.insert(render(&start), 0);
    let mut frontier = vec![start];
    for depth in 0..=budget.max_depth {
        if frontier.iter().any(|s| render(s) == target) {
            return Ok(Some(depth));
        }
        if depth == budget.max_depth {
            break;
        }
        let mut next = Vec::new();
        for s in &frontier {
            for y in space.neighbors(s) {
                let k = render(&y);
                if seen.len() >= budget.max_nodes {
                    return Ok(None);
                }
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(k) {
                    e.insert(depth + 1);
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    Ok(None)
}

/// Canonical codes reachable from `a` within the budget.
pub fn orbit(
    a: &LegendrianGaussDiagram,
    mode: MoveMode,
    budget: SearchBudget,
) -> Result<BTreeSet<CanonicalCode>, EngineError> {
    check_inputs(a, mode)?;
    let cap = budget.word_cap(a.len());
    let space = GlobalSpace { mode, cap };
    let start = a.canonical_form_unchecked();
    let mut seen: BTreeSet<CanonicalCode> = BTreeSet::new();
    seen.insert(CanonicalCode(render(&start)));
    let mut frontier = vec![start];
    for _ in 0..budget.max_depth {
        let children: Vec<Vec<LegendrianGaussDiagram>> = frontier.par_iter().map(|s| space.neighbors(s)).collect();
        let mut next = Vec::new();
        for y in children.into_iter().flatten() {
            if seen.len() >= budget.max_nodes {
                return Ok(seen);
            }
            if seen.insert(CanonicalCode(render(&y))) {
                next.push(y);
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(seen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{Coorientation, Sign, Site};
    use crate::moves::{replay_path, stabilize};

    const CP: Site = Site::Cusp(Sign::Pos);
    const CN: Site = Site::Cusp(Sign::Neg);

    fn d(sites: Vec<Site>) -> LegendrianGaussDiagram {
        LegendrianGaussDiagram::new(sites, Coorientation::L).unwrap()
    }

    #[test]
    fn equal_inputs_connect_trivially() {
        let k = d(vec![CP, CN]);
        let r = search_equivalence(&k, &k.rotated(1), MoveMode::LegendrianIsotopy, SearchBudget::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Connected { path: vec![] });
    }

    #[test]
    fn maslov_distinguishes() {
        let r = search_equivalence(
            &d(vec![CP, CN]),
            &d(vec![CP, CP, CP, CN]),
            MoveMode::LegendrianHomotopy,
            SearchBudget::default(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Distinguished { by: "maslov".into() });
    }

    #[test]
    fn zero_budget_rejected() {
        let k = d(vec![CP, CN]);
        assert_eq!(
            search_equivalence(&k, &k, MoveMode::LegendrianIsotopy, SearchBudget::new(0, 10)),
            Err(EngineError::BudgetZero)
        );
    }

    #[test]
    fn unknot_reaches_its_double_stabilization() {
        let k = d(vec![CP, CN]);
        let s = stabilize(&k, 1, 1, 1).unwrap();
        let r = search_equivalence(&k, &s, MoveMode::LegendrianHomotopy, SearchBudget::default()).unwrap();
        let path = r.path().expect("connected").to_vec();
        assert!(path.len() <= 16);
        let end = replay_path(&k, &path, MoveMode::LegendrianHomotopy).unwrap();
        assert_eq!(end.canonical_code().unwrap(), s.canonical_code().unwrap());
    }

    #[test]
    fn orbit_depth_zero_is_singleton() {
        let k = d(vec![CP, CN]);
        let o = orbit(&k, MoveMode::LegendrianIsotopy, SearchBudget::new(0, 10)).unwrap();
        assert_eq!(o.len(), 1);
        let o1 = orbit(&k, MoveMode::LegendrianIsotopy, SearchBudget::new(1, 100_000)).unwrap();
        let o2 = orbit(&k, MoveMode::LegendrianIsotopy, SearchBudget::new(2, 100_000)).unwrap();
        assert!(o1.is_subset(&o2));
    }
}
