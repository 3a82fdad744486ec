//! Exhaustive catalogue of small diagrams with invariants and move orbits.
//!
//! Orbits are the connected components of the move graph restricted to the
//! catalogue. Only deletions and slides are enumerated, since every creation
//! inside the catalogue is the inverse of an enumerated deletion.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagram::{CanonicalCode, Coorientation, LegendrianGaussDiagram, Sign, Site};
use crate::engine::{instance_path, search_equivalence, EngineError, SearchBudget};
use crate::invariants::{rho_of_diagram, InvariantError, InvariantVector};
use crate::io::{AtlasFile, AtlasFileRecord, AtlasHeader, ATLAS_FORMAT_VERSION};
use crate::moves::{apply_unchecked, enumerate_senses, replay_path, MoveInstance, MoveMode};
use crate::realization::{realize_surface, surface_genus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtlasLimits {
    pub max_word_length: usize,
    pub max_arrows: usize,
    pub max_cusps: usize,
}

impl Default for AtlasLimits {
    fn default() -> Self {
        AtlasLimits { max_word_length: 12, max_arrows: 3, max_cusps: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtlasRecord {
    pub code: CanonicalCode,
    pub invariants: InvariantVector,
    /// Index of the record with the least code in the same orbit.
    pub orbit_id: usize,
    /// Next record on a stored path towards the orbit representative.
    pub parent: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atlas {
    pub mode: MoveMode,
    pub budget: SearchBudget,
    pub limits: AtlasLimits,
    /// Sorted by code.
    pub records: Vec<AtlasRecord>,
}

/// Canonical forms of every diagram within `limits`, sorted by code. With
/// `strings_only` the diagrams are cusp-free with base `L`.
pub fn enumerate_diagrams(limits: AtlasLimits, strings_only: bool) -> Vec<LegendrianGaussDiagram> {
    let mut found: BTreeMap<String, LegendrianGaussDiagram> = BTreeMap::new();
    let max_cusps = if strings_only { 0 } else { limits.max_cusps };
    let bases: &[Coorientation] =
        if strings_only { &[Coorientation::L] } else { &[Coorientation::L, Coorientation::R] };
    for arrows in 0..=limits.max_arrows {
        for cusps in (0..=max_cusps).step_by(2) {
            if 2 * arrows + cusps > limits.max_word_length {
                continue;
            }
            let mut words = Vec::new();
            linear_words(arrows, cusps, &mut Vec::new(), &mut Vec::new(), 0, &mut words);
            for w in words {
                for &base in bases {
                    let d = LegendrianGaussDiagram { sites: w.clone(), base }.canonical_form_unchecked();
                    found.entry(crate::diagram::render(&d)).or_insert(d);
                }
            }
        }
    }
    found.into_values().collect()
}

// Words whose arrow ids appear in first-occurrence order.
fn linear_words(
    arrows: usize,
    cusps_left: usize,
    word: &mut Vec<Site>,
    open: &mut Vec<(u32, bool)>,
    opened: usize,
    out: &mut Vec<Vec<Site>>,
) {
    if cusps_left == 0 && opened == arrows && open.is_empty() {
        out.push(word.clone());
        return;
    }
    if cusps_left > 0 {
        for s in [Sign::Pos, Sign::Neg] {
            word.push(Site::Cusp(s));
            linear_words(arrows, cusps_left - 1, word, open, opened, out);
            word.pop();
        }
    }
    if opened < arrows {
        let id = opened as u32 + 1;
        for head_first in [true, false] {
            word.push(if head_first { Site::Head(id) } else { Site::Tail(id) });
            open.push((id, head_first));
            linear_words(arrows, cusps_left, word, open, opened + 1, out);
            open.pop();
            word.pop();
        }
    }
    for k in 0..open.len() {
        let (id, head_first) = open.remove(k);
        word.push(if head_first { Site::Tail(id) } else { Site::Head(id) });
        linear_words(arrows, cusps_left, word, open, opened, out);
        word.pop();
        open.insert(k, (id, head_first));
    }
}

/// Orbit representative index and parent pointer for each diagram, from the
/// components of the move graph restricted to `forms`.
pub fn orbit_partition(forms: &[LegendrianGaussDiagram], mode: MoveMode) -> Vec<(usize, Option<usize>)> {
    let index: HashMap<String, usize> = forms.iter().enumerate().map(|(i, d)| (crate::diagram::render(d), i)).collect();
    let edges: Vec<Vec<usize>> = forms
        .par_iter()
        .map(|d| {
            let mut out: Vec<usize> = enumerate_senses(d, mode, false)
                .iter()
                .filter_map(|m| index.get(apply_unchecked(d, m).canonical_code_unchecked().as_str()).copied())
                .collect();
            out.sort_unstable();
            out.dedup();
            out
        })
        .collect();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); forms.len()];
    for (i, targets) in edges.iter().enumerate() {
        for &j in targets {
            if i != j {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
    }
    let mut out: Vec<Option<(usize, Option<usize>)>> = vec![None; forms.len()];
    for root in 0..forms.len() {
        if out[root].is_some() {
            continue;
        }
        out[root] = Some((root, None));
        let mut queue = VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            let mut next = adjacency[i].clone();
            next.sort_unstable();
            for j in next {
                if out[j].is_none() {
                    out[j] = Some((root, Some(i)));
                    queue.push_back(j);
                }
            }
        }
    }
    out.into_iter().map(|x| x.expect("every node visited")).collect()
}

/// Builds the catalogue for `limits` in `mode`. Flat mode catalogues
/// strings only.
pub fn atlas_build(limits: AtlasLimits, mode: MoveMode, budget: SearchBudget) -> Result<Atlas, EngineError> {
    let forms = enumerate_diagrams(limits, mode.is_flat());
    let mut strings: BTreeMap<CanonicalCode, LegendrianGaussDiagram> = BTreeMap::new();
    for d in &forms {
        let s = d.underlying_string()?;
        strings.entry(s.canonical_code()?).or_insert_with(|| s.as_diagram());
    }
    let string_invariants: HashMap<CanonicalCode, (u8, usize)> = strings
        .into_par_iter()
        .map(|(code, s)| -> Result<_, InvariantError> {
            let flat = s.underlying_string()?;
            let genus = surface_genus(&realize_surface(&flat)?)?;
            Ok((code, (rho_of_diagram(&s)?, genus)))
        })
        .collect::<Result<_, _>>()?;
    let orbits = orbit_partition(&forms, mode);
    let records = forms
        .iter()
        .zip(orbits)
        .map(|(d, (orbit_id, parent))| {
            let (pos, neg) = d.cusp_counts();
            let string_code = d.underlying_string()?.canonical_code()?;
            let (rho, genus) = string_invariants[&string_code];
            Ok(AtlasRecord {
                code: CanonicalCode(crate::diagram::render(d)),
                invariants: InvariantVector {
                    maslov: pos as i64 - neg as i64,
                    positive_cusps: pos,
                    negative_cusps: neg,
                    arrow_count: d.arrow_count(),
                    string_code,
                    rho,
                    genus,
                },
                orbit_id,
                parent,
            })
        })
        .collect::<Result<Vec<_>, EngineError>>()?;
    Ok(Atlas { mode, budget, limits, records })
}

impl Atlas {
    pub fn find(&self, code: &str) -> Option<usize> {
        self.records.binary_search_by(|r| r.code.as_str().cmp(code)).ok()
    }

    pub fn diagram(&self, i: usize) -> LegendrianGaussDiagram {
        crate::io::parse_gauss_code(self.records[i].code.as_str()).expect("atlas codes parse")
    }

    fn chain_to_root(&self, mut i: usize) -> Vec<usize> {
        let mut out = vec![i];
        while let Some(p) = self.records[i].parent {
            out.push(p);
            i = p;
        }
        out
    }

    /// Move path from record `i` to record `j` when they share an orbit.
    pub fn witness(&self, i: usize, j: usize) -> Result<Option<Vec<MoveInstance>>, EngineError> {
        if self.records[i].orbit_id != self.records[j].orbit_id {
            return Ok(None);
        }
        let mut up = self.chain_to_root(i);
        let mut down = self.chain_to_root(j);
        while up.len() > 1 && down.len() > 1 && up[up.len() - 2] == down[down.len() - 2] {
            up.pop();
            down.pop();
        }
        down.pop();
        up.extend(down.into_iter().rev());
        let states: Vec<LegendrianGaussDiagram> = up.into_iter().map(|k| self.diagram(k)).collect();
        instance_path(&states, self.mode).map(Some)
    }

    pub fn orbit_count(&self) -> usize {
        self.records.iter().enumerate().filter(|(i, r)| r.orbit_id == *i).count()
    }

    pub fn to_file(&self) -> AtlasFile {
        AtlasFile {
            header: AtlasHeader {
                mode: self.mode.name().to_string(),
                budget: self.budget,
                format_version: ATLAS_FORMAT_VERSION,
                max_word_length: self.limits.max_word_length,
                max_arrows: self.limits.max_arrows,
                max_cusps: self.limits.max_cusps,
            },
            records: self
                .records
                .iter()
                .map(|r| AtlasFileRecord {
                    code: r.code.0.clone(),
                    maslov: r.invariants.maslov,
                    arrows: r.invariants.arrow_count,
                    cusps: r.invariants.positive_cusps + r.invariants.negative_cusps,
                    genus: r.invariants.genus,
                    rho: r.invariants.rho,
                    orbit_id: r.orbit_id,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeReport {
    /// Pairs with different maslov numbers; never connected.
    pub distinguished_pairs: u64,
    /// Pairs with equal maslov and flat-equivalent strings.
    pub candidate_pairs: u64,
    /// Candidate pairs joined inside the catalogue or by search.
    pub connected_pairs: u64,
    /// Candidate pairs joined only through a bounded search.
    pub connected_by_search: u64,
    /// Representative pairs whose search ran out of budget.
    pub unresolved: Vec<(String, String)>,
    /// Candidate representative pairs skipped by the pair limit.
    pub skipped: u64,
    /// Connected pairs with different maslov numbers. Must be empty.
    pub violations: Vec<(String, String)>,
}

fn find_root(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Compares the legendrian catalogue against maslov and flat classes of the
/// underlying strings. `flat` is a flat-mode catalogue covering the same
/// strings. Equal-invariant orbits in different catalogue components are
/// searched pairwise, at most `max_pairs` times.
pub fn classification_probe(
    atlas: &Atlas,
    flat: &Atlas,
    budget: SearchBudget,
    max_pairs: usize,
) -> Result<ProbeReport, EngineError> {
    let mut report = ProbeReport::default();
    let n = atlas.records.len();
    let mut by_maslov: BTreeMap<i64, u64> = BTreeMap::new();
    for r in &atlas.records {
        *by_maslov.entry(r.invariants.maslov).or_default() += 1;
    }
    let total = n as u64 * (n as u64).saturating_sub(1) / 2;
    let equal: u64 = by_maslov.values().map(|c| c * c.saturating_sub(1) / 2).sum();
    report.distinguished_pairs = total - equal;

    let mut orbit_maslov: HashMap<usize, usize> = HashMap::new();
    for (i, r) in atlas.records.iter().enumerate() {
        let first = *orbit_maslov.entry(r.orbit_id).or_insert(i);
        if atlas.records[first].invariants.maslov != r.invariants.maslov {
            report.violations.push((atlas.records[first].code.0.clone(), r.code.0.clone()));
        }
    }

    let flat_class = |r: &AtlasRecord| flat.find(r.invariants.string_code.as_str()).map(|k| flat.records[k].orbit_id);
    let mut groups: BTreeMap<(i64, Option<usize>), Vec<usize>> = BTreeMap::new();
    for (i, r) in atlas.records.iter().enumerate() {
        groups.entry((r.invariants.maslov, flat_class(r))).or_default().push(i);
    }

    let mut classes: Vec<usize> = (0..n).collect();
    for (i, r) in atlas.records.iter().enumerate() {
        let a = find_root(&mut classes, i);
        let b = find_root(&mut classes, r.orbit_id);
        classes[a] = b;
    }
    let mut attempts = 0usize;
    for ((_, flat_id), members) in &groups {
        if flat_id.is_none() {
            continue;
        }
        let size = members.len() as u64;
        report.candidate_pairs += size * (size - 1) / 2;
        let mut reps: Vec<usize> = members.iter().map(|&i| atlas.records[i].orbit_id).collect();
        reps.sort_unstable();
        reps.dedup();
        for x in 0..reps.len() {
            for y in x + 1..reps.len() {
                let (a, b) = (reps[x], reps[y]);
                if find_root(&mut classes, a) == find_root(&mut classes, b) {
                    continue;
                }
                if attempts >= max_pairs {
                    report.skipped += 1;
                    continue;
                }
                attempts += 1;
                let da = atlas.diagram(a);
                let db = atlas.diagram(b);
                let result = search_equivalence(&da, &db, MoveMode::LegendrianHomotopy, budget)?;
                match result.path() {
                    Some(path) => {
                        let end = replay_path(&da, path, MoveMode::LegendrianHomotopy)?;
                        if end.canonical_code_unchecked() != db.canonical_code_unchecked()
                            || atlas.records[a].invariants.maslov != atlas.records[b].invariants.maslov
                        {
                            report.violations.push((atlas.records[a].code.0.clone(), atlas.records[b].code.0.clone()));
                        }
                        let ra = find_root(&mut classes, a);
                        let rb = find_root(&mut classes, b);
                        classes[ra] = rb;
                    }
                    None => {
                        report.unresolved.push((atlas.records[a].code.0.clone(), atlas.records[b].code.0.clone()));
                    }
                }
            }
        }
        let mut class_sizes: HashMap<usize, u64> = HashMap::new();
        let mut orbit_sizes: HashMap<usize, u64> = HashMap::new();
        for &i in members {
            *class_sizes.entry(find_root(&mut classes, i)).or_default() += 1;
            *orbit_sizes.entry(atlas.records[i].orbit_id).or_default() += 1;
        }
        let joined: u64 = class_sizes.values().map(|c| c * (c - 1) / 2).sum();
        let inside: u64 = orbit_sizes.values().map(|c| c * (c - 1) / 2).sum();
        report.connected_pairs += joined;
        report.connected_by_search += joined - inside;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn small(n: usize) -> AtlasLimits {
        AtlasLimits { max_word_length: n, ..AtlasLimits::default() }
    }

    #[test]
    fn length_two_catalogue() {
        let codes: BTreeSet<String> = enumerate_diagrams(small(2), false).iter().map(crate::diagram::render).collect();
        for c in ["@L C+ C-", "@R C+ C-", "@L A1h A1t", "@R A1h A1t", "@L", "@R"] {
            let d = crate::io::parse_gauss_code(c).unwrap();
            assert!(codes.contains(d.canonical_code().unwrap().as_str()), "{c}");
        }
        let rev = crate::io::parse_gauss_code("@L C- C+").unwrap().canonical_code().unwrap();
        assert!(codes.contains(rev.as_str()));
    }

    // independent count: all words over a fixed alphabet, validated and
    // canonicalized
    fn brute_force_count(max_len: usize) -> usize {
        let alphabet = [
            Site::Cusp(Sign::Pos),
            Site::Cusp(Sign::Neg),
            Site::Head(1),
            Site::Tail(1),
            Site::Head(2),
            Site::Tail(2),
            Site::Head(3),
            Site::Tail(3),
        ];
        let mut seen = BTreeSet::new();
        for len in 0..=max_len {
            let total = alphabet.len().pow(len as u32);
            for mut k in 0..total {
                let mut w = Vec::with_capacity(len);
                for _ in 0..len {
                    w.push(alphabet[k % alphabet.len()]);
                    k /= alphabet.len();
                }
                for base in [Coorientation::L, Coorientation::R] {
                    if let Ok(d) = LegendrianGaussDiagram::new(w.clone(), base) {
                        if d.cusp_count() <= 4 {
                            seen.insert(d.canonical_code().unwrap());
                        }
                    }
                }
            }
        }
        seen.len()
    }

    #[test]
    fn count_matches_brute_force() {
        for n in 0..=5 {
            assert_eq!(enumerate_diagrams(small(n), false).len(), brute_force_count(n), "length {n}");
        }
    }

    #[test]
    fn orbits_share_maslov_and_witnesses_replay() {
        let atlas = atlas_build(small(6), MoveMode::LegendrianHomotopy, SearchBudget::default()).unwrap();
        for r in &atlas.records {
            let rep = &atlas.records[r.orbit_id];
            assert_eq!(rep.invariants.maslov, r.invariants.maslov);
            assert!(rep.code <= r.code);
        }
        let mut checked = 0;
        for (i, r) in atlas.records.iter().enumerate().filter(|(i, r)| r.orbit_id != *i).step_by(7).take(40) {
            for j in [r.orbit_id, i] {
                let path = atlas.witness(i, j).unwrap().expect("same orbit");
                let end = replay_path(&atlas.diagram(i), &path, atlas.mode).unwrap();
                assert_eq!(crate::diagram::render(&end), atlas.records[j].code.0);
            }
            let sibling = atlas.records.iter().rposition(|s| s.orbit_id == r.orbit_id).unwrap();
            let path = atlas.witness(sibling, i).unwrap().unwrap();
            let end = replay_path(&atlas.diagram(sibling), &path, atlas.mode).unwrap();
            assert_eq!(crate::diagram::render(&end), r.code.0);
            checked += 1;
        }
        assert!(checked > 10);
    }

    #[test]
    fn file_round_trip() {
        let atlas = atlas_build(small(4), MoveMode::LegendrianIsotopy, SearchBudget::default()).unwrap();
        let file = atlas.to_file();
        let text = crate::io::atlas_to_json(&file);
        assert_eq!(crate::io::atlas_from_json(&text).unwrap(), file);
        assert_eq!(crate::io::atlas_to_json(&crate::io::atlas_from_json(&text).unwrap()), text);
    }

    #[test]
    fn probe_on_small_catalogue() {
        let atlas = atlas_build(small(6), MoveMode::LegendrianHomotopy, SearchBudget::default()).unwrap();
        let flat = atlas_build(small(6), MoveMode::FlatFramedHomotopy, SearchBudget::default()).unwrap();
        let report = classification_probe(&atlas, &flat, SearchBudget::new(6, 5_000), 20).unwrap();
        assert!(report.violations.is_empty());
        assert!(report.connected_pairs > 0);
        assert!(report.distinguished_pairs > 0);
    }
}
