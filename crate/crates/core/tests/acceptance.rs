//! One PASS/FAIL line per acceptance criterion. Run with `--nocapture` to see
//! them; the test fails if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use legknot::atlas::{atlas_build, classification_probe, enumerate_diagrams, Atlas, AtlasLimits};
use legknot::diagram::{LegendrianGaussDiagram, Sign, Site};
use legknot::engine::{search_equivalence, SearchBudget};
use legknot::invariants::{add_kink, maslov, rho, rho_of_diagram, KinkSide};
use legknot::moves::selftest::{move_table_selftest, SelftestOptions};
use legknot::moves::{apply_unchecked, enumerate_moves, insert_singular_n, replay_path, stabilize, MoveMode};
use legknot::realization::{
    gauss_of_planar, gauss_of_planar_flat, planar_flat_of_string, realize_planar, realize_surface, surface_genus,
};
use legknot::vassiliev::{
    combo_lemma_check, expansion_identity_check, finite_difference, psi_extend, resolve, InvariantTable,
};
use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

struct Corpus {
    homotopy: Atlas,
    isotopy: Atlas,
    flat: Atlas,
}

fn corpus() -> Corpus {
    let limits = AtlasLimits::default();
    let budget = SearchBudget::default();
    Corpus {
        homotopy: atlas_build(limits, MoveMode::LegendrianHomotopy, budget).unwrap(),
        isotopy: atlas_build(limits, MoveMode::LegendrianIsotopy, budget).unwrap(),
        flat: atlas_build(limits, MoveMode::FlatFramedHomotopy, budget).unwrap(),
    }
}

fn diagrams(a: &Atlas) -> impl Iterator<Item = LegendrianGaussDiagram> + '_ {
    (0..a.records.len()).map(|i| a.diagram(i))
}

// Σ_{k=0}^{p} (-1)^k C(p,k) C(k(z+1), i), summed over every k
fn lemma_oracle(p: u64, z: u64, i: u64) -> BigInt {
    (0..=p).fold(BigInt::zero(), |acc, k| {
        let term = common::binomial(p, k) * common::binomial(k * (z + 1), i);
        if k % 2 == 0 {
            acc + term
        } else {
            acc - term
        }
    })
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for p in 1..=8 {
        for z in 1..=6 {
            let oracle_ok = (0..p).all(|i| lemma_oracle(p, z, i).is_zero());
            if !combo_lemma_check(p, z) || !oracle_ok {
                bad.push(format!("p={p} z={z}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(bad.is_empty() && secs < 5.0, format!("48 (p,z) pairs, {} failures, {secs:.3}s", bad.len()))
}

// resolutions written out directly: j negative marks become j blocks C+C+C-C-
fn expansion_oracle(d: &LegendrianGaussDiagram, z: usize) -> BTreeMap<String, BigInt> {
    let block = [Site::Cusp(Sign::Pos), Site::Cusp(Sign::Pos), Site::Cusp(Sign::Neg), Site::Cusp(Sign::Neg)];
    let mut out: BTreeMap<String, BigInt> = BTreeMap::new();
    for j in 0..=z {
        let run: Vec<Site> = block.iter().copied().cycle().take(4 * j).collect();
        let code = common::splice(d, 0, &run).canonical_code().unwrap().0;
        let c = common::binomial(z as u64, j as u64);
        *out.entry(code).or_default() += if j % 2 == 0 { c } else { -c };
    }
    out.retain(|_, v| !v.is_zero());
    out
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checks = 0;
    let mut bad = Vec::new();
    for _ in 0..120 {
        let d = common::random_diagram(&mut rng, 5, 4);
        for z in 1..=6 {
            checks += 1;
            let lhs: BTreeMap<String, BigInt> = resolve(&insert_singular_n(&d, 0, z).unwrap())
                .unwrap()
                .iter()
                .map(|(c, k)| (c.0.clone(), k.clone()))
                .collect();
            if !expansion_identity_check(&d, z).unwrap() || lhs != expansion_oracle(&d, z) {
                bad.push(format!("{d} z={z}"));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("120 diagrams x z=1..6, {checks} identities, {} failures {:?}", bad.len(), bad.first()),
    )
}

fn criterion_3() -> Outcome {
    let r = move_table_selftest(SelftestOptions { max_word_length: 8, stride: 1, seed: 0 });
    let ok = r.passed() && r.dangerous_attempts > 0 && r.triangle_drawings > 0;
    outcome(
        ok,
        format!(
            "{} diagrams, {} instances, {} drawn moves, {} triangle drawings, {} mismatches, {} uncovered, dangerous rejected {}/{}",
            r.diagrams,
            r.instances_checked,
            r.geometric_moves,
            r.triangle_drawings,
            r.mismatches.len(),
            r.uncovered.len(),
            r.dangerous_rejected,
            r.dangerous_attempts
        ),
    )
}

fn criterion_4(c: &Corpus) -> Outcome {
    // homotopy mode enumerates the isotopy instances plus the dangerous ones
    let mut maslov_checked = 0u64;
    let mut isotopy_checked = 0u64;
    let mut maslov_bad = 0u64;
    for d in diagrams(&c.homotopy) {
        let m0 = maslov(&d);
        for m in enumerate_moves(&d, MoveMode::LegendrianHomotopy).unwrap() {
            maslov_checked += 1;
            isotopy_checked += u64::from(!m.kind.dangerous());
            if maslov(&apply_unchecked(&d, &m)) != m0 {
                maslov_bad += 1;
            }
        }
    }
    let mut rho_checked = 0u64;
    let mut rho_bad = 0u64;
    let mut kinks = 0u64;
    let mut kink_bad = 0u64;
    // the flat catalogue, widened to every string with up to 4 arrows
    let strings = enumerate_diagrams(AtlasLimits { max_word_length: 8, max_arrows: 4, max_cusps: 0 }, true);
    assert!(diagrams(&c.flat).all(|s| strings.contains(&s)));
    for s in strings {
        let r0 = rho_of_diagram(&s).unwrap();
        for m in enumerate_moves(&s, MoveMode::FlatFramedHomotopy).unwrap() {
            rho_checked += 1;
            if rho_of_diagram(&apply_unchecked(&s, &m)).unwrap() != r0 {
                rho_bad += 1;
            }
        }
        let p = planar_flat_of_string(&s.underlying_string().unwrap()).unwrap();
        for side in [KinkSide::Left, KinkSide::Right] {
            kinks += 1;
            let k = add_kink(&p, side).unwrap();
            // the curl adds one classical crossing
            let one_more = gauss_of_planar_flat(&k).unwrap().arrow_count() == s.arrow_count() + 1;
            if rho(&k).unwrap() == r0 || !one_more {
                kink_bad += 1;
            }
        }
    }
    outcome(
        maslov_bad == 0 && rho_bad == 0 && kink_bad == 0,
        format!(
            "maslov {maslov_bad}/{maslov_checked} violations ({isotopy_checked} isotopy instances), rho {rho_bad}/{rho_checked} violations, kink {kink_bad}/{kinks} not flipped"
        ),
    )
}

fn criterion_5(c: &Corpus) -> Outcome {
    let mut bad = Vec::new();
    for d in diagrams(&c.homotopy) {
        let back = gauss_of_planar(&realize_planar(&d).unwrap()).unwrap();
        if back.canonical_code().unwrap() != d.canonical_code().unwrap() {
            bad.push(d.to_string());
        }
    }
    let strings = enumerate_diagrams(AtlasLimits { max_word_length: 12, max_arrows: 6, max_cusps: 0 }, true);
    let mut bad_strings = Vec::new();
    for d in &strings {
        let s = d.underlying_string().unwrap();
        let back = gauss_of_planar_flat(&planar_flat_of_string(&s).unwrap()).unwrap();
        if back.canonical_code().unwrap() != s.canonical_code().unwrap() {
            bad_strings.push(d.to_string());
        }
    }
    outcome(
        bad.is_empty() && bad_strings.is_empty(),
        format!(
            "fronts {}/{} round trips failed, strings {}/{} failed",
            bad.len(),
            c.homotopy.records.len(),
            bad_strings.len(),
            strings.len()
        ),
    )
}

fn criterion_6(c: &Corpus) -> Outcome {
    let budget = SearchBudget::new(16, 1_000_000);
    let mut total = 0;
    let mut failures = Vec::new();
    let mut longest = 0;
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, r) in c.homotopy.records.iter().enumerate() {
        if r.invariants.arrow_count > 2 {
            continue;
        }
        total += 1;
        let d = c.homotopy.diagram(i);
        let target = stabilize(&d, 1, 1, 0).unwrap();
        let result = search_equivalence(&d, &target, MoveMode::LegendrianHomotopy, budget).unwrap();
        let verified = result.path().is_some_and(|path| {
            replay_path(&d, path, MoveMode::LegendrianHomotopy)
                .is_ok_and(|end| end.canonical_code_unchecked() == target.canonical_code_unchecked())
        });
        match result.path() {
            Some(path) if verified => {
                longest = longest.max(path.len());
                *histogram.entry(path.len()).or_default() += 1;
            }
            _ => failures.push(r.code.0.clone()),
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{total} diagrams with <= 2 arrows, {} failures {:?}, longest path {longest}, lengths {histogram:?}",
            failures.len(),
            failures.first()
        ),
    )
}

fn orbit_maslov_violations(a: &Atlas) -> usize {
    let mut first: BTreeMap<usize, i64> = BTreeMap::new();
    a.records.iter().filter(|r| *first.entry(r.orbit_id).or_insert(r.invariants.maslov) != r.invariants.maslov).count()
}

fn criterion_7(c: &Corpus) -> Outcome {
    let iso = orbit_maslov_violations(&c.isotopy);
    let homo = orbit_maslov_violations(&c.homotopy);
    // sampled stored witnesses replay to the claimed diagram
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut witness_bad = 0;
    for atlas in [&c.isotopy, &c.homotopy] {
        for _ in 0..200 {
            let i = rng.gen_range(0..atlas.records.len());
            let rep = atlas.records[i].orbit_id;
            let path = atlas.witness(i, rep).unwrap().expect("same orbit");
            let end = replay_path(&atlas.diagram(i), &path, atlas.mode);
            if end.map(|e| e.canonical_code_unchecked()) != Ok(atlas.records[rep].code.clone()) {
                witness_bad += 1;
            }
        }
    }
    let probe = classification_probe(&c.homotopy, &c.flat, SearchBudget::new(10, 20_000), 150).unwrap();
    let ok = iso == 0 && homo == 0 && witness_bad == 0 && probe.violations.is_empty();
    outcome(
        ok,
        format!(
            "orbit maslov violations isotopy {iso} homotopy {homo}, witness replay failures {witness_bad}; \
             isotopy orbits {}, homotopy orbits {}; probe: distinguished {}, candidates {}, connected {} \
             ({} via search), unresolved {}, skipped {}, violations {}",
            c.isotopy.orbit_count(),
            c.homotopy.orbit_count(),
            probe.distinguished_pairs,
            probe.candidate_pairs,
            probe.connected_pairs,
            probe.connected_by_search,
            probe.unresolved.len(),
            probe.skipped,
            probe.violations.len()
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut bad = 0;
    for t in 0..60 {
        let n = t % 6;
        let start = rng.gen_range(-5..5);
        let base: Vec<BigInt> = (0..=n).map(|_| BigInt::from(rng.gen_range(-1_000_000i64..1_000_000))).collect();
        let mut table = InvariantTable::new(start, base, n);
        psi_extend(&mut table, start + 40).unwrap();
        let zero = (start + n as i64 + 1..=start + 40).all(|l| finite_difference(&table, l) == Some(BigInt::zero()));
        if !zero {
            bad += 1;
        }
    }
    let mut poly_bad = 0;
    for n in 0..=5usize {
        for degree in 0..=n {
            let coeffs: Vec<i64> = (0..=degree).map(|_| rng.gen_range(-50..50)).collect();
            let eval = |l: i64| coeffs.iter().rev().fold(BigInt::zero(), |acc, &c| acc * l + c);
            let base: Vec<BigInt> = (0..=n as i64).map(eval).collect();
            let mut table = InvariantTable::new(0, base, n);
            psi_extend(&mut table, 60).unwrap();
            if (0..=60).any(|l| table.values[&l] != eval(l)) {
                poly_bad += 1;
            }
        }
    }
    outcome(
        bad == 0 && poly_bad == 0,
        format!("60 random tables n=0..5: {bad} failures; 21 polynomial tables: {poly_bad} failures"),
    )
}

// Explicit boundary walk over the disk arcs and band sides of the surface.
// Disk arc i runs from end i to end i+1. Each band has a left and a right
// side; leaving arc i at end i+1 enters the band attached there, whose other
// side ends at its partner end j, after which the walk follows arc j.
fn traversal_genus(word: &[u32]) -> usize {
    let m = word.len();
    if m == 0 {
        return 0;
    }
    let mut partner = vec![0; m];
    for i in 0..m {
        partner[i] = (0..m).find(|&j| j != i && word[j] == word[i]).unwrap();
    }
    #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
    enum Piece {
        Arc(usize),
        Side(usize, usize),
    }
    let mut used = std::collections::BTreeSet::new();
    let mut boundaries = 0;
    for start in 0..m {
        if used.contains(&Piece::Arc(start)) {
            continue;
        }
        boundaries += 1;
        let mut piece = Piece::Arc(start);
        while used.insert(piece) {
            piece = match piece {
                Piece::Arc(i) => {
                    let at = (i + 1) % m;
                    Piece::Side(at, partner[at])
                }
                Piece::Side(_, to) => Piece::Arc(to),
            };
        }
    }
    let chords = m / 2;
    // χ = 1 - chords = 2 - 2g - boundaries
    (1 + chords - boundaries) / 2
}

fn all_chord_words(n: usize, out: &mut Vec<Vec<u32>>) {
    fn fill(word: &mut Vec<u32>, next: u32, out: &mut Vec<Vec<u32>>) {
        match word.iter().position(|&x| x == 0) {
            None => out.push(word.clone()),
            Some(first) => {
                word[first] = next;
                for j in first + 1..word.len() {
                    if word[j] == 0 {
                        word[j] = next;
                        fill(word, next + 1, out);
                        word[j] = 0;
                    }
                }
                word[first] = 0;
            }
        }
    }
    let mut word = vec![0; 2 * n];
    fill(&mut word, 1, out);
}

fn criterion_9() -> Outcome {
    let mut checked = 0u64;
    let mut bad = 0u64;
    for n in 0..=6 {
        let mut words = Vec::new();
        all_chord_words(n, &mut words);
        for w in &words {
            let expected = traversal_genus(w);
            // every orientation pattern of the chords
            for mask in 0u32..1 << n {
                let mut seen = vec![false; n + 1];
                let sites: Vec<Site> = w
                    .iter()
                    .map(|&a| {
                        let first = !seen[a as usize];
                        seen[a as usize] = true;
                        if first == (mask >> (a - 1) & 1 == 1) {
                            Site::Head(a)
                        } else {
                            Site::Tail(a)
                        }
                    })
                    .collect();
                let s = legknot::diagram::FlatVirtualString::new(sites).unwrap();
                checked += 1;
                if surface_genus(&realize_surface(&s).unwrap()).unwrap() != expected {
                    bad += 1;
                }
            }
        }
    }
    let nested = traversal_genus(&[1, 2, 2, 1]);
    let interleaved = traversal_genus(&[1, 2, 1, 2]);
    let lib = |code: &str| {
        let s = legknot::io::parse_gauss_code(code).unwrap().underlying_string().unwrap();
        surface_genus(&realize_surface(&s).unwrap()).unwrap()
    };
    let examples = nested == 0
        && interleaved == 1
        && lib("@L A1t A2t A2h A1h") == 0
        && lib("@L A1t A2t A1h A2h") == 1
        && lib("@L") == 0;
    outcome(bad == 0 && examples, format!("{checked} oriented strings with <= 6 chords, {bad} disagreements"))
}

#[test]
fn acceptance() {
    // ACCEPTANCE_CRITERIA=4,6 runs a subset
    let only: Option<Vec<usize>> =
        std::env::var("ACCEPTANCE_CRITERIA").ok().map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let wanted = |n: usize| only.as_ref().is_none_or(|o| o.contains(&n));
    let mut lines = Vec::new();
    let mut run = |n: usize, f: &mut dyn FnMut() -> Outcome| {
        if !wanted(n) {
            return;
        }
        let start = Instant::now();
        let o = f();
        let line = format!(
            "criterion {n}: {} ({}; {:.1}s)",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
        println!("{line}");
        lines.push((o.passed, line));
    };
    run(1, &mut criterion_1);
    run(2, &mut criterion_2);
    run(3, &mut criterion_3);
    let c = (4..=7).any(wanted).then(|| {
        let start = Instant::now();
        let c = corpus();
        println!(
            "corpus: {} diagrams, {} strings built in {:.1}s",
            c.homotopy.records.len(),
            c.flat.records.len(),
            start.elapsed().as_secs_f64()
        );
        c
    });
    let c = c.as_ref();
    run(4, &mut || criterion_4(c.unwrap()));
    run(5, &mut || criterion_5(c.unwrap()));
    run(6, &mut || criterion_6(c.unwrap()));
    run(7, &mut || criterion_7(c.unwrap()));
    run(8, &mut criterion_8);
    run(9, &mut criterion_9);
    finish(lines);
}

fn finish(lines: Vec<(bool, String)>) {
    let failed: Vec<&String> = lines.iter().filter(|(ok, _)| !ok).map(|(_, l)| l).collect();
    assert!(failed.is_empty(), "failed criteria:\n{failed:#?}");
}
