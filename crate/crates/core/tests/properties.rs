mod common;

use legknot::diagram::{LegendrianGaussDiagram, Site};
use legknot::invariants::{maslov, rho, rho_of_diagram};
use legknot::io::{emit_gauss_code, parse_gauss_code, parse_planar};
use legknot::moves::{apply_move, enumerate_moves, inverse, MoveMode};
use legknot::realization::{
    gauss_of_planar, gauss_of_planar_flat, planar_flat_of_string_with, realize_planar_with, realize_surface,
    surface_genus, LayoutOptions,
};
use proptest::prelude::*;

fn diagram(max_arrows: usize, max_cusp_pairs: usize) -> impl Strategy<Value = LegendrianGaussDiagram> {
    (0..=max_arrows, 0..=max_cusp_pairs)
        .prop_flat_map(|(a, c)| {
            let n = 2 * a + 2 * c;
            (
                Just(a),
                prop::collection::vec(any::<bool>(), 2 * c),
                any::<bool>(),
                Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
            )
        })
        .prop_map(|(a, signs, base, order)| common::diagram_from(a, &signs, base, &order))
}

fn reversed_labels(d: &LegendrianGaussDiagram) -> LegendrianGaussDiagram {
    let top = d.arrow_count() as u32 + 1;
    let sites = d
        .sites
        .iter()
        .map(|s| match *s {
            Site::Head(k) => Site::Head(top - k),
            Site::Tail(k) => Site::Tail(top - k),
            other => other,
        })
        .collect();
    LegendrianGaussDiagram::new(sites, d.base).unwrap()
}

// every `stride`-th instance, so larger words stay cheap
fn sample<T: Clone>(all: &[T], limit: usize) -> Vec<T> {
    let stride = all.len().div_ceil(limit.max(1)).max(1);
    all.iter().step_by(stride).cloned().collect()
}

// genus from the GF(2) rank of the interlacement matrix of the chords
fn interlace_genus(d: &LegendrianGaussDiagram) -> usize {
    let mut pos: std::collections::BTreeMap<u32, Vec<usize>> = Default::default();
    for (i, s) in d.sites.iter().enumerate() {
        if let Some(a) = s.arrow() {
            pos.entry(a).or_default().push(i);
        }
    }
    let chords: Vec<(usize, usize)> = pos.values().map(|v| (v[0], v[1])).collect();
    let mut rows: Vec<u64> = chords
        .iter()
        .map(|&(a, b)| {
            chords.iter().enumerate().fold(0u64, |m, (j, &(c, e))| {
                let inside = |x: usize| a < x && x < b;
                if inside(c) != inside(e) {
                    m | 1 << j
                } else {
                    m
                }
            })
        })
        .collect();
    let mut rank = 0;
    for bit in 0..chords.len() {
        if let Some(p) = (rank..rows.len()).find(|&r| rows[r] >> bit & 1 == 1) {
            rows.swap(rank, p);
            for r in 0..rows.len() {
                if r != rank && rows[r] >> bit & 1 == 1 {
                    rows[r] ^= rows[rank];
                }
            }
            rank += 1;
        }
    }
    rank / 2
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn emit_parse_round_trip(d in diagram(4, 2)) {
        let code = emit_gauss_code(&d).unwrap();
        let back = parse_gauss_code(&code).unwrap();
        prop_assert_eq!(emit_gauss_code(&back).unwrap(), code.clone());
        prop_assert_eq!(back.canonical_code().unwrap().0, code);
    }

    #[test]
    fn canonical_code_ignores_rotation_and_labels(d in diagram(4, 2), k in 0usize..16) {
        let code = d.canonical_code().unwrap();
        let r = d.rotated(k % d.len().max(1));
        prop_assert_eq!(r.canonical_code().unwrap(), code.clone());
        prop_assert_eq!(reversed_labels(&d).canonical_code().unwrap(), code);
    }

    #[test]
    fn every_move_has_an_inverse(d in diagram(2, 1), mode in prop_oneof![
        Just(MoveMode::LegendrianIsotopy),
        Just(MoveMode::LegendrianHomotopy),
    ]) {
        let target = d.canonical_code().unwrap();
        for m in sample(&enumerate_moves(&d, mode).unwrap(), 60) {
            let e = apply_move(&d, &m, mode).unwrap();
            let inv = inverse(&d, &m, mode).unwrap();
            prop_assert_eq!(apply_move(&e, &inv, mode).unwrap().canonical_code().unwrap(), target.clone());
        }
    }

    #[test]
    fn maslov_is_invariant(d in diagram(3, 2)) {
        let before = maslov(&d);
        for m in sample(&enumerate_moves(&d, MoveMode::LegendrianHomotopy).unwrap(), 80) {
            prop_assert_eq!(maslov(&apply_move(&d, &m, MoveMode::LegendrianHomotopy).unwrap()), before);
        }
    }

    #[test]
    fn rho_is_invariant_under_flat_moves(d in diagram(3, 0)) {
        let s = d.underlying_string().unwrap().as_diagram();
        let before = rho_of_diagram(&s).unwrap();
        for m in sample(&enumerate_moves(&s, MoveMode::FlatFramedHomotopy).unwrap(), 30) {
            let e = apply_move(&s, &m, MoveMode::FlatFramedHomotopy).unwrap();
            prop_assert_eq!(rho_of_diagram(&e).unwrap(), before);
        }
    }

    #[test]
    fn rho_ignores_layout(d in diagram(4, 0), seed in any::<u64>()) {
        let s = d.underlying_string().unwrap();
        let a = planar_flat_of_string_with(&s, LayoutOptions { seed, shuffle: true }).unwrap();
        prop_assert_eq!(rho(&a).unwrap(), rho_of_diagram(&d).unwrap());
        prop_assert_eq!(gauss_of_planar_flat(&a).unwrap().canonical_code().unwrap(), s.canonical_code().unwrap());
    }

    #[test]
    fn planar_round_trip(d in diagram(4, 2), seed in any::<u64>(), shuffle in any::<bool>()) {
        let p = realize_planar_with(&d, LayoutOptions { seed, shuffle }).unwrap();
        prop_assert_eq!(gauss_of_planar(&p).unwrap().canonical_code().unwrap(), d.canonical_code().unwrap());
        let text = legknot::io::emit_planar(&p);
        let q = parse_planar(&text).unwrap();
        prop_assert_eq!(gauss_of_planar(&q).unwrap().canonical_code().unwrap(), d.canonical_code().unwrap());
    }

    #[test]
    fn genus_matches_interlace_rank(d in diagram(6, 0), k in 0usize..12) {
        let s = d.underlying_string().unwrap();
        let g = surface_genus(&realize_surface(&s).unwrap()).unwrap();
        prop_assert_eq!(g, interlace_genus(&d));
        let r = d.rotated(k % d.len().max(1)).underlying_string().unwrap();
        prop_assert_eq!(surface_genus(&realize_surface(&r).unwrap()).unwrap(), g);
    }

    #[test]
    fn gauss_parser_never_panics(text in "(@[LRX]?)?( ?(A[0-9]{0,2}[htx]?|C[+-]?|S[0-9]?|@L|[a-z]|  ))*") {
        let _ = parse_gauss_code(&text);
    }

    #[test]
    fn planar_parser_never_panics(text in "(vertices:|cusps:|virtual:|coorientation_seed:|[ ()\\-+,:/.0-9LR#\n]){0,60}") {
        let _ = parse_planar(&text);
    }
}
