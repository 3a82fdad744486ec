#![allow(dead_code)]

use legknot::diagram::{Coorientation, LegendrianGaussDiagram, Sign, Site};
use rand::seq::SliceRandom;
use rand::Rng;

/// A valid diagram with the given numbers of arrows and cusps (cusps even).
pub fn diagram_from(arrows: usize, cusp_signs: &[bool], base_l: bool, order: &[usize]) -> LegendrianGaussDiagram {
    let mut pool = Vec::new();
    for k in 1..=arrows as u32 {
        pool.push(Site::Head(k));
        pool.push(Site::Tail(k));
    }
    pool.extend(cusp_signs.iter().map(|&p| Site::Cusp(if p { Sign::Pos } else { Sign::Neg })));
    let mut keyed: Vec<(usize, Site)> = order.iter().copied().zip(pool).collect();
    keyed.sort_by_key(|&(k, _)| k);
    let sites = keyed.into_iter().map(|(_, s)| s).collect();
    let base = if base_l { Coorientation::L } else { Coorientation::R };
    LegendrianGaussDiagram::new(sites, base).expect("generated diagram is valid")
}

pub fn random_diagram(rng: &mut impl Rng, max_arrows: usize, max_cusps: usize) -> LegendrianGaussDiagram {
    let arrows = rng.gen_range(0..=max_arrows);
    let cusps = 2 * rng.gen_range(0..=max_cusps / 2);
    let signs: Vec<bool> = (0..cusps).map(|_| rng.gen()).collect();
    let mut order: Vec<usize> = (0..2 * arrows + cusps).collect();
    order.shuffle(rng);
    diagram_from(arrows, &signs, rng.gen(), &order)
}

/// Inserts `run` before site `position`.
pub fn splice(d: &LegendrianGaussDiagram, position: usize, run: &[Site]) -> LegendrianGaussDiagram {
    let mut sites = d.sites.clone();
    let at = position.min(sites.len());
    sites.splice(at..at, run.iter().copied());
    LegendrianGaussDiagram::new(sites, d.base).unwrap()
}

pub fn binomial(n: u64, k: u64) -> num_bigint::BigInt {
    if k > n {
        return 0.into();
    }
    let mut acc = num_bigint::BigInt::from(1);
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}
