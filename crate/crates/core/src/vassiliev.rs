//! Exact formal sums of diagrams, signed resolutions of singular marks and
//! the finite-type identities built on them.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{CanonicalCode, DiagramError, LegendrianGaussDiagram, Site};
use crate::moves::{self, insert_singular_n, stabilize, MoveInstance, MoveMode};

/// Resolutions with more marks than this are refused.
pub const MAX_MARKS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VassilievError {
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("isotopy of the stabilized diagrams is not established")]
    HypothesisNotEstablished,
    #[error("need values at {needed} consecutive indices below {index}, table has {have}")]
    InsufficientBaseValues { index: i64, needed: usize, have: usize },
    #[error("table indices are not contiguous")]
    NonContiguousTable,
    #[error("{0} marks exceed the resolution limit")]
    TooManyMarks(usize),
}

/// Which resolution carries the `+` sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SignConvention {
    /// Deleting the mark is positive, the cusp quadruple negative.
    #[default]
    PlainPositive,
    /// The opposite choice; every identity picks up `(-1)^marks`.
    StabilizedPositive,
}

/// Finite integer combination of diagrams keyed by canonical code.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FormalSum {
    terms: BTreeMap<CanonicalCode, BigInt>,
}

impl FormalSum {
    pub fn new() -> FormalSum {
        FormalSum::default()
    }

    pub fn single(code: CanonicalCode) -> FormalSum {
        let mut s = FormalSum::new();
        s.add_term(code, BigInt::one());
        s
    }

    pub fn add_term(&mut self, code: CanonicalCode, coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(code);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&mut self, other: &FormalSum) {
        for (c, v) in &other.terms {
            self.add_term(c.clone(), v.clone());
        }
    }

    pub fn add_scaled(&mut self, other: &FormalSum, k: &BigInt) {
        for (c, v) in &other.terms {
            self.add_term(c.clone(), v * k);
        }
    }

    pub fn scaled(&self, k: &BigInt) -> FormalSum {
        let mut out = FormalSum::new();
        out.add_scaled(self, k);
        out
    }

    pub fn coefficient(&self, code: &CanonicalCode) -> BigInt {
        self.terms.get(code).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CanonicalCode, &BigInt)> {
        self.terms.iter()
    }

    /// Sorted `coefficient<TAB>code` lines.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for (c, v) in &self.terms {
            out.push_str(&format!("{v}\t{c}\n"));
        }
        out
    }
}

impl fmt::Display for FormalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (c, v)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(if v.is_negative() { " - " } else { " + " })?;
            } else if v.is_negative() {
                f.write_str("-")?;
            }
            write!(f, "{}[{}]", v.abs(), c)?;
        }
        Ok(())
    }
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn sign(negative: bool) -> BigInt {
    if negative {
        -BigInt::one()
    } else {
        BigInt::one()
    }
}

const QUAD: [Site; 4] = [
    Site::Cusp(crate::diagram::Sign::Pos),
    Site::Cusp(crate::diagram::Sign::Pos),
    Site::Cusp(crate::diagram::Sign::Neg),
    Site::Cusp(crate::diagram::Sign::Neg),
];

/// Resolves the marks listed in `negative` by the cusp quadruple, deleting
/// all other marks.
fn resolve_choice(d: &LegendrianGaussDiagram, negative: &dyn Fn(u32) -> bool) -> LegendrianGaussDiagram {
    let mut seen = std::collections::BTreeSet::new();
    let mut sites = Vec::with_capacity(d.sites.len() + 2 * d.mark_count());
    for s in &d.sites {
        match *s {
            Site::Mark(m) => {
                if seen.insert(m) && negative(m) {
                    sites.extend_from_slice(&QUAD);
                }
            }
            other => sites.push(other),
        }
    }
    LegendrianGaussDiagram { sites, base: d.base }
}

fn mark_ids(d: &LegendrianGaussDiagram) -> Vec<u32> {
    let mut ids: Vec<u32> =
        d.sites.iter().filter_map(|s| if let Site::Mark(m) = s { Some(*m) } else { None }).collect();
    ids.sort_unstable();
    ids.dedup();
    ids
}

pub fn resolve(d: &LegendrianGaussDiagram) -> Result<FormalSum, VassilievError> {
    resolve_with(d, SignConvention::default())
}

/// Sum of all `2^s` signed resolutions, canonicalized.
pub fn resolve_with(d: &LegendrianGaussDiagram, conv: SignConvention) -> Result<FormalSum, VassilievError> {
    d.validate()?;
    let ids = mark_ids(d);
    let s = ids.len();
    if s > MAX_MARKS {
        return Err(VassilievError::TooManyMarks(s));
    }
    let flip_all = conv == SignConvention::StabilizedPositive && s % 2 == 1;
    let partial: Vec<BTreeMap<CanonicalCode, i64>> = (0u64..1 << s)
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc, mask| {
            let neg = |m: u32| {
                let k = ids.binary_search(&m).expect("mark id");
                mask >> k & 1 == 1
            };
            let r = resolve_choice(d, &neg);
            let negatives = mask.count_ones() % 2 == 1;
            let coeff = if negatives != flip_all { -1 } else { 1 };
            *acc.entry(r.canonical_code_unchecked()).or_insert(0) += coeff;
            acc
        })
        .collect();
    let mut out = FormalSum::new();
    for map in partial {
        for (c, v) in map {
            out.add_term(c, BigInt::from(v));
        }
    }
    Ok(out)
}

/// Resolves one mark at a time in the given order, merging equal diagrams
/// after each step. Agrees with [`resolve_with`] for every order.
pub fn resolve_sequential(
    d: &LegendrianGaussDiagram,
    conv: SignConvention,
    order: &[u32],
) -> Result<FormalSum, VassilievError> {
    d.validate()?;
    let mut ids = mark_ids(d);
    let mut wanted = order.to_vec();
    wanted.sort_unstable();
    ids.sort_unstable();
    if wanted != ids {
        return Err(DiagramError::BadMarkMultiplicity(order.first().copied().unwrap_or(0)).into());
    }
    let pos_sign = match conv {
        SignConvention::PlainPositive => BigInt::one(),
        SignConvention::StabilizedPositive => -BigInt::one(),
    };
    let mut current: Vec<(LegendrianGaussDiagram, BigInt)> = vec![(d.clone(), BigInt::one())];
    for &m in order {
        let mut next: BTreeMap<Vec<Site>, (LegendrianGaussDiagram, BigInt)> = BTreeMap::new();
        for (x, c) in current {
            for negative in [false, true] {
                let y = resolve_one(&x, m, negative);
                let coeff = if negative { -&c * &pos_sign } else { &c * &pos_sign };
                let e = next.entry(y.sites.clone()).or_insert_with(|| (y, BigInt::zero()));
                e.1 += coeff;
            }
        }
        current = next.into_values().filter(|(_, c)| !c.is_zero()).collect();
    }
    let mut out = FormalSum::new();
    for (x, c) in current {
        out.add_term(x.canonical_code_unchecked(), c);
    }
    Ok(out)
}

fn resolve_one(d: &LegendrianGaussDiagram, m: u32, negative: bool) -> LegendrianGaussDiagram {
    let mut first = true;
    let mut sites = Vec::with_capacity(d.sites.len() + 2);
    for s in &d.sites {
        match *s {
            Site::Mark(id) if id == m => {
                if first && negative {
                    sites.extend_from_slice(&QUAD);
                }
                first = false;
            }
            other => sites.push(other),
        }
    }
    LegendrianGaussDiagram { sites, base: d.base }
}

/// `Σ_j (-1)^j C(z,j) [stabilize(d, j, j, position)]`.
pub fn binomial_expansion(d: &LegendrianGaussDiagram, z: usize, position: usize) -> Result<FormalSum, VassilievError> {
    let mut out = FormalSum::new();
    for j in 0..=z {
        let code = stabilize(d, j, j, position)?.canonical_code_unchecked();
        out.add_term(code, sign(j % 2 == 1) * binomial(z as u64, j as u64));
    }
    Ok(out)
}

/// Resolving `z` marks placed at one point equals the binomial expansion.
pub fn expansion_identity_check(d: &LegendrianGaussDiagram, z: usize) -> Result<bool, VassilievError> {
    expansion_identity_check_with(d, z, 0, SignConvention::default())
}

pub fn expansion_identity_check_with(
    d: &LegendrianGaussDiagram,
    z: usize,
    position: usize,
    conv: SignConvention,
) -> Result<bool, VassilievError> {
    if d.is_singular() {
        return Err(DiagramError::SingularNotAllowed.into());
    }
    let kz = insert_singular_n(d, position, z)?;
    let lhs = resolve_with(&kz, conv)?;
    let mut rhs = binomial_expansion(d, z, position)?;
    if conv == SignConvention::StabilizedPositive && z % 2 == 1 {
        rhs = rhs.scaled(&-BigInt::one());
    }
    Ok(lhs == rhs)
}

/// `Σ_{k=⌈i/(z+1)⌉}^{p} (-1)^{k+1} C(p,k) C(k(z+1), i)`.
pub fn combo_lemma_sum(p: u64, z: u64, i: u64) -> BigInt {
    let lo = Integer::div_ceil(&i, &(z + 1));
    let mut acc = BigInt::zero();
    for k in lo..=p {
        acc += sign(k % 2 == 0) * binomial(p, k) * binomial(k * (z + 1), i);
    }
    acc
}

/// The sum vanishes for every `0 <= i < p`.
pub fn combo_lemma_check(p: u64, z: u64) -> bool {
    (0..p).all(|i| combo_lemma_sum(p, z, i).is_zero())
}

/// Coefficient of `K^{j,j}` after expanding `Σ_k (-1)^k C(p,k) K^{k(z+1)}`.
pub fn chain_coefficient(p: u64, z: u64, j: u64) -> BigInt {
    let mut acc = BigInt::zero();
    for k in 0..=p {
        acc += sign((k + j) % 2 == 1) * binomial(p, k) * binomial(k * (z + 1), j);
    }
    acc
}

/// How the isotopy between the `(p,p)`-stabilizations is established.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Hypothesis {
    CodeEquality,
    /// Isotopy-mode path from `stabilize(dK, p, p, 0)` to
    /// `stabilize(dL, p, p, 0)`, in the replay convention of
    /// [`moves::replay_path`].
    Witness(Vec<MoveInstance>),
}

/// Per-step outcome of the mechanized proof chain.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ChainReport {
    pub expansion_matches: bool,
    pub low_coefficients_vanish: bool,
    pub substitution_matches: bool,
}

impl ChainReport {
    pub fn ok(&self) -> bool {
        self.expansion_matches && self.low_coefficients_vanish && self.substitution_matches
    }
}

fn chain_expansion(d: &LegendrianGaussDiagram, p: u64, z: u64) -> Result<FormalSum, VassilievError> {
    let mut s1 = FormalSum::new();
    for k in 0..=p {
        let kd = insert_singular_n(d, 0, (k * (z + 1)) as usize)?;
        s1.add_scaled(&resolve(&kd)?, &(sign(k % 2 == 1) * binomial(p, k)));
    }
    Ok(s1)
}

fn grouped(d: &LegendrianGaussDiagram, p: u64, z: u64, from: u64) -> Result<FormalSum, VassilievError> {
    let mut out = FormalSum::new();
    for j in from..=p * (z + 1) {
        let code = stabilize(d, j as usize, j as usize, 0)?.canonical_code_unchecked();
        out.add_term(code, chain_coefficient(p, z, j));
    }
    Ok(out)
}

/// Mechanizes the chain taking `x(K)` to `x(L)`: expand by resolutions,
/// regroup by stabilizations, drop the vanishing low terms, substitute
/// `K^{j,j} -> L^{j,j}` for `j >= p`, and recollapse to the expansion of `L`.
pub fn theorem_chain_check(
    dk: &LegendrianGaussDiagram,
    dl: &LegendrianGaussDiagram,
    p: u64,
    z: u64,
) -> Result<bool, VassilievError> {
    Ok(theorem_chain_report(dk, dl, p, z, &Hypothesis::CodeEquality)?.ok())
}

pub fn theorem_chain_report(
    dk: &LegendrianGaussDiagram,
    dl: &LegendrianGaussDiagram,
    p: u64,
    z: u64,
    hypothesis: &Hypothesis,
) -> Result<ChainReport, VassilievError> {
    for d in [dk, dl] {
        d.validate()?;
        if d.is_singular() {
            return Err(DiagramError::SingularNotAllowed.into());
        }
    }
    if p * (z + 1) > MAX_MARKS as u64 {
        return Err(VassilievError::TooManyMarks((p * (z + 1)) as usize));
    }
    let kp = stabilize(dk, p as usize, p as usize, 0)?;
    let lp = stabilize(dl, p as usize, p as usize, 0)?;
    let established = match hypothesis {
        Hypothesis::CodeEquality => kp.canonical_code_unchecked() == lp.canonical_code_unchecked(),
        Hypothesis::Witness(path) => moves::replay_path(&kp, path, MoveMode::LegendrianIsotopy)
            .map(|end| end.canonical_code_unchecked() == lp.canonical_code_unchecked())
            .unwrap_or(false),
    };
    if !established {
        return Err(VassilievError::HypothesisNotEstablished);
    }
    let mut report = ChainReport::default();
    let s1 = chain_expansion(dk, p, z)?;
    report.expansion_matches = s1 == grouped(dk, p, z, 0)?;
    report.low_coefficients_vanish = (0..p).all(|j| chain_coefficient(p, z, j).is_zero());
    // K^{j,j} and L^{j,j} agree for j >= p: the substituted sum must be L's expansion
    let substituted = grouped(dl, p, z, p)?;
    let target = chain_expansion(dl, p, z)?;
    report.substitution_matches = substituted == target && grouped(dk, p, z, p)? == s1;
    Ok(report)
}

/// Values of an invariant on the classes `K^{2j}` for consecutive `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantTable {
    pub values: BTreeMap<i64, BigInt>,
    pub order: usize,
}

impl InvariantTable {
    pub fn new(start: i64, values: Vec<BigInt>, order: usize) -> InvariantTable {
        let values = values.into_iter().enumerate().map(|(i, v)| (start + i as i64, v)).collect();
        InvariantTable { values, order }
    }

    fn check_contiguous(&self) -> Result<(), VassilievError> {
        let keys: Vec<i64> = self.values.keys().copied().collect();
        if keys.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(VassilievError::NonContiguousTable);
        }
        Ok(())
    }
}

/// `ψ(l) = Σ_{i=1}^{n+1} (-1)^{i+1} C(n+1, i) ψ(l - i)`, extending the table
/// upward; intermediate values are memoized into `t`.
pub fn psi_extend(t: &mut InvariantTable, l: i64) -> Result<BigInt, VassilievError> {
    t.check_contiguous()?;
    if let Some(v) = t.values.get(&l) {
        return Ok(v.clone());
    }
    let n1 = t.order + 1;
    let (Some((&lo, _)), Some((&hi, _))) = (t.values.first_key_value(), t.values.last_key_value()) else {
        return Err(VassilievError::InsufficientBaseValues { index: l, needed: n1, have: 0 });
    };
    let have = (hi - lo + 1) as usize;
    if l < lo || have < n1 {
        return Err(VassilievError::InsufficientBaseValues { index: l, needed: n1, have });
    }
    let coeffs: Vec<BigInt> = (1..=n1).map(|i| sign(i % 2 == 0) * binomial(n1 as u64, i as u64)).collect();
    for m in hi + 1..=l {
        let mut acc = BigInt::zero();
        for (i, c) in coeffs.iter().enumerate() {
            acc += c * &t.values[&(m - 1 - i as i64)];
        }
        t.values.insert(m, acc);
    }
    Ok(t.values[&l].clone())
}

/// `Σ_{i=0}^{n+1} (-1)^i C(n+1, i) ψ(l - i)`.
pub fn finite_difference(t: &InvariantTable, l: i64) -> Option<BigInt> {
    let n1 = t.order + 1;
    let mut acc = BigInt::zero();
    for i in 0..=n1 {
        let v = t.values.get(&(l - i as i64))?;
        acc += sign(i % 2 == 1) * binomial(n1 as u64, i as u64) * v;
    }
    Some(acc)
}
