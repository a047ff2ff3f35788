//! Vacuum moments M_m = ⟨0|H(f)^m|0⟩ by exhaustive Wick pairing.
//!
//! Every m-fold ordered product of normal-ordered terms is expanded into
//! complete contraction pairings (each annihilation paired with a later
//! creation; within-factor pairings are excluded by normal order).
//! A pairing identifies wavevector labels across factors; the surviving
//! labelled product is integrated under the chosen [`Measure`]:
//!
//! * `Continuum(k0)`: each independent label factors into an exact
//!   angular average times a closed-form radial integral J(p, q; k0),
//!   giving the moment as an exact polynomial in α (one power per
//!   independent label).
//! * `Discrete(modes)`: labels are summed over an explicit mode list,
//!   with V(k)² = 4πα/((2π)³k) per mode and the mode weight acting as
//!   the per-label measure, so cell-volume weights converge to the
//!   continuum values. Couplings are evaluated numerically at the term
//!   list's α and the result carried at α-exponent 0.
//!
//! Combinatorial and angular factors are accumulated as exact rationals,
//! keyed by the contraction pattern; floating point enters only at the
//! final multiplication by radial values. Accumulation order therefore
//! cannot affect the result, which is what makes N-worker runs
//! byte-identical to 1-worker runs.

use crate::angular::{angular_average, DotMonomial};
use crate::model::{LadderKind, OperatorTerm, TermList};
use crate::radint::{self, RadintError, RadialIntegralKey};
use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use thiserror::Error;

/// A discrete phonon mode: explicit wavevector plus quadrature weight.
#[derive(Debug, Clone, Copy)]
pub struct DiscreteMode {
    pub k: [f64; 3],
    pub weight: f64,
}

impl DiscreteMode {
    pub fn mag(&self) -> f64 {
        (self.k[0] * self.k[0] + self.k[1] * self.k[1] + self.k[2] * self.k[2]).sqrt()
    }
}

/// Integration measure for the mode sums.
#[derive(Debug, Clone)]
pub enum Measure {
    Continuum { k0: f64 },
    Discrete { modes: Vec<DiscreteMode> },
}

impl Measure {
    pub fn continuum(k0: f64) -> Self {
        Measure::Continuum { k0 }
    }

    pub fn discrete(modes: Vec<DiscreteMode>) -> Self {
        Measure::Discrete { modes }
    }
}

/// A moment as a polynomial in the coupling constant α.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AlphaPolynomial {
    coeffs: BTreeMap<u32, f64>,
}

impl AlphaPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Self::default();
        p.add_term(0, c);
        p
    }

    pub fn add_term(&mut self, alpha_pow: u32, c: f64) {
        if c != 0.0 {
            *self.coeffs.entry(alpha_pow).or_insert(0.0) += c;
        }
    }

    pub fn eval(&self, alpha: f64) -> f64 {
        self.coeffs.iter().map(|(&e, &c)| c * alpha.powi(e as i32)).sum()
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.keys().copied().max().unwrap_or(0)
    }

    pub fn coefficient(&self, alpha_pow: u32) -> f64 {
        self.coeffs.get(&alpha_pow).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.coeffs.iter().map(|(&e, &c)| (e, c))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in other.iter() {
            out.add_term(e, c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::default();
        for (e, c) in self.iter() {
            out.add_term(e, s * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::default();
        for (e1, c1) in self.iter() {
            for (e2, c2) in other.iter() {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::constant(1.0);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }
}

/// Moments M_0..M_{2n} for a bound computation of order n.
#[derive(Debug, Clone)]
pub struct MomentVector {
    pub order: usize,
    pub moments: Vec<AlphaPolynomial>,
}

impl MomentVector {
    /// Numeric moment sequence at a given coupling.
    pub fn eval(&self, alpha: f64) -> Vec<f64> {
        self.moments.iter().map(|m| m.eval(alpha)).collect()
    }
}

#[derive(Debug, Error)]
pub enum WickError {
    #[error("combinatorial budget exceeded after {attempted} pairing branches")]
    BudgetExceeded { attempted: u64 },
    #[error("term list not usable under this measure: {0}")]
    MeasureUnsupported(String),
    #[error("invalid term list: {0}")]
    InvalidTerms(String),
    #[error("truncated Fock basis of dimension {dim} exceeds cap {cap}")]
    FockResource { dim: usize, cap: usize },
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error(transparent)]
    Radint(#[from] RadintError),
}

/// Engine limits. The default branch budget keeps worst-case desk runs
/// in minutes; raise it for deeper moments.
#[derive(Debug, Clone, Copy)]
pub struct EngineConfig {
    pub branch_budget: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { branch_budget: 100_000_000 }
    }
}

// ---------------------------------------------------------------------
// contraction patterns
// ---------------------------------------------------------------------

/// Factors accumulated on one independent (merged) label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
struct PatternRoot {
    k_pow: i32,
    kk2_pow: i32,
    den_pow: u32,
    v_pow: u32,
    p_dot: u32,
}

/// The measure-independent shape of one Wick contribution.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Pattern {
    roots: Vec<PatternRoot>,
    /// (a, b, exponent) with a < b, indices into `roots`, sorted.
    edges: Vec<(u8, u8, u32)>,
    scalar_p_pow: u32,
}

struct UnionFind {
    parent: Vec<u16>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n as u16).collect() }
    }
    fn find(&mut self, x: u16) -> u16 {
        let mut r = x;
        while self.parent[r as usize] != r {
            r = self.parent[r as usize];
        }
        let mut c = x;
        while self.parent[c as usize] != r {
            let next = self.parent[c as usize];
            self.parent[c as usize] = r;
            c = next;
        }
        r
    }
    fn union(&mut self, a: u16, b: u16) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[rb as usize] = ra;
        }
    }
}

/// One ladder operator inside an m-fold product.
#[derive(Clone, Copy)]
struct ProductOp {
    global_label: u16,
    create: bool,
}

struct TupleContext<'a> {
    terms: &'a [OperatorTerm],
    tuple: Vec<u8>,
    label_offsets: Vec<u16>,
    n_labels: usize,
    ops: Vec<ProductOp>,
    annih: Vec<u16>,
    crea: Vec<u16>,
}

impl<'a> TupleContext<'a> {
    fn build(terms: &'a [OperatorTerm], tuple: &[u8]) -> Self {
        let mut label_offsets = Vec::with_capacity(tuple.len());
        let mut n_labels = 0usize;
        let mut ops = Vec::new();
        for &ti in tuple {
            let t = &terms[ti as usize];
            label_offsets.push(n_labels as u16);
            for &(l, kind) in &t.ladder {
                ops.push(ProductOp {
                    global_label: n_labels as u16 + l as u16,
                    create: kind == LadderKind::Create,
                });
            }
            n_labels += t.n_labels();
        }
        let annih: Vec<u16> = ops
            .iter()
            .enumerate()
            .filter(|(_, o)| !o.create)
            .map(|(i, _)| i as u16)
            .collect();
        let crea: Vec<u16> = ops
            .iter()
            .enumerate()
            .filter(|(_, o)| o.create)
            .map(|(i, _)| i as u16)
            .collect();
        Self { terms, tuple: tuple.to_vec(), label_offsets, n_labels, ops, annih, crea }
    }

    fn coeff_product(&self) -> BigRational {
        let mut c = BigRational::one();
        for &ti in &self.tuple {
            c *= &self.terms[ti as usize].coeff;
        }
        c
    }

    /// Merge labels along the pairing and collect the contribution shape.
    fn pattern(&self, matched: &[u16]) -> Pattern {
        let mut uf = UnionFind::new(self.n_labels);
        for (ci, &ai) in matched.iter().enumerate() {
            let a = self.ops[ai as usize].global_label;
            let c = self.ops[self.crea[ci] as usize].global_label;
            uf.union(a, c);
        }
        let mut factors: Vec<PatternRoot> = vec![PatternRoot::default(); self.n_labels];
        let mut edges: HashMap<(u16, u16), u32> = HashMap::new();
        let mut scalar_p_pow = 0u32;
        for (slot, &ti) in self.tuple.iter().enumerate() {
            let t = &self.terms[ti as usize];
            let off = self.label_offsets[slot];
            scalar_p_pow += t.scalar_p_pow;
            for (l, f) in t.radial.iter().enumerate() {
                let r = uf.find(off + l as u16) as usize;
                factors[r].k_pow += f.k_pow;
                factors[r].kk2_pow += f.kk2_pow;
                factors[r].den_pow += f.den_pow;
                factors[r].v_pow += f.v_pow;
            }
            for &(a, b) in &t.dots {
                let ra = uf.find(off + a as u16);
                let rb = uf.find(off + b as u16);
                if ra == rb {
                    factors[ra as usize].k_pow += 2;
                } else {
                    let key = if ra < rb { (ra, rb) } else { (rb, ra) };
                    *edges.entry(key).or_insert(0) += 1;
                }
            }
            for &l in &t.p_dots {
                let r = uf.find(off + l as u16) as usize;
                factors[r].p_dot += 1;
            }
        }
        // compact to live roots, in a deterministic shape-driven order
        let mut live: Vec<u16> = (0..self.n_labels as u16)
            .filter(|&l| uf.find(l) == l)
            .collect();
        live.sort_by_key(|&r| {
            let mut inc: Vec<u32> = edges
                .iter()
                .filter(|(&(a, b), _)| a == r || b == r)
                .map(|(_, &e)| e)
                .collect();
            inc.sort_unstable();
            (factors[r as usize], inc, r)
        });
        let remap: HashMap<u16, u8> =
            live.iter().enumerate().map(|(i, &r)| (r, i as u8)).collect();
        let roots: Vec<PatternRoot> = live.iter().map(|&r| factors[r as usize]).collect();
        let mut edge_list: Vec<(u8, u8, u32)> = edges
            .into_iter()
            .map(|((a, b), e)| {
                let (ra, rb) = (remap[&a], remap[&b]);
                if ra < rb { (ra, rb, e) } else { (rb, ra, e) }
            })
            .collect();
        edge_list.sort_unstable();
        Pattern { roots, edges: edge_list, scalar_p_pow }
    }
}

/// Enumerate complete pairings: process creations in position order, each
/// choosing an unmatched annihilation at an earlier position.
fn enumerate_pairings(
    ctx: &TupleContext,
    branch_counter: &mut u64,
    budget_left: u64,
    mut on_pairing: impl FnMut(&[u16]),
) -> bool {
    let n = ctx.crea.len();
    if n != ctx.annih.len() {
        return true;
    }
    let mut matched: Vec<u16> = vec![u16::MAX; n];
    let mut used: Vec<bool> = vec![false; ctx.annih.len()];
    fn rec(
        ctx: &TupleContext,
        ci: usize,
        matched: &mut Vec<u16>,
        used: &mut Vec<bool>,
        branch_counter: &mut u64,
        budget_left: u64,
        on_pairing: &mut impl FnMut(&[u16]),
    ) -> bool {
        if ci == ctx.crea.len() {
            on_pairing(matched);
            return true;
        }
        let cpos = ctx.crea[ci];
        for (ai, &apos) in ctx.annih.iter().enumerate() {
            if apos > cpos {
                break; // annihilations are position-sorted
            }
            if used[ai] {
                continue;
            }
            *branch_counter += 1;
            if *branch_counter > budget_left {
                return false;
            }
            used[ai] = true;
            matched[ci] = apos;
            let ok = rec(ctx, ci + 1, matched, used, branch_counter, budget_left, on_pairing);
            used[ai] = false;
            if !ok {
                return false;
            }
        }
        true
    }
    rec(ctx, 0, &mut matched, &mut used, branch_counter, budget_left, &mut on_pairing)
}

// ---------------------------------------------------------------------
// product enumeration
// ---------------------------------------------------------------------

struct TermMeta {
    n_crea: i32,
    n_annih: i32,
}

fn term_meta(terms: &[OperatorTerm]) -> Vec<TermMeta> {
    terms
        .iter()
        .map(|t| TermMeta {
            n_crea: t.ladder.iter().filter(|(_, k)| *k == LadderKind::Create).count() as i32,
            n_annih: t.ladder.iter().filter(|(_, k)| *k == LadderKind::Annihilate).count() as i32,
        })
        .collect()
}

/// Depth-first enumeration of ordered m-tuples with balance pruning:
/// factor 0 must be creation-free, the last factor annihilation-free, a
/// factor's creations need earlier annihilations available, and the
/// creation/annihilation totals must balance exactly.
fn for_each_tuple(meta: &[TermMeta], m: usize, mut f: impl FnMut(&[u8])) {
    let t = meta.len();
    if m == 0 || t == 0 {
        return;
    }
    let max_delta = meta.iter().map(|x| x.n_annih - x.n_crea).max().unwrap_or(0);
    let min_delta = meta.iter().map(|x| x.n_annih - x.n_crea).min().unwrap_or(0);
    let mut tuple: Vec<u8> = Vec::with_capacity(m);
    fn rec(
        meta: &[TermMeta],
        m: usize,
        tuple: &mut Vec<u8>,
        annih_before: i32, // unconsumed annihilations so far
        max_delta: i32,
        min_delta: i32,
        f: &mut impl FnMut(&[u8]),
    ) {
        let depth = tuple.len();
        if depth == m {
            if annih_before == 0 {
                f(tuple);
            }
            return;
        }
        let remaining = (m - depth - 1) as i32;
        for ti in 0..meta.len() as u8 {
            let x = &meta[ti as usize];
            if depth == 0 && x.n_crea > 0 {
                continue; // leading creations can never pair
            }
            if depth == m - 1 && x.n_annih > 0 {
                continue; // trailing annihilations can never pair
            }
            if x.n_crea > annih_before {
                continue; // creations need earlier annihilations
            }
            let balance = annih_before - x.n_crea + x.n_annih;
            // remaining factors change the balance within [min, max] each
            if balance + remaining * max_delta < 0 || balance + remaining * min_delta > 0 {
                continue;
            }
            tuple.push(ti);
            rec(meta, m, tuple, balance, max_delta, min_delta, f);
            tuple.pop();
        }
    }
    rec(meta, m, &mut tuple, 0, max_delta, min_delta, &mut f);
}

// ---------------------------------------------------------------------
// measure evaluation
// ---------------------------------------------------------------------

fn p_mag_of(p: &[f64; 3]) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

/// Continuum value of one pattern, as (α exponent, numeric coefficient).
fn continuum_value(
    pattern: &Pattern,
    weight: &BigRational,
    k0: f64,
    p: &[f64; 3],
) -> Result<Option<(u32, f64)>, WickError> {
    // angular factor first: patterns that vanish by isotropy never touch
    // the radial bookkeeping (their volume counting may be unbalanced)
    let mut mono = DotMonomial::new();
    for &(a, b, e) in &pattern.edges {
        mono.mul_pair(a as u16, b as u16, e);
    }
    for (i, r) in pattern.roots.iter().enumerate() {
        mono.mul_external(i as u16, r.p_dot);
    }
    let ang = angular_average(&mono);
    if ang.is_zero() {
        return Ok(None);
    }
    let mut alpha_pow = 0u32;
    let mut value = (weight.clone() * ang).to_f64().ok_or_else(|| {
        WickError::Internal("rational coefficient does not fit in f64".into())
    })?;
    let pm = p_mag_of(p);
    let total_p_pow = pattern.scalar_p_pow + pattern.roots.iter().map(|r| r.p_dot).sum::<u32>();
    if total_p_pow > 0 {
        value *= pm.powi(total_p_pow as i32);
    }
    let mut volume_balance: i64 = 0;
    for (i, r) in pattern.roots.iter().enumerate() {
        if r.den_pow != 0 {
            return Err(WickError::MeasureUnsupported(
                "shifted f denominators cannot be reduced to the J family; \
                 use the simple f choice for continuum moments"
                    .into(),
            ));
        }
        if r.v_pow % 2 != 0 {
            return Err(WickError::Internal(format!(
                "odd coupling power {} on an isotropically surviving label",
                r.v_pow
            )));
        }
        let n = r.v_pow / 2;
        volume_balance += 1 - n as i64;
        alpha_pow += n;
        // each (k·m) factor splits into magnitudes (radial) times the
        // unit-vector dot (angular); count this root's dot incidences
        let edge_pow: u32 = pattern
            .edges
            .iter()
            .map(|&(a, b, e)| {
                (if a as usize == i { e } else { 0 }) + (if b as usize == i { e } else { 0 })
            })
            .sum();
        // per-label prefactor (4π)^n/(2π²) and radial J(p, q)
        value *= (4.0 * std::f64::consts::PI).powi(n as i32)
            / (2.0 * std::f64::consts::PI * std::f64::consts::PI);
        let p_base = 2 + r.k_pow + edge_pow as i32 + r.p_dot as i32 - n as i32;
        value *= radial_power_value(p_base, r.kk2_pow, k0)?;
    }
    if volume_balance != 0 {
        return Err(WickError::Internal(format!(
            "volume-unbalanced contribution survived angular averaging: {pattern:?}"
        )));
    }
    Ok(Some((alpha_pow, value)))
}

/// ∫₀^{k0} k^p (k+k²)^{kk2} dk, expanding positive (k+k²) powers into the
/// J family.
fn radial_power_value(p: i32, kk2: i32, k0: f64) -> Result<f64, WickError> {
    if kk2 <= 0 {
        let q = (-kk2) as u32;
        if p < 0 {
            return Err(WickError::Internal(format!("negative radial power k^{p}")));
        }
        return Ok(radint::radial_integral(RadialIntegralKey::new(p as u32, q, k0))?);
    }
    // (k+k²)^r = Σ_i C(r,i) k^{r+i}
    let r = kk2 as u32;
    let mut acc = 0.0;
    let mut binom = 1.0f64;
    for i in 0..=r {
        acc += binom * radial_power_value(p + (r + i) as i32, 0, k0)?;
        binom *= f64::from(r - i) / f64::from(i + 1);
    }
    Ok(acc)
}

/// Discrete-measure value of one pattern: explicit sums of every root
/// over the mode list.
fn discrete_value(
    pattern: &Pattern,
    weight: &BigRational,
    modes: &[DiscreteMode],
    list: &TermList,
) -> Result<(u32, f64), WickError> {
    let nroots = pattern.roots.len();
    let pm = list.p_mag();
    let base = weight
        .to_f64()
        .ok_or_else(|| WickError::Internal("rational coefficient does not fit in f64".into()))?
        * pm.powi(pattern.scalar_p_pow as i32);
    if nroots == 0 {
        return Ok((0, base));
    }
    let nm = modes.len();
    let mut total = 0.0f64;
    let mut assign = vec![0usize; nroots];
    loop {
        let mut v = 1.0f64;
        for (ri, r) in pattern.roots.iter().enumerate() {
            v *= discrete_root_factor(r, &modes[assign[ri]], list);
            if v == 0.0 {
                break;
            }
        }
        if v != 0.0 {
            for &(a, b, e) in &pattern.edges {
                let ka = modes[assign[a as usize]].k;
                let kb = modes[assign[b as usize]].k;
                let dot = ka[0] * kb[0] + ka[1] * kb[1] + ka[2] * kb[2];
                v *= dot.powi(e as i32);
            }
            total += v;
        }
        // next assignment, lexicographic
        let mut i = 0;
        loop {
            if i == nroots {
                return Ok((0, base * total));
            }
            assign[i] += 1;
            if assign[i] < nm {
                break;
            }
            assign[i] = 0;
            i += 1;
        }
    }
}

fn discrete_root_factor(r: &PatternRoot, mode: &DiscreteMode, list: &TermList) -> f64 {
    let k = mode.mag();
    if k <= 0.0 {
        return 0.0;
    }
    let kk2 = k + k * k;
    let mut v = mode.weight * k.powi(r.k_pow) * kk2.powi(r.kk2_pow);
    if r.v_pow > 0 {
        let v2 = 4.0 * std::f64::consts::PI * list.alpha
            / ((2.0 * std::f64::consts::PI).powi(3) * k);
        v *= v2.powf(0.5 * f64::from(r.v_pow));
    }
    if r.den_pow > 0 {
        let u = if list.p_mag() > 0.0 {
            (mode.k[0] * list.p[0] + mode.k[1] * list.p[1] + mode.k[2] * list.p[2])
                / (k * list.p_mag())
        } else {
            0.0
        };
        v /= list.denominator(k, u).powi(r.den_pow as i32);
    }
    if r.p_dot > 0 {
        let pk = mode.k[0] * list.p[0] + mode.k[1] * list.p[1] + mode.k[2] * list.p[2];
        v *= pk.powi(r.p_dot as i32);
    }
    v
}

// ---------------------------------------------------------------------
// the engine
// ---------------------------------------------------------------------

fn validate_terms(terms: &TermList) -> Result<(), WickError> {
    if !terms.is_normal_ordered() {
        return Err(WickError::InvalidTerms(
            "ladder strings must be normal ordered with declared labels".into(),
        ));
    }
    if !terms.is_hermitian() {
        return Err(WickError::InvalidTerms("term list is not Hermitian".into()));
    }
    Ok(())
}

/// ⟨0|H^m|0⟩ under the measure, with the default combinatorial budget.
pub fn vacuum_moment(
    terms: &TermList,
    measure: &Measure,
    m: usize,
) -> Result<AlphaPolynomial, WickError> {
    vacuum_moment_cfg(terms, measure, m, &EngineConfig::default())
}

pub fn vacuum_moment_cfg(
    terms: &TermList,
    measure: &Measure,
    m: usize,
    cfg: &EngineConfig,
) -> Result<AlphaPolynomial, WickError> {
    validate_terms(terms)?;
    let patterns = collect_patterns(&terms.terms, m, cfg)?;
    evaluate_patterns(&patterns, terms, measure)
}

/// Exact-rational pattern accumulation, parallel over leading factor
/// pairs. The reduction is a map merge of exact rationals, so worker
/// count and scheduling cannot change the result.
fn collect_patterns(
    terms: &[OperatorTerm],
    m: usize,
    cfg: &EngineConfig,
) -> Result<Vec<(Pattern, BigRational)>, WickError> {
    let mut acc: HashMap<Pattern, BigRational> = HashMap::new();
    if m == 0 {
        let empty = Pattern { roots: vec![], edges: vec![], scalar_p_pow: 0 };
        acc.insert(empty, BigRational::one());
        return Ok(sorted(acc));
    }
    let meta = term_meta(terms);
    let branches = AtomicU64::new(0);
    let exceeded = AtomicBool::new(false);

    // split the tuple space on the first factor for parallelism
    let heads: Vec<u8> = (0..terms.len() as u8)
        .filter(|&ti| meta[ti as usize].n_crea == 0 || m == 1)
        .collect();
    let maps: Vec<HashMap<Pattern, BigRational>> = heads
        .par_iter()
        .map(|&head| {
            let mut local: HashMap<Pattern, BigRational> = HashMap::new();
            // enumerate tuples with this head fixed
            let mut go = |tuple: &[u8]| -> bool {
                if exceeded.load(Ordering::Relaxed) {
                    return false;
                }
                let ctx = TupleContext::build(terms, tuple);
                let coeff = ctx.coeff_product();
                let mut counts: Vec<(Pattern, u64)> = Vec::new();
                let budget_left =
                    cfg.branch_budget.saturating_sub(branches.load(Ordering::Relaxed));
                let mut tuple_branches = 0u64;
                let complete =
                    enumerate_pairings(&ctx, &mut tuple_branches, budget_left, |matched| {
                        let pat = ctx.pattern(matched);
                        if let Some(e) = counts.iter_mut().find(|(p, _)| *p == pat) {
                            e.1 += 1;
                        } else {
                            counts.push((pat, 1));
                        }
                    });
                branches.fetch_add(tuple_branches, Ordering::Relaxed);
                if !complete {
                    exceeded.store(true, Ordering::Relaxed);
                    return false;
                }
                for (pat, count) in counts {
                    let add = &coeff * BigRational::from_u64(count).expect("count fits");
                    *local.entry(pat).or_insert_with(BigRational::zero) += add;
                }
                true
            };
            if m == 1 {
                go(&[head]);
            } else {
                // fix tuple[0] = head, enumerate the rest under the same prunes
                let max_delta = meta.iter().map(|x| x.n_annih - x.n_crea).max().unwrap_or(0);
                let min_delta = meta.iter().map(|x| x.n_annih - x.n_crea).min().unwrap_or(0);
                let mut tuple = vec![head];
                fn rec(
                    meta: &[TermMeta],
                    m: usize,
                    tuple: &mut Vec<u8>,
                    annih_before: i32,
                    max_delta: i32,
                    min_delta: i32,
                    f: &mut impl FnMut(&[u8]) -> bool,
                ) -> bool {
                    let depth = tuple.len();
                    if depth == m {
                        return annih_before != 0 || f(tuple);
                    }
                    let remaining = (m - depth - 1) as i32;
                    for ti in 0..meta.len() as u8 {
                        let x = &meta[ti as usize];
                        if depth == m - 1 && x.n_annih > 0 {
                            continue;
                        }
                        if x.n_crea > annih_before {
                            continue;
                        }
                        let balance = annih_before - x.n_crea + x.n_annih;
                        if balance + remaining * max_delta < 0
                            || balance + remaining * min_delta > 0
                        {
                            continue;
                        }
                        tuple.push(ti);
                        let ok =
                            rec(meta, m, tuple, balance, max_delta, min_delta, f);
                        tuple.pop();
                        if !ok {
                            return false;
                        }
                    }
                    true
                }
                let start_balance = meta[head as usize].n_annih - meta[head as usize].n_crea;
                if start_balance >= 0 {
                    rec(&meta, m, &mut tuple, start_balance, max_delta, min_delta, &mut go);
                }
            }
            local
        })
        .collect();

    if exceeded.load(Ordering::Relaxed) {
        return Err(WickError::BudgetExceeded { attempted: branches.load(Ordering::Relaxed) });
    }
    for map in maps {
        for (pat, c) in map {
            *acc.entry(pat).or_insert_with(BigRational::zero) += c;
        }
    }
    Ok(sorted(acc))
}

fn sorted(map: HashMap<Pattern, BigRational>) -> Vec<(Pattern, BigRational)> {
    let mut v: Vec<(Pattern, BigRational)> =
        map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    v
}

fn evaluate_patterns(
    patterns: &[(Pattern, BigRational)],
    terms: &TermList,
    measure: &Measure,
) -> Result<AlphaPolynomial, WickError> {
    let mut poly = AlphaPolynomial::zero();
    match measure {
        Measure::Continuum { k0 } => {
            for (pat, w) in patterns {
                if let Some((apow, val)) = continuum_value(pat, w, *k0, &terms.p)? {
                    poly.add_term(apow, val);
                }
            }
        }
        Measure::Discrete { modes } => {
            for (pat, w) in patterns {
                let (apow, val) = discrete_value(pat, w, modes, terms)?;
                poly.add_term(apow, val);
            }
        }
    }
    Ok(poly)
}

/// Moments 0..2n. Internally the operator part is treated centrally
/// (scalar part removed) and the raw moments reconstructed binomially —
/// raw moments at k0 = 150 differ by orders of magnitude and would
/// cancel catastrophically the other way around.
pub fn moment_vector(
    terms: &TermList,
    measure: &Measure,
    n: usize,
) -> Result<MomentVector, WickError> {
    moment_vector_cfg(terms, measure, n, &EngineConfig::default())
}

pub fn moment_vector_cfg(
    terms: &TermList,
    measure: &Measure,
    n: usize,
    cfg: &EngineConfig,
) -> Result<MomentVector, WickError> {
    if n < 1 {
        return Err(WickError::InvalidTerms("moment order n must be >= 1".into()));
    }
    validate_terms(terms)?;
    let ladder = terms.ladder_terms();
    let mut scalars = terms.clone();
    scalars.terms.retain(|t| t.ladder.is_empty());
    let c_poly = if scalars.terms.is_empty() {
        AlphaPolynomial::zero()
    } else {
        vacuum_moment_cfg(&scalars, measure, 1, cfg)?
    };
    let mut central: Vec<AlphaPolynomial> = Vec::with_capacity(2 * n + 1);
    for m in 0..=2 * n {
        central.push(vacuum_moment_cfg(&ladder, measure, m, cfg)?);
    }
    // M_m = Σ_j C(m,j) μ_j c^{m−j}
    let mut moments = Vec::with_capacity(2 * n + 1);
    for m in 0..=2 * n {
        let mut acc = AlphaPolynomial::zero();
        let mut binom = 1.0f64;
        for j in 0..=m {
            let term = central[j].mul(&c_poly.pow((m - j) as u32)).scale(binom);
            acc = acc.add(&term);
            binom *= (m - j) as f64 / (j + 1) as f64;
        }
        moments.push(acc);
    }
    Ok(MomentVector { order: n, moments })
}

/// Central moments ⟨0|(H − ⟨H⟩)^m|0⟩ for m = 0..max_m, directly from the
/// shifted term list.
pub fn central_moments(
    terms: &TermList,
    measure: &Measure,
    max_m: usize,
) -> Result<Vec<AlphaPolynomial>, WickError> {
    validate_terms(terms)?;
    let ladder = terms.ladder_terms();
    (0..=max_m)
        .map(|m| vacuum_moment(&ladder, measure, m))
        .collect()
}

/// Per-pairing audit dump: term indices, the pairing, the tuple's
/// rational coefficient and the merged radial keys, one line each.
pub fn dump_pairings(
    terms: &TermList,
    m: usize,
    out: &mut dyn std::io::Write,
) -> Result<(), WickError> {
    validate_terms(terms)?;
    let meta = term_meta(&terms.terms);
    let mut io_err: Option<std::io::Error> = None;
    for_each_tuple(&meta, m, |tuple| {
        if io_err.is_some() {
            return;
        }
        let ctx = TupleContext::build(&terms.terms, tuple);
        let coeff = ctx.coeff_product();
        let mut branches = 0u64;
        enumerate_pairings(&ctx, &mut branches, u64::MAX, |matched| {
            let pat = ctx.pattern(matched);
            let pairs: Vec<(u16, u16)> = matched
                .iter()
                .enumerate()
                .map(|(ci, &a)| (a, ctx.crea[ci]))
                .collect();
            let keys: Vec<String> = pat
                .roots
                .iter()
                .map(|r| {
                    format!(
                        "k^{}(k+k2)^{}D^{}V^{}P.{}",
                        r.k_pow, r.kk2_pow, r.den_pow, r.v_pow, r.p_dot
                    )
                })
                .collect();
            if let Err(e) = writeln!(
                out,
                "tuple={tuple:?} pairing={pairs:?} coeff={coeff} roots=[{}] edges={:?}",
                keys.join(","),
                pat.edges
            ) {
                io_err = Some(e);
            }
        });
    });
    match io_err {
        Some(e) => Err(WickError::Internal(format!("dump failed: {e}"))),
        None => Ok(()),
    }
}

// ---------------------------------------------------------------------
// brute-force oracle on a truncated Fock space
// ---------------------------------------------------------------------

const FOCK_DIM_CAP: usize = 40_000;

/// ⟨0|H^m|0⟩ by explicit matrix application on the Fock basis truncated
/// at total occupation `occupation_cap`. Each factor raises the total
/// occupation by at most two, and a product returning to the vacuum
/// after m steps never exceeds total occupation m, so `occupation_cap
/// ≥ m` makes the truncation exact. Independent of the Wick path.
pub fn fock_oracle(
    terms: &TermList,
    measure: &Measure,
    m: usize,
    occupation_cap: usize,
) -> Result<f64, WickError> {
    let modes = match measure {
        Measure::Discrete { modes } => modes,
        Measure::Continuum { .. } => {
            return Err(WickError::MeasureUnsupported(
                "the Fock oracle needs a discrete mode list".into(),
            ))
        }
    };
    if modes.len() > 4 {
        return Err(WickError::MeasureUnsupported(format!(
            "Fock oracle supports at most 4 modes, got {}",
            modes.len()
        )));
    }
    if occupation_cap < m {
        return Err(WickError::InvalidTerms(format!(
            "occupation_cap {occupation_cap} < m = {m} would truncate ⟨0|H^m|0⟩"
        )));
    }
    validate_terms(terms)?;

    // basis: occupation vectors with total ≤ cap
    let nm = modes.len();
    let mut basis: Vec<Vec<u8>> = Vec::new();
    let mut state = vec![0u8; nm];
    loop {
        if state.iter().map(|&x| x as usize).sum::<usize>() <= occupation_cap {
            basis.push(state.clone());
        }
        let mut i = 0;
        loop {
            if i == nm {
                state.clear();
                break;
            }
            state[i] += 1;
            if (state[i] as usize) <= occupation_cap {
                break;
            }
            state[i] = 0;
            i += 1;
        }
        if state.is_empty() {
            break;
        }
    }
    basis.sort();
    let dim = basis.len();
    if dim > FOCK_DIM_CAP {
        return Err(WickError::FockResource { dim, cap: FOCK_DIM_CAP });
    }
    let index: HashMap<Vec<u8>, usize> =
        basis.iter().enumerate().map(|(i, b)| (b.clone(), i)).collect();

    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for t in &terms.terms {
        let nl = t.n_labels();
        let mut assign = vec![0usize; nl];
        loop {
            let factor = term_mode_factor(t, &assign, modes, terms);
            if factor != 0.0 {
                // apply the ladder string right-to-left to every basis ket
                for (j, ket) in basis.iter().enumerate() {
                    let mut occ = ket.clone();
                    let mut amp = factor;
                    let mut alive = true;
                    for &(l, kind) in t.ladder.iter().rev() {
                        let mode = assign[l as usize];
                        match kind {
                            LadderKind::Annihilate => {
                                if occ[mode] == 0 {
                                    alive = false;
                                    break;
                                }
                                amp *= f64::from(occ[mode]).sqrt();
                                occ[mode] -= 1;
                            }
                            LadderKind::Create => {
                                amp *= f64::from(occ[mode] + 1).sqrt();
                                occ[mode] += 1;
                            }
                        }
                    }
                    if alive {
                        if let Some(&i) = index.get(&occ) {
                            h[(i, j)] += amp;
                        }
                        // states climbing past the cap are truncated; the
                        // cap precondition keeps ⟨0|H^m|0⟩ exact
                    }
                }
            }
            if nl == 0 {
                break;
            }
            let mut i = 0;
            loop {
                if i == nl {
                    assign.clear();
                    break;
                }
                assign[i] += 1;
                if assign[i] < nm {
                    break;
                }
                assign[i] = 0;
                i += 1;
            }
            if assign.is_empty() {
                break;
            }
        }
    }

    let vac = index[&vec![0u8; nm]];
    let mut v = nalgebra::DVector::<f64>::zeros(dim);
    v[vac] = 1.0;
    for _ in 0..m {
        v = &h * v;
    }
    Ok(v[vac])
}

/// Numeric value of a term's coefficient for one assignment of modes to
/// its labels (weights included).
fn term_mode_factor(
    t: &OperatorTerm,
    assign: &[usize],
    modes: &[DiscreteMode],
    list: &TermList,
) -> f64 {
    let mut v = t.coeff.to_f64().unwrap_or(f64::NAN) * list.p_mag().powi(t.scalar_p_pow as i32);
    for (l, f) in t.radial.iter().enumerate() {
        let mode = &modes[assign[l]];
        let root = PatternRoot {
            k_pow: f.k_pow,
            kk2_pow: f.kk2_pow,
            den_pow: f.den_pow,
            v_pow: f.v_pow,
            p_dot: 0,
        };
        v *= discrete_root_factor(&root, mode, list);
    }
    for &(a, b) in &t.dots {
        let ka = modes[assign[a as usize]].k;
        let kb = modes[assign[b as usize]].k;
        v *= ka[0] * kb[0] + ka[1] * kb[1] + ka[2] * kb[2];
    }
    for &l in &t.p_dots {
        let k = modes[assign[l as usize]].k;
        v *= k[0] * list.p[0] + k[1] * list.p[1] + k[2] * list.p[2];
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_hamiltonian, FChoice, ModelParams, RadialFactor};
    use num_bigint::BigInt;
    use std::f64::consts::PI;

    fn rat(x: f64) -> BigRational {
        BigRational::from_float(x).unwrap()
    }

    /// Single displaced oscillator H = ω a†a + g(a†+a) as a term list on
    /// one discrete mode of magnitude ω (the diagonal uses k_pow = 1).
    fn displaced_oscillator(g: f64) -> TermList {
        use crate::model::LadderKind::{Annihilate as A, Create as C};
        let term = |coeff: BigRational, k_pow: i32, ladder: Vec<(u8, LadderKind)>| OperatorTerm {
            coeff,
            radial: vec![RadialFactor { k_pow, ..Default::default() }],
            dots: vec![],
            p_dots: vec![],
            scalar_p_pow: 0,
            ladder,
        };
        TermList {
            terms: vec![
                term(rat(1.0), 1, vec![(0, C), (0, A)]),
                term(rat(g), 0, vec![(0, C)]),
                term(rat(g), 0, vec![(0, A)]),
            ],
            constant_offset: 0.0,
            f_choice: FChoice::Simple,
            alpha: 0.0,
            k0: 1.0,
            p: [0.0; 3],
            eta: 0.0,
        }
    }

    fn one_mode(omega: f64) -> Measure {
        Measure::discrete(vec![DiscreteMode { k: [0.0, 0.0, omega], weight: 1.0 }])
    }

    #[test]
    fn displaced_oscillator_low_moments() {
        let g = 0.37;
        let omega = 1.9;
        let terms = displaced_oscillator(g);
        let measure = one_mode(omega);
        let m1 = vacuum_moment(&terms, &measure, 1).unwrap().eval(0.0);
        let m2 = vacuum_moment(&terms, &measure, 2).unwrap().eval(0.0);
        let m3 = vacuum_moment(&terms, &measure, 3).unwrap().eval(0.0);
        assert!(m1.abs() < 1e-15);
        assert!((m2 - g * g).abs() < 1e-14, "m2 = {m2}");
        assert!((m3 - g * g * omega).abs() < 1e-14, "m3 = {m3}");
    }

    #[test]
    fn displaced_oscillator_matches_fock_oracle() {
        let terms = displaced_oscillator(0.61);
        let measure = one_mode(0.8);
        for m in 0..=6 {
            let wick = vacuum_moment(&terms, &measure, m).unwrap().eval(0.0);
            let fock = fock_oracle(&terms, &measure, m, m.max(1)).unwrap();
            assert!(
                (wick - fock).abs() <= 1e-9 * fock.abs().max(1.0),
                "m={m}: wick {wick} vs fock {fock}"
            );
        }
    }

    #[test]
    fn zeroth_moment_is_one() {
        let terms = displaced_oscillator(0.3);
        assert_eq!(vacuum_moment(&terms, &one_mode(1.0), 0).unwrap().eval(0.0), 1.0);
        let rest = build_hamiltonian(&ModelParams::rest(1.0, 5.0).unwrap(), 0.0).unwrap();
        let p = vacuum_moment(&rest, &Measure::continuum(5.0), 0).unwrap();
        assert_eq!(p.eval(3.3), 1.0);
    }

    fn f_values(k0: f64) -> (f64, f64, f64) {
        let f1 = k0.ln_1p() + 1.0 / (1.0 + k0) - 1.0;
        let f2 = k0 * k0 / 2.0 - k0 + k0.ln_1p();
        let f3 = -2.0 * k0 + k0 * k0 / 2.0 + 3.0 * k0.ln_1p() + 1.0 / (1.0 + k0) - 1.0;
        (f1, f2, f3)
    }

    #[test]
    fn first_moment_is_weak_coupling_bound() {
        for (alpha, k0) in [(0.1, 150.0), (1.0, 150.0), (5.0, 150.0), (1.0, 1.0)] {
            let h = build_hamiltonian(&ModelParams::rest(alpha, k0).unwrap(), 0.0).unwrap();
            let m1 = vacuum_moment(&h, &Measure::continuum(k0), 1).unwrap().eval(alpha);
            let ew = -(2.0 * alpha / PI) * k0.ln_1p();
            assert!(((m1 - ew) / ew).abs() < 1e-13, "M1 = {m1} vs E_W = {ew}");
        }
    }

    #[test]
    fn second_central_moment_closed_form() {
        for (alpha, k0) in [(0.5, 10.0), (1.0, 150.0), (5.0, 150.0)] {
            let h = build_hamiltonian(&ModelParams::rest(alpha, k0).unwrap(), 0.0).unwrap();
            let k2 = central_moments(&h, &Measure::continuum(k0), 2).unwrap()[2].eval(alpha);
            let (f1, _, _) = f_values(k0);
            let expect = 8.0 * alpha * alpha / (3.0 * PI * PI) * f1 * f1;
            assert!(((k2 - expect) / expect).abs() < 1e-12, "K2 = {k2} vs {expect}");
        }
    }

    #[test]
    fn third_central_moment_closed_form() {
        // Independent closed form for the third central moment, derived
        // by reducing the Wick pairings by hand and verified against
        // brute-force Fock diagonalization: the diagonal + contraction
        // middles give radial J(4,2)+J(5,2) = F2 (times F1 angular 1/3),
        // the a†a quadratic middle gives the F1³ triple.
        for (alpha, k0) in [(0.5, 10.0), (1.0, 150.0), (5.0, 150.0)] {
            let h = build_hamiltonian(&ModelParams::rest(alpha, k0).unwrap(), 0.0).unwrap();
            let k3 = central_moments(&h, &Measure::continuum(k0), 3).unwrap()[3].eval(alpha);
            let (f1, f2, _) = f_values(k0);
            let expect = 16.0 * alpha * alpha / (3.0 * PI * PI) * f1 * f2
                + 64.0 * alpha.powi(3) / (9.0 * PI.powi(3)) * f1.powi(3);
            assert!(
                ((k3 - expect) / expect).abs() < 1e-10,
                "K3 = {k3} vs closed form {expect} at alpha={alpha}, k0={k0}"
            );
        }
    }

    #[test]
    fn moment_alpha_degree_bounded() {
        let k0 = 10.0;
        let h = build_hamiltonian(&ModelParams::rest(1.0, k0).unwrap(), 0.0).unwrap();
        let mv = moment_vector(&h, &Measure::continuum(k0), 2).unwrap();
        for (m, poly) in mv.moments.iter().enumerate() {
            assert!(
                poly.degree() as usize <= m,
                "moment {m} has alpha degree {}",
                poly.degree()
            );
        }
    }

    #[test]
    fn raw_and_central_routes_agree() {
        let k0 = 5.0;
        let alpha = 0.8;
        let h = build_hamiltonian(&ModelParams::rest(alpha, k0).unwrap(), 0.0).unwrap();
        let measure = Measure::continuum(k0);
        let mv = moment_vector(&h, &measure, 2).unwrap();
        for m in 0..=4usize {
            let raw = vacuum_moment(&h, &measure, m).unwrap().eval(alpha);
            let rec = mv.moments[m].eval(alpha);
            assert!(
                ((raw - rec) / raw.abs().max(1e-300)).abs() < 1e-11,
                "m={m}: direct {raw} vs reconstructed {rec}"
            );
        }
    }

    #[test]
    fn moving_first_moment_gains_p_squared() {
        let (alpha, k0, p) = (0.7, 50.0, 0.15);
        let params = ModelParams::new(alpha, k0, [0.0, 0.0, p], FChoice::Simple).unwrap();
        let h = build_hamiltonian(&params, 0.0).unwrap();
        let m1 = vacuum_moment(&h, &Measure::continuum(k0), 1).unwrap().eval(alpha);
        let ew = -(2.0 * alpha / PI) * k0.ln_1p();
        let expect = p * p + ew;
        assert!(((m1 - expect) / expect).abs() < 1e-13, "{m1} vs {expect}");
    }

    #[test]
    fn moving_second_central_moment_gains_drag_term() {
        // the residual linear block 2(P·k)V_k/(k+k²)(a†+a) contributes
        // (8α/3π) F1 P² on top of the rest-frame K2
        let (alpha, k0, p) = (0.7, 50.0, 0.15);
        let params = ModelParams::new(alpha, k0, [0.0, 0.0, p], FChoice::Simple).unwrap();
        let h = build_hamiltonian(&params, 0.0).unwrap();
        let k2 = central_moments(&h, &Measure::continuum(k0), 2).unwrap()[2].eval(alpha);
        let (f1, _, _) = f_values(k0);
        let expect = 8.0 * alpha * alpha / (3.0 * PI * PI) * f1 * f1
            + 8.0 * alpha / (3.0 * PI) * f1 * p * p;
        assert!(((k2 - expect) / expect).abs() < 1e-12, "{k2} vs {expect}");
    }

    #[test]
    fn shifted_denominators_rejected_on_continuum() {
        let params = ModelParams::new(0.5, 20.0, [0.0, 0.0, 0.1], FChoice::PShifted).unwrap();
        let h = build_hamiltonian(&params, 0.05).unwrap();
        let err = moment_vector(&h, &Measure::continuum(20.0), 1).unwrap_err();
        assert!(matches!(err, WickError::MeasureUnsupported(_)), "{err}");
    }

    #[test]
    fn budget_exhaustion_reports_attempts() {
        let h = build_hamiltonian(&ModelParams::rest(1.0, 10.0).unwrap(), 0.0).unwrap();
        let cfg = EngineConfig { branch_budget: 50 };
        let err = vacuum_moment_cfg(&h, &Measure::continuum(10.0), 4, &cfg).unwrap_err();
        match err {
            WickError::BudgetExceeded { attempted } => assert!(attempted >= 50),
            other => panic!("expected budget error, got {other}"),
        }
    }

    #[test]
    fn non_hermitian_terms_rejected() {
        let mut terms = displaced_oscillator(0.4);
        terms.terms.pop(); // drop the annihilation half of the linear term
        assert!(matches!(
            vacuum_moment(&terms, &one_mode(1.0), 2),
            Err(WickError::InvalidTerms(_))
        ));
    }

    #[test]
    fn fock_oracle_preconditions() {
        let terms = displaced_oscillator(0.4);
        assert!(matches!(
            fock_oracle(&terms, &one_mode(1.0), 4, 2),
            Err(WickError::InvalidTerms(_))
        ));
        let five = Measure::discrete(
            (0..5)
                .map(|i| DiscreteMode { k: [0.1 * (i as f64 + 1.0), 0.0, 0.0], weight: 1.0 })
                .collect(),
        );
        assert!(matches!(
            fock_oracle(&terms, &five, 2, 4),
            Err(WickError::MeasureUnsupported(_))
        ));
        assert!(matches!(
            fock_oracle(&terms, &Measure::continuum(1.0), 2, 4),
            Err(WickError::MeasureUnsupported(_))
        ));
    }

    #[test]
    fn parallel_runs_bit_identical() {
        let k0 = 20.0;
        let h = build_hamiltonian(&ModelParams::rest(1.0, k0).unwrap(), 0.0).unwrap();
        let measure = Measure::continuum(k0);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
        for m in [2usize, 3, 4] {
            let a = single.install(|| vacuum_moment(&h, &measure, m).unwrap());
            let b = many.install(|| vacuum_moment(&h, &measure, m).unwrap());
            for ((ea, ca), (eb, cb)) in a.iter().zip(b.iter()) {
                assert_eq!(ea, eb);
                assert_eq!(ca.to_bits(), cb.to_bits(), "m={m} exp={ea}: {ca:e} vs {cb:e}");
            }
        }
    }

    #[test]
    fn pairing_dump_lists_contributions() {
        let terms = displaced_oscillator(0.5);
        let mut buf: Vec<u8> = Vec::new();
        dump_pairings(&terms, 2, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().count() >= 1, "dump empty:\n{text}");
        assert!(text.contains("tuple="), "{text}");
    }

    #[test]
    fn alpha_polynomial_arithmetic() {
        let mut a = AlphaPolynomial::zero();
        a.add_term(1, 2.0);
        a.add_term(0, 1.0);
        let b = a.mul(&a);
        assert_eq!(b.coefficient(0), 1.0);
        assert_eq!(b.coefficient(1), 4.0);
        assert_eq!(b.coefficient(2), 4.0);
        assert_eq!(b.eval(1.0), 9.0);
        assert_eq!(a.pow(3).eval(2.0), 125.0);
        let _ = BigInt::from(1); // keep num-bigint linked in tests
    }
}
