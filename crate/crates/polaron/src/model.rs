//! Physical parameters and the transformed polaron Hamiltonian H(f),
//! represented as an explicit list of normal-ordered operator terms.
//!
//! Units are dimensionless throughout: energies in 2ms², lengths in
//! ħ/2ms, wave vectors in 2ms/ħ. The crystal volume never appears: all
//! mode sums are carried in the continuum measure Σ_k → (2π)⁻³∫d³k with
//! the coupling V_k² = 4πα/k absorbed into per-label radial factors, so
//! a factor V_k is tracked purely as an exponent.
//!
//! The displacement function f_k comes in three flavours:
//! `Simple`  f_k = −V_k/(k+k²),
//! `PShifted` f_k = −V_k/[k − 2k·P(1−η) + k²],
//! `LinearEliminating` f_k = −[V_k + 2η k·P]/[k − 2k·P + k²],
//! the last of which cancels every term linear in the Bose operators
//! (the cancellation is exact at the monomial level and performed at
//! construction time, so no length-1 ladder string survives).

use crate::radint::{self, RadialIntegralKey};
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

/// Raw material constants in any consistent unit system.
#[derive(Debug, Clone, Copy)]
pub struct MaterialConstants {
    pub electron_charge: f64,
    /// ⟨e²_ijk⟩, the averaged squared piezoelectric tensor.
    pub piezo_tensor_avg: f64,
    pub dielectric: f64,
    pub elastic_avg: f64,
    pub sound_speed: f64,
    pub electron_mass: f64,
    pub hbar: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("material constant {0} must be strictly positive, got {1}")]
    NonPositiveConstant(&'static str, f64),
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
}

/// Dimensionless coupling α = e²⟨e²_ijk⟩/(2εCsħ).
pub fn coupling_from_material(mc: &MaterialConstants) -> Result<f64, ModelError> {
    let fields = [
        ("electron_charge", mc.electron_charge),
        ("piezo_tensor_avg", mc.piezo_tensor_avg),
        ("dielectric", mc.dielectric),
        ("elastic_avg", mc.elastic_avg),
        ("sound_speed", mc.sound_speed),
        ("electron_mass", mc.electron_mass),
        ("hbar", mc.hbar),
    ];
    for (name, v) in fields {
        if !(v > 0.0) || !v.is_finite() {
            return Err(ModelError::NonPositiveConstant(name, v));
        }
    }
    Ok(0.5 * mc.electron_charge * mc.electron_charge * mc.piezo_tensor_avg
        / (mc.dielectric * mc.elastic_avg * mc.sound_speed * mc.hbar))
}

/// Which displacement function f_k the Hamiltonian is built around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FChoice {
    Simple,
    PShifted,
    LinearEliminating,
}

impl FChoice {
    pub fn as_str(&self) -> &'static str {
        match self {
            FChoice::Simple => "simple",
            FChoice::PShifted => "pshifted",
            FChoice::LinearEliminating => "linear-eliminating",
        }
    }
}

/// The single input record used everywhere.
#[derive(Debug, Clone, Copy)]
pub struct ModelParams {
    pub alpha: f64,
    pub k0: f64,
    /// Total polaron momentum, dimensionless units.
    pub p: [f64; 3],
    pub f_choice: FChoice,
}

impl ModelParams {
    pub fn new(alpha: f64, k0: f64, p: [f64; 3], f_choice: FChoice) -> Result<Self, ModelError> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(ModelError::InvalidParams(format!("alpha = {alpha}")));
        }
        if !(k0 > 0.0) || !k0.is_finite() {
            return Err(ModelError::InvalidParams(format!("k0 = {k0}")));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(ModelError::InvalidParams(format!("P = {p:?}")));
        }
        Ok(Self { alpha, k0, p, f_choice })
    }

    pub fn rest(alpha: f64, k0: f64) -> Result<Self, ModelError> {
        Self::new(alpha, k0, [0.0; 3], FChoice::Simple)
    }

    pub fn p_mag(&self) -> f64 {
        (self.p[0] * self.p[0] + self.p[1] * self.p[1] + self.p[2] * self.p[2]).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LadderKind {
    Create,
    Annihilate,
}

/// Coefficient factors attached to one wavevector label:
/// k^{k_pow} · (k+k²)^{kk2_pow} · D^{−den_pow} · V_k^{v_pow},
/// where D is the denominator of the term list's f choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RadialFactor {
    pub k_pow: i32,
    pub kk2_pow: i32,
    pub den_pow: u32,
    pub v_pow: u32,
}

/// One normal-ordered operator monomial. Labels are positional (fresh per
/// term, 0-based indices into `radial`); identification of labels across
/// terms happens only through Wick contraction.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTerm {
    /// Rational prefactor; all α content lives in the V_k exponents.
    pub coeff: BigRational,
    /// Per-label radial factors; `radial.len()` is the label count.
    pub radial: Vec<RadialFactor>,
    /// Unordered label pairs carrying a (k·m) factor (repeat for powers).
    pub dots: Vec<(u8, u8)>,
    /// Labels carrying a (P·k) factor (repeat for powers).
    pub p_dots: Vec<u8>,
    /// Global |P| power not tied to any label (the P² scalar).
    pub scalar_p_pow: u32,
    /// Normal-ordered ladder string (all creations precede annihilations).
    pub ladder: Vec<(u8, LadderKind)>,
}

impl OperatorTerm {
    pub fn n_labels(&self) -> usize {
        self.radial.len()
    }

    pub fn is_normal_ordered(&self) -> bool {
        let mut seen_annihilate = false;
        for &(_, kind) in &self.ladder {
            match kind {
                LadderKind::Annihilate => seen_annihilate = true,
                LadderKind::Create if seen_annihilate => return false,
                LadderKind::Create => {}
            }
        }
        true
    }

    fn labels_declared(&self) -> bool {
        let n = self.radial.len() as u8;
        self.ladder.iter().all(|&(l, _)| l < n)
            && self.dots.iter().all(|&(a, b)| a < n && b < n)
            && self.p_dots.iter().all(|&l| l < n)
    }

    /// Hermitian conjugate: ladder reversed with kinds flipped.
    fn conjugate(&self) -> OperatorTerm {
        let mut t = self.clone();
        t.ladder = self
            .ladder
            .iter()
            .rev()
            .map(|&(l, k)| {
                (
                    l,
                    match k {
                        LadderKind::Create => LadderKind::Annihilate,
                        LadderKind::Annihilate => LadderKind::Create,
                    },
                )
            })
            .collect();
        t
    }

    /// Shape serialization modulo label permutation (label counts are ≤ 2,
    /// so trying every permutation is cheap).
    fn canonical_shape(&self) -> String {
        let n = self.radial.len();
        let perms: Vec<Vec<usize>> = match n {
            0 | 1 => vec![(0..n).collect()],
            2 => vec![vec![0, 1], vec![1, 0]],
            _ => {
                // permutations of up to a handful of labels
                let mut ps = vec![(0..n).collect::<Vec<_>>()];
                heap_permutations(&mut (0..n).collect::<Vec<_>>(), &mut ps);
                ps
            }
        };
        perms
            .iter()
            .map(|perm| {
                let map = |l: u8| perm[l as usize] as u8;
                let mut radial: Vec<(usize, RadialFactor)> = self
                    .radial
                    .iter()
                    .enumerate()
                    .map(|(i, &f)| (perm[i], f))
                    .collect();
                radial.sort_by_key(|&(i, _)| i);
                let mut dots: Vec<(u8, u8)> = self
                    .dots
                    .iter()
                    .map(|&(a, b)| {
                        let (a, b) = (map(a), map(b));
                        if a <= b { (a, b) } else { (b, a) }
                    })
                    .collect();
                dots.sort_unstable();
                let mut p_dots: Vec<u8> = self.p_dots.iter().map(|&l| map(l)).collect();
                p_dots.sort_unstable();
                let ladder: Vec<(u8, LadderKind)> =
                    self.ladder.iter().map(|&(l, k)| (map(l), k)).collect();
                format!(
                    "{radial:?}|{dots:?}|{p_dots:?}|{}|{ladder:?}",
                    self.scalar_p_pow
                )
            })
            .min()
            .unwrap_or_default()
    }
}

fn heap_permutations(items: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    fn rec(k: usize, items: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(items.clone());
            return;
        }
        for i in 0..k {
            rec(k - 1, items, out);
            if k % 2 == 0 {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
    }
    out.clear();
    let k = items.len();
    rec(k, items, out);
}

/// The full transformed Hamiltonian: operator terms plus the scalar part.
#[derive(Debug, Clone)]
pub struct TermList {
    pub terms: Vec<OperatorTerm>,
    /// Scalar part of H(f) evaluated under the continuum measure
    /// (equals ⟨0|H(f)|0⟩, since every operator term is normal ordered).
    pub constant_offset: f64,
    pub f_choice: FChoice,
    pub alpha: f64,
    pub k0: f64,
    pub p: [f64; 3],
    pub eta: f64,
}

impl TermList {
    pub fn p_mag(&self) -> f64 {
        (self.p[0] * self.p[0] + self.p[1] * self.p[1] + self.p[2] * self.p[2]).sqrt()
    }

    /// Denominator D(k, u) of the f choice at radial magnitude k and
    /// direction cosine u against P̂.
    pub fn denominator(&self, k: f64, u: f64) -> f64 {
        let p = self.p_mag();
        match self.f_choice {
            FChoice::Simple => k + k * k,
            FChoice::PShifted => k + k * k - 2.0 * k * p * u * (1.0 - self.eta),
            FChoice::LinearEliminating => k + k * k - 2.0 * k * p * u,
        }
    }

    /// Every term's Hermitian conjugate must be present with the same
    /// coefficient.
    pub fn is_hermitian(&self) -> bool {
        let mut ledger: BTreeMap<String, BigRational> = BTreeMap::new();
        for t in &self.terms {
            *ledger.entry(t.canonical_shape()).or_insert_with(BigRational::zero) += &t.coeff;
            *ledger
                .entry(t.conjugate().canonical_shape())
                .or_insert_with(BigRational::zero) -= &t.coeff;
        }
        ledger.values().all(|c| c.is_zero())
    }

    pub fn is_normal_ordered(&self) -> bool {
        self.terms.iter().all(|t| t.is_normal_ordered() && t.labels_declared())
    }

    /// Terms with at least one ladder operator (the scalar part dropped):
    /// H(f) − ⟨0|H(f)|0⟩, the input for central-moment computation.
    pub fn ladder_terms(&self) -> TermList {
        let mut t = self.clone();
        t.terms.retain(|term| !term.ladder.is_empty());
        t.constant_offset = 0.0;
        t
    }

    pub fn has_linear_ladder_terms(&self) -> bool {
        self.terms.iter().any(|t| t.ladder.len() == 1)
    }
}

fn rat_i(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn rat_f(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite coefficient")
}

/// A monomial factor of f_k's numerator: coeff · V_k^v · (P·k)^pd.
#[derive(Clone)]
struct FNumPiece {
    coeff: BigRational,
    v: u32,
    pd: u32,
}

/// Builds the complete normal-ordered term list of H(f) for the chosen
/// f_k. `eta` is the drag parameter for the P-dependent choices (ignored
/// for `Simple`; the moving module owns the self-consistent fixed point).
pub fn build_hamiltonian(params: &ModelParams, eta: f64) -> Result<TermList, ModelError> {
    if !eta.is_finite() {
        return Err(ModelError::InvalidParams(format!("eta = {eta}")));
    }
    let p_mag = params.p_mag();
    // At P = 0 every choice degenerates to the rest-frame Hamiltonian.
    let choice = if p_mag == 0.0 { FChoice::Simple } else { params.f_choice };
    let eta = if choice == FChoice::Simple { 0.0 } else { eta };
    let isotropic = choice == FChoice::Simple;
    let moving = p_mag > 0.0;

    let f_pieces: Vec<FNumPiece> = match choice {
        FChoice::Simple | FChoice::PShifted => vec![FNumPiece { coeff: rat_i(-1), v: 1, pd: 0 }],
        FChoice::LinearEliminating => vec![
            FNumPiece { coeff: rat_i(-1), v: 1, pd: 0 },
            FNumPiece { coeff: rat_f(-2.0 * eta), v: 0, pd: 1 },
        ],
    };
    // D expanded into k-power/(P·k) monomials, for products that need the
    // denominator cleared.
    let d_monomials: Vec<(BigRational, i32, u32)> = match choice {
        FChoice::Simple => vec![(rat_i(1), 1, 0), (rat_i(1), 2, 0)],
        FChoice::PShifted => vec![
            (rat_i(1), 1, 0),
            (rat_i(1), 2, 0),
            (rat_f(-2.0 * (1.0 - eta)), 0, 1),
        ],
        FChoice::LinearEliminating => {
            vec![(rat_i(1), 1, 0), (rat_i(1), 2, 0), (rat_i(-2), 0, 1)]
        }
    };

    let mut terms: Vec<OperatorTerm> = Vec::new();
    let mut push = |t: OperatorTerm| terms.push(t);
    use LadderKind::{Annihilate as A, Create as C};

    // ---- free part: Σ k a†a and the squared phonon-momentum operator,
    // stored normal ordered (4-ladder piece plus its k² contraction) ----
    push(OperatorTerm {
        coeff: rat_i(1),
        radial: vec![RadialFactor { k_pow: 1, ..Default::default() }],
        dots: vec![],
        p_dots: vec![],
        scalar_p_pow: 0,
        ladder: vec![(0, C), (0, A)],
    });
    push(OperatorTerm {
        coeff: rat_i(1),
        radial: vec![RadialFactor::default(), RadialFactor::default()],
        dots: vec![(0, 1)],
        p_dots: vec![],
        scalar_p_pow: 0,
        ladder: vec![(0, C), (1, C), (0, A), (1, A)],
    });
    push(OperatorTerm {
        coeff: rat_i(1),
        radial: vec![RadialFactor { k_pow: 2, ..Default::default() }],
        dots: vec![],
        p_dots: vec![],
        scalar_p_pow: 0,
        ladder: vec![(0, C), (0, A)],
    });
    if moving {
        // P² scalar
        push(OperatorTerm {
            coeff: rat_i(1),
            radial: vec![],
            dots: vec![],
            p_dots: vec![],
            scalar_p_pow: 2,
            ladder: vec![],
        });
    }

    // ---- linear block, assembled over the common denominator D so that
    // exact cancellations happen at the monomial level ----
    {
        // canonical monomial (k_pow, v, pd) → coefficient
        let mut mono: BTreeMap<(i32, u32, u32), BigRational> = BTreeMap::new();
        let mut add = |k: i32, v: u32, pd: u32, c: BigRational| {
            let e = mono.entry((k, v, pd)).or_insert_with(BigRational::zero);
            *e += c;
        };
        // (k+k²) f_k
        for n in &f_pieces {
            for kp in [1, 2] {
                add(kp, n.v, n.pd, n.coeff.clone());
            }
        }
        // V_k · D/D
        for (dc, dk, dpd) in &d_monomials {
            add(*dk, 1, *dpd, dc.clone());
        }
        // −2 (P·k) f_k
        if moving {
            for n in &f_pieces {
                add(0, n.v, n.pd + 1, rat_i(-2) * &n.coeff);
            }
        }
        // 2 Σ_m (k·m) f_m² (a†+a) with Σ f²m = ηP substituted: 2η(P·k)·D/D
        if !isotropic {
            let two_eta = rat_f(2.0 * eta);
            for (dc, dk, dpd) in &d_monomials {
                add(*dk, 0, dpd + 1, &two_eta * dc);
            }
        }
        for ((k_pow, v, pd), coeff) in mono {
            if coeff.is_zero() {
                continue;
            }
            for kind in [C, A] {
                push(OperatorTerm {
                    coeff: coeff.clone(),
                    radial: vec![RadialFactor { k_pow, kk2_pow: 0, den_pow: 1, v_pow: v }],
                    dots: vec![],
                    p_dots: vec![0; pd as usize],
                    scalar_p_pow: 0,
                    ladder: vec![(0, kind)],
                });
            }
        }
    }

    // ---- quadratic f f blocks: 2(k·m) f_k f_m a†_k a_m and
    // (k·m) f_k f_m (a†a† + aa) ----
    for n0 in &f_pieces {
        for n1 in &f_pieces {
            let base = |c: i64| OperatorTerm {
                coeff: rat_i(c) * &n0.coeff * &n1.coeff,
                radial: vec![
                    RadialFactor { den_pow: 1, v_pow: n0.v, ..Default::default() },
                    RadialFactor { den_pow: 1, v_pow: n1.v, ..Default::default() },
                ],
                dots: vec![(0, 1)],
                p_dots: [vec![0u8; n0.pd as usize], vec![1u8; n1.pd as usize]].concat(),
                scalar_p_pow: 0,
                ladder: vec![],
            };
            let mut t = base(2);
            t.ladder = vec![(0, C), (1, A)];
            push(t);
            let mut t = base(1);
            t.ladder = vec![(0, C), (1, C)];
            push(t);
            let mut t = base(1);
            t.ladder = vec![(0, A), (1, A)];
            push(t);
        }
    }

    // ---- cubic blocks 2(k·m) f_k (a†_m a_m a_k + a†_k a†_m a_m) ----
    for n0 in &f_pieces {
        for ladder in [vec![(1, C), (1, A), (0, A)], vec![(0, C), (1, C), (1, A)]] {
            push(OperatorTerm {
                coeff: rat_i(2) * &n0.coeff,
                radial: vec![
                    RadialFactor { den_pow: 1, v_pow: n0.v, ..Default::default() },
                    RadialFactor::default(),
                ],
                dots: vec![(0, 1)],
                p_dots: vec![0; n0.pd as usize],
                scalar_p_pow: 0,
                ladder,
            });
        }
    }

    // ---- total-momentum coupling −2(P·k)(a† + f)(a + f) ----
    if moving {
        push(OperatorTerm {
            coeff: rat_i(-2),
            radial: vec![RadialFactor::default()],
            dots: vec![],
            p_dots: vec![0],
            scalar_p_pow: 0,
            ladder: vec![(0, C), (0, A)],
        });
        // linear pieces already merged into the linear block above
        for n0 in &f_pieces {
            for n1 in &f_pieces {
                push(OperatorTerm {
                    coeff: rat_i(-2) * &n0.coeff * &n1.coeff,
                    radial: vec![RadialFactor {
                        den_pow: 2,
                        v_pow: n0.v + n1.v,
                        ..Default::default()
                    }],
                    dots: vec![],
                    p_dots: vec![0; (1 + n0.pd + n1.pd) as usize],
                    scalar_p_pow: 0,
                    ladder: vec![],
                });
            }
        }
    }

    // ---- phonon-drag quadratic 2(k·m) f_m² a†_k a_k (vanishes for
    // isotropic f) ----
    if !isotropic {
        for n0 in &f_pieces {
            for n1 in &f_pieces {
                push(OperatorTerm {
                    coeff: rat_i(2) * &n0.coeff * &n1.coeff,
                    radial: vec![
                        RadialFactor::default(),
                        RadialFactor { den_pow: 2, v_pow: n0.v + n1.v, ..Default::default() },
                    ],
                    dots: vec![(0, 1)],
                    p_dots: vec![1; (n0.pd + n1.pd) as usize],
                    scalar_p_pow: 0,
                    ladder: vec![(0, C), (0, A)],
                });
            }
        }
        // the two quartic scalars (Σ f²k)² = η²P², one from the constant
        // part and one from the standalone f⁴ block
        push(OperatorTerm {
            coeff: rat_f(2.0 * eta * eta),
            radial: vec![],
            dots: vec![],
            p_dots: vec![],
            scalar_p_pow: 2,
            ladder: vec![],
        });
    }

    // ---- remaining scalar part: 2Σ V f + Σ(k+k²) f² ----
    for n in &f_pieces {
        push(OperatorTerm {
            coeff: rat_i(2) * &n.coeff,
            radial: vec![RadialFactor { den_pow: 1, v_pow: 1 + n.v, ..Default::default() }],
            dots: vec![],
            p_dots: vec![0; n.pd as usize],
            scalar_p_pow: 0,
            ladder: vec![],
        });
    }
    for n0 in &f_pieces {
        for n1 in &f_pieces {
            push(OperatorTerm {
                coeff: n0.coeff.clone() * &n1.coeff,
                radial: vec![RadialFactor {
                    kk2_pow: 1,
                    den_pow: 2,
                    v_pow: n0.v + n1.v,
                    ..Default::default()
                }],
                dots: vec![],
                p_dots: vec![0; (n0.pd + n1.pd) as usize],
                scalar_p_pow: 0,
                ladder: vec![],
            });
        }
    }

    // ---- fold denominators for the Simple choice, merge identical
    // shapes, drop zeros (and everything coupling-borne at α = 0) ----
    if choice == FChoice::Simple {
        for t in &mut terms {
            for f in &mut t.radial {
                f.kk2_pow -= f.den_pow as i32;
                f.den_pow = 0;
            }
        }
    }
    let mut merged: Vec<OperatorTerm> = Vec::new();
    for t in terms {
        if let Some(existing) = merged.iter_mut().find(|e| {
            e.radial == t.radial
                && e.dots == t.dots
                && e.p_dots == t.p_dots
                && e.scalar_p_pow == t.scalar_p_pow
                && e.ladder == t.ladder
        }) {
            existing.coeff += t.coeff;
        } else {
            merged.push(t);
        }
    }
    merged.retain(|t| !t.coeff.is_zero());
    if params.alpha == 0.0 {
        merged.retain(|t| t.radial.iter().all(|f| f.v_pow == 0));
    }

    let mut list = TermList {
        terms: merged,
        constant_offset: 0.0,
        f_choice: choice,
        alpha: params.alpha,
        k0: params.k0,
        p: params.p,
        eta,
    };
    debug_assert!(list.is_normal_ordered());
    list.constant_offset = scalar_part(&list);
    Ok(list)
}

/// Evaluates the scalar (empty-ladder) terms under the continuum measure:
/// Σ_k → (2π)⁻³∫d³k, V_k = √(4πα/k). Exact radial closed forms where the
/// integrand is in the J family; adaptive quadrature over k with the
/// cosθ moment in closed form otherwise.
fn scalar_part(list: &TermList) -> f64 {
    let p = list.p_mag();
    let alpha = list.alpha;
    let mut total = 0.0f64;
    for t in list.terms.iter().filter(|t| t.ladder.is_empty()) {
        let coeff = t.coeff.to_f64().expect("rational coefficient fits f64");
        let mut val = coeff * p.powi(t.scalar_p_pow as i32);
        assert!(t.radial.len() <= 1, "scalar blocks carry at most one label");
        if let Some(f) = t.radial.first() {
            let w = t.p_dots.len() as u32;
            let half_v = 0.5 * f64::from(f.v_pow);
            let pref = (4.0 * std::f64::consts::PI * alpha).powf(half_v)
                / (4.0 * std::f64::consts::PI * std::f64::consts::PI);
            let k_exp = 2.0 + f.k_pow as f64 + w as f64 - half_v;
            let value = if f.den_pow == 0 && w == 0 && f.v_pow % 2 == 0 && f.kk2_pow <= 0 {
                // pure J-family integral, exact: ∫ k^{k_exp} (k+k²)^{kk2} · 2 dk
                let q = (-f.kk2_pow) as u32;
                let pp = k_exp.round() as u32;
                2.0 * radint::radial_integral(RadialIntegralKey::new(pp, q, list.k0))
                    .expect("scalar radial integral in domain")
            } else {
                let integrand = |k: f64| {
                    if k <= 0.0 {
                        return 0.0;
                    }
                    let a = k + k * k;
                    let b = match list.f_choice {
                        FChoice::Simple => 0.0,
                        FChoice::PShifted => 2.0 * k * p * (1.0 - list.eta),
                        FChoice::LinearEliminating => 2.0 * k * p,
                    };
                    k.powf(k_exp)
                        * a.powi(f.kk2_pow)
                        * radint::cos_axis_moment(w, f.den_pow, a, b)
                };
                radint::adaptive_gk(&integrand, 0.0, list.k0, 1e-12)
                    .expect("scalar quadrature converges")
            };
            val *= pref * p.powi(w as i32) * value;
        }
        total += val;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_material() -> MaterialConstants {
        MaterialConstants {
            electron_charge: 1.0,
            piezo_tensor_avg: 1.0,
            dielectric: 1.0,
            elastic_avg: 1.0,
            sound_speed: 1.0,
            electron_mass: 1.0,
            hbar: 1.0,
        }
    }

    #[test]
    fn coupling_unit_inputs() {
        assert_eq!(coupling_from_material(&unit_material()).unwrap(), 0.5);
    }

    #[test]
    fn coupling_quadratic_in_charge() {
        let mut mc = unit_material();
        let a1 = coupling_from_material(&mc).unwrap();
        mc.electron_charge = 2.0;
        let a2 = coupling_from_material(&mc).unwrap();
        assert_eq!(a2, 4.0 * a1);
    }

    #[test]
    fn coupling_worked_example() {
        let mc = MaterialConstants {
            electron_charge: 2.0,
            piezo_tensor_avg: 3.0,
            dielectric: 2.0,
            elastic_avg: 3.0,
            sound_speed: 1.0,
            electron_mass: 1.0,
            hbar: 1.0,
        };
        assert_eq!(coupling_from_material(&mc).unwrap(), 1.0);
    }

    #[test]
    fn coupling_rejects_nonpositive() {
        let mut mc = unit_material();
        mc.dielectric = 0.0;
        assert!(coupling_from_material(&mc).is_err());
        mc.dielectric = -1.0;
        assert!(coupling_from_material(&mc).is_err());
    }

    #[test]
    fn rest_frame_has_no_linear_terms() {
        let params = ModelParams::rest(1.0, 150.0).unwrap();
        let h = build_hamiltonian(&params, 0.0).unwrap();
        assert!(!h.has_linear_ladder_terms(), "Simple choice at P=0 must cancel the linear block");
        assert!(h.is_hermitian());
        assert!(h.is_normal_ordered());
    }

    #[test]
    fn rest_frame_term_census() {
        // diagonal, 4-ladder quartic, k² contraction, a†a, a†a†, aa,
        // two cubics, one scalar
        let params = ModelParams::rest(0.7, 10.0).unwrap();
        let h = build_hamiltonian(&params, 0.0).unwrap();
        assert_eq!(h.terms.len(), 9, "{:#?}", h.terms);
        assert_eq!(h.terms.iter().filter(|t| t.ladder.is_empty()).count(), 1);
        assert_eq!(h.terms.iter().filter(|t| t.ladder.len() == 3).count(), 2);
        assert_eq!(h.terms.iter().filter(|t| t.ladder.len() == 4).count(), 1);
    }

    #[test]
    fn free_hamiltonian_at_zero_coupling() {
        let params = ModelParams::rest(0.0, 150.0).unwrap();
        let h = build_hamiltonian(&params, 0.0).unwrap();
        assert_eq!(h.terms.len(), 3, "diagonal plus expanded quartic only");
        assert!(h.terms.iter().all(|t| !t.ladder.is_empty()));
        assert_eq!(h.constant_offset, 0.0);
    }

    #[test]
    fn linear_eliminating_kills_linear_terms() {
        let params =
            ModelParams::new(0.5, 150.0, [0.0, 0.0, 0.1], FChoice::LinearEliminating).unwrap();
        let h = build_hamiltonian(&params, 0.07).unwrap();
        assert!(!h.has_linear_ladder_terms(), "{:#?}", h.terms);
        assert!(h.is_hermitian());
    }

    #[test]
    fn pshifted_keeps_linear_terms() {
        let params = ModelParams::new(0.5, 150.0, [0.0, 0.0, 0.1], FChoice::PShifted).unwrap();
        let h = build_hamiltonian(&params, 0.07).unwrap();
        assert!(h.has_linear_ladder_terms());
        assert!(h.is_hermitian());
        assert!(h.is_normal_ordered());
    }

    #[test]
    fn simple_moving_gains_only_momentum_blocks() {
        let rest = build_hamiltonian(&ModelParams::rest(1.0, 150.0).unwrap(), 0.0).unwrap();
        let params = ModelParams::new(1.0, 150.0, [0.0, 0.0, 0.2], FChoice::Simple).unwrap();
        let mov = build_hamiltonian(&params, 0.0).unwrap();
        // P² scalar, −2(P·k) a†a, −2(P·k) f² scalar, 2(P·k)V f/... linear pair
        assert_eq!(mov.terms.len(), rest.terms.len() + 5, "{:#?}", mov.terms);
        assert!(mov.is_hermitian());
    }

    #[test]
    fn rest_constant_is_llp_integral() {
        for (alpha, k0) in [(0.5f64, 10.0f64), (1.0, 150.0), (5.0, 150.0)] {
            let h = build_hamiltonian(&ModelParams::rest(alpha, k0).unwrap(), 0.0).unwrap();
            let expect = -(2.0 * alpha / PI) * k0.ln_1p();
            assert!(
                ((h.constant_offset - expect) / expect).abs() < 1e-14,
                "constant {} vs −(2α/π)ln(1+k0) = {}",
                h.constant_offset,
                expect
            );
        }
    }

    #[test]
    fn hermiticity_across_choices() {
        for choice in [FChoice::Simple, FChoice::PShifted, FChoice::LinearEliminating] {
            for p in [[0.0; 3], [0.05, -0.1, 0.02]] {
                let params = ModelParams::new(0.8, 50.0, p, choice).unwrap();
                let h = build_hamiltonian(&params, 0.03).unwrap();
                assert!(h.is_hermitian(), "{choice:?} {p:?}");
                assert!(h.is_normal_ordered());
            }
        }
    }

    #[test]
    fn p_zero_reduces_every_choice_to_rest_frame() {
        let simple = build_hamiltonian(&ModelParams::rest(1.0, 150.0).unwrap(), 0.0).unwrap();
        for choice in [FChoice::PShifted, FChoice::LinearEliminating] {
            let params = ModelParams::new(1.0, 150.0, [0.0; 3], choice).unwrap();
            let h = build_hamiltonian(&params, 0.3).unwrap();
            assert_eq!(h.terms.len(), simple.terms.len());
            assert_eq!(h.constant_offset, simple.constant_offset);
        }
    }
}
