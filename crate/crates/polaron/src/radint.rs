//! Exact evaluation of the radial integral family
//!
//!   J(p, q; k0) = ∫₀^{k0} k^p / (k + k²)^q dk = ∫₀^{k0} k^{p−q} (1 + k)^{−q} dk
//!
//! that every continuum vacuum moment reduces to, plus the adaptive
//! quadrature used as an independent oracle in tests and for the
//! shifted-denominator integrals of the moving polaron.
//!
//! Closed forms are obtained by expanding k^{p−q} = ((1+k) − 1)^{p−q} in
//! powers of (1 + k): the result is a polynomial in k0 and (1+k0)^{−1}
//! plus a ln(1+k0) term. The alternating binomial sum loses digits in
//! double precision (about five at p = 12, q = 1, k0 = 1), so the
//! rational part is accumulated exactly in `BigRational` and rounded
//! once at the end. For k0 ≤ 1/2 a plain power series in k0 converges
//! geometrically and avoids large intermediates altogether.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};
use thiserror::Error;

/// Identifies one member of the J(p, q; k0) family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialIntegralKey {
    pub p: u32,
    pub q: u32,
    pub k0: f64,
}

impl RadialIntegralKey {
    pub fn new(p: u32, q: u32, k0: f64) -> Self {
        Self { p, q, k0 }
    }

    /// Integrand k^{p−q}(1+k)^{−q}; integrable at 0 iff p − q > −1.
    pub fn integrand(&self, k: f64) -> f64 {
        k.powi(self.p as i32 - self.q as i32) * (1.0 + k).powi(-(self.q as i32))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RadintError {
    #[error("divergent radial integral: p - q = {0} <= -1")]
    Divergent(i64),
    #[error("invalid cutoff k0 = {0}; must be positive and finite")]
    BadCutoff(f64),
    #[error("quadrature did not converge: estimated error {err:.3e} after {evals} evaluations")]
    NonConvergent { err: f64, evals: usize },
}

fn cache() -> &'static RwLock<HashMap<(u32, u32, u64), f64>> {
    static CACHE: OnceLock<RwLock<HashMap<(u32, u32, u64), f64>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Closed-form value of J(p, q; k0), memoized on (p, q, k0).
pub fn radial_integral(key: RadialIntegralKey) -> Result<f64, RadintError> {
    let RadialIntegralKey { p, q, k0 } = key;
    if !(k0 > 0.0) || !k0.is_finite() {
        return Err(RadintError::BadCutoff(k0));
    }
    if (p as i64) - (q as i64) <= -1 {
        return Err(RadintError::Divergent(p as i64 - q as i64));
    }
    let ck = (p, q, k0.to_bits());
    if let Some(v) = cache().read().expect("radint cache poisoned").get(&ck) {
        return Ok(*v);
    }
    let s = p - q;
    let val = if q == 0 {
        k0.powi(s as i32 + 1) / f64::from(s + 1)
    } else if k0 <= 0.5 {
        series_small_k0(s, q, k0)
    } else {
        exact_binomial(s, q, k0)
    };
    cache().write().expect("radint cache poisoned").insert(ck, val);
    Ok(val)
}

/// ∫₀^{k0} k^s (1+k)^{−q} dk = Σ_i (−1)^i C(q−1+i, i) k0^{s+i+1}/(s+i+1).
fn series_small_k0(s: u32, q: u32, k0: f64) -> f64 {
    let mut acc = 0.0f64;
    let mut comp = 0.0f64; // Neumaier compensation
    let mut binom = 1.0f64; // C(q-1+i, i), sign folded in below
    let mut k0_pow = k0.powi(s as i32 + 1);
    for i in 0..1000u32 {
        let term = if i % 2 == 0 { binom } else { -binom } * k0_pow / f64::from(s + i + 1);
        let t = acc + term;
        if acc.abs() >= term.abs() {
            comp += (acc - t) + term;
        } else {
            comp += (term - t) + acc;
        }
        acc = t;
        if i > 4 && term.abs() < 1e-18 * acc.abs().max(1e-300) {
            break;
        }
        binom *= f64::from(q + i) / f64::from(i + 1);
        k0_pow *= k0;
    }
    acc + comp
}

/// Exact-rational evaluation for k0 > 1/2: with u = 1 + k0,
/// J = Σ_{j=0}^{s} C(s,j)(−1)^{s−j} (u^{j−q+1} − 1)/(j−q+1), the j = q−1
/// term contributing C(s, q−1)(−1)^{s−q+1} ln u instead.
fn exact_binomial(s: u32, q: u32, k0: f64) -> f64 {
    let u = BigRational::from_float(k0).expect("finite k0") + BigRational::one();
    let mut rational = BigRational::zero();
    let mut log_coeff = BigRational::zero();
    let mut binom = BigInt::one(); // C(s, j)
    for j in 0..=s {
        let sign = if (s - j) % 2 == 0 { 1 } else { -1 };
        let c = BigRational::from_integer(binom.clone() * BigInt::from(sign));
        let e = j as i64 - q as i64 + 1;
        if e == 0 {
            log_coeff += c;
        } else {
            let upow = pow_rational(&u, e);
            rational += c * (upow - BigRational::one())
                / BigRational::from_integer(BigInt::from(e));
        }
        if j < s {
            binom = binom * BigInt::from(s - j) / BigInt::from(j + 1);
        }
    }
    rational.to_f64().unwrap_or(f64::NAN)
        + log_coeff.to_f64().unwrap_or(f64::NAN) * k0.ln_1p()
}

fn pow_rational(u: &BigRational, e: i64) -> BigRational {
    let p = u.pow(e.unsigned_abs() as u32 as i32);
    if e < 0 {
        p.recip()
    } else {
        p
    }
}

/// Adaptive Gauss–Kronrod quadrature of the same integrand, to `tol`
/// relative accuracy. Independent of the closed-form path; used as the
/// test oracle.
pub fn quadrature_oracle(key: RadialIntegralKey, tol: f64) -> Result<f64, RadintError> {
    let RadialIntegralKey { p, q, k0 } = key;
    if !(k0 > 0.0) || !k0.is_finite() {
        return Err(RadintError::BadCutoff(k0));
    }
    if (p as i64) - (q as i64) <= -1 {
        return Err(RadintError::Divergent(p as i64 - q as i64));
    }
    adaptive_gk(&|k| key.integrand(k), 0.0, k0, tol)
}

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kres = WGK[7] * fc;
    let mut gres = WG[3] * fc;
    let mut kabs = WGK[7] * fc.abs();
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        kres += WGK[j] * (f1 + f2);
        kabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gres += WG[j / 2] * (f1 + f2);
        }
    }
    (kres * h, ((kres - gres) * h).abs(), kabs * h.abs())
}

/// Generic adaptive bisection on [lo, hi]. The error target is relative
/// to the accumulated integral, with the usual round-off floor of
/// 50·ε·∫|f| below which subdivision only shuffles noise.
pub(crate) fn adaptive_gk<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64, RadintError> {
    const MAX_EVALS: usize = 400_000;
    let (i0, e0, a0) = gk15(f, lo, hi);
    // (error, a, b, value, |f| integral); refine the worst interval first
    let mut heap: Vec<(f64, f64, f64, f64, f64)> = vec![(e0, lo, hi, i0, a0)];
    let mut evals = 15usize;
    loop {
        let total: f64 = heap.iter().map(|t| t.3).sum();
        let err: f64 = heap.iter().map(|t| t.0).sum();
        let res_abs: f64 = heap.iter().map(|t| t.4).sum();
        let floor = 50.0 * f64::EPSILON * res_abs;
        if err <= (tol * total.abs()).max(floor) {
            return Ok(total);
        }
        if evals >= MAX_EVALS {
            return Err(RadintError::NonConvergent { err, evals });
        }
        let worst = heap
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
            .map(|(i, _)| i)
            .expect("non-empty heap");
        let (_, a, b, _, _) = heap.swap_remove(worst);
        let m = 0.5 * (a + b);
        let (il, el, al) = gk15(f, a, m);
        let (ir, er, ar) = gk15(f, m, b);
        evals += 30;
        heap.push((el, a, m, il, al));
        heap.push((er, m, b, ir, ar));
    }
}

/// ∫_{−1}^{1} u^n (a − b u)^{−j} du for j ∈ {0, 1, 2}, with a > |b| ≥ 0.
///
/// These are the cosθ moments left over once a shifted-denominator
/// integrand is reduced to its radial part. A power series in b/a is
/// used when the shift is small (the closed form divides by b^{n+1}),
/// the exact antiderivative otherwise.
pub(crate) fn cos_axis_moment(n: u32, j: u32, a: f64, b: f64) -> f64 {
    assert!(a > b.abs(), "cos_axis_moment outside subsonic domain: a={a}, b={b}");
    if j == 0 || b == 0.0 {
        let base = if n % 2 == 0 { 2.0 / f64::from(n + 1) } else { 0.0 };
        return base * a.powi(-(j as i32));
    }
    if b.abs() <= 0.3 * a {
        // (a − bu)^{−j} = a^{−j} Σ_m C(j+m−1, m) (bu/a)^m
        let x = b / a;
        let mut acc = 0.0;
        let mut cm = 1.0f64; // C(j+m−1, m)
        let mut xm = 1.0f64;
        for m in 0..200u32 {
            if (n + m) % 2 == 0 {
                let term = cm * xm * 2.0 / f64::from(n + m + 1);
                acc += term;
                if m > 2 && term.abs() < 1e-18 * acc.abs().max(1e-300) {
                    break;
                }
            }
            cm *= f64::from(j + m) / f64::from(m + 1);
            xm *= x;
        }
        return acc * a.powi(-(j as i32));
    }
    // Substitute w = a − bu: (1/b^{n+1}) ∫_{a−b}^{a+b} (a − w)^n w^{−j} dw.
    let (w1, w2) = if b > 0.0 { (a - b, a + b) } else { (a + b, a - b) };
    let sgn = if b > 0.0 { 1.0 } else { -1.0 };
    let mut acc = 0.0;
    let mut binom = 1.0f64; // C(n, i)
    for i in 0..=n {
        let coeff = binom * a.powi((n - i) as i32) * if i % 2 == 0 { 1.0 } else { -1.0 };
        let e = i as i32 - j as i32;
        acc += if e == -1 {
            coeff * (w2 / w1).ln()
        } else {
            coeff * (w2.powi(e + 1) - w1.powi(e + 1)) / f64::from(e + 1)
        };
        binom *= f64::from(n - i) / f64::from(i + 1);
    }
    sgn * acc / b.powi(n as i32 + 1)
}
