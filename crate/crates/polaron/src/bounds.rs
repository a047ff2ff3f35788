//! The moment-method bound solver: from moments M_0..M_{2n} of a
//! Hamiltonian in a trial state, build the degree-n monic polynomial
//! whose roots bound the ground energy from above, the minimum root
//! giving a bound that is non-increasing in n.
//!
//! Solving the Hankel system directly is catastrophically ill-conditioned
//! beyond n ≈ 4. Instead the moments (shifted by M_1 for conditioning)
//! define a monic orthogonal-polynomial three-term recurrence whose
//! Jacobi matrix is symmetric tridiagonal; its eigenvalues are exactly
//! the polynomial roots, guaranteed real. A vanishing recurrence norm
//! signals that the trial state lives in a Krylov space of dimension
//! smaller than n (exact closure), reported as a degeneracy.

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("invalid moment sequence: {0}")]
    BadMoments(String),
    #[error("moment sequence degenerate beyond order {max_order} (Krylov closure)")]
    Degenerate { max_order: usize },
}

/// One order of the bound sequence.
#[derive(Debug, Clone)]
pub struct BoundResult {
    pub order: usize,
    /// Monic coefficients X_0..X_n of P_n(x) = Σ X_i x^{n−i}, X_0 = 1.
    pub poly_coeffs: Vec<f64>,
    /// All n roots, ascending; real by construction.
    pub roots: Vec<f64>,
    /// min(roots): the upper bound on the ground energy.
    pub bound: f64,
    /// Condition number of the shifted Hankel (Gram) matrix.
    pub condition_estimate: f64,
}

/// Relative tolerance under which a recurrence norm counts as exact
/// Krylov closure rather than a valid next order.
const DEGENERACY_TOL: f64 = 1e-12;

/// Upper bound of order n from moments M_0..M_{≥2n}. `moments[0]` must
/// be 1 (normalized trial state).
pub fn solve_bound(moments: &[f64], n: usize) -> Result<BoundResult, BoundsError> {
    if n < 1 {
        return Err(BoundsError::BadMoments("order n must be >= 1".into()));
    }
    if moments.len() < 2 * n + 1 {
        return Err(BoundsError::BadMoments(format!(
            "need {} moments for order {n}, got {}",
            2 * n + 1,
            moments.len()
        )));
    }
    if moments.iter().any(|m| !m.is_finite()) {
        return Err(BoundsError::BadMoments("non-finite moment".into()));
    }
    if (moments[0] - 1.0).abs() > 1e-9 {
        return Err(BoundsError::BadMoments(format!("M_0 = {} != 1", moments[0])));
    }

    // shift by the mean: central moments are orders of magnitude closer
    // together, which is what keeps the recurrence well conditioned
    let mean = moments[1];
    let mu = central_from_raw(moments, mean, 2 * n);

    // monic orthogonal polynomials against the μ functional
    let (alpha, beta, gram) = recurrence_coefficients(&mu, n)?;

    // Jacobi matrix eigenvalues = roots of p_n
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        jac[(i, i)] = alpha[i];
        if i + 1 < n {
            let off = beta[i + 1].sqrt();
            jac[(i, i + 1)] = off;
            jac[(i + 1, i)] = off;
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mut roots: Vec<f64> = eig.eigenvalues.iter().map(|&x| x + mean).collect();
    roots.sort_by(f64::total_cmp);

    // polynomial coefficients: run the recurrence symbolically in the
    // shifted variable, then substitute x → x − mean
    let shifted = recurrence_polynomial(&alpha, &beta, n);
    let poly_coeffs = unshift_polynomial(&shifted, mean);

    let condition_estimate = gram_condition(&gram);

    let bound = roots[0];
    Ok(BoundResult { order: n, poly_coeffs, roots, bound, condition_estimate })
}

/// Bound results for n = 1..n_max, stopping early at Krylov closure.
pub fn bound_sequence(moments: &[f64], n_max: usize) -> Result<Vec<BoundResult>, BoundsError> {
    if moments.len() < 2 * n_max + 1 {
        return Err(BoundsError::BadMoments(format!(
            "need {} moments for n_max = {n_max}, got {}",
            2 * n_max + 1,
            moments.len()
        )));
    }
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        match solve_bound(moments, n) {
            Ok(r) => out.push(r),
            Err(BoundsError::Degenerate { .. }) if !out.is_empty() => break,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// The closed form for the order-2 bound from the mean and the second
/// and third central moments:
/// mean + K3/(2K2) − √((K3/2K2)² + K2).
/// Always ≤ mean; K2 ≤ 0 degenerates to an eigenstate, returning mean.
pub fn second_order_closed_form(mean: f64, k2: f64, k3: f64) -> f64 {
    if k2 <= 0.0 {
        return mean;
    }
    let half_ratio = k3 / (2.0 * k2);
    mean + half_ratio - (half_ratio * half_ratio + k2).sqrt()
}

/// μ_j = Σ_i C(j,i) M_i (−c)^{j−i}.
fn central_from_raw(moments: &[f64], c: f64, up_to: usize) -> Vec<f64> {
    let mut mu = Vec::with_capacity(up_to + 1);
    for j in 0..=up_to {
        let mut acc = 0.0;
        let mut binom = 1.0f64;
        for i in 0..=j {
            acc += binom * moments[i] * (-c).powi((j - i) as i32);
            binom *= (j - i) as f64 / (i + 1) as f64;
        }
        mu.push(acc);
    }
    mu
}

/// Monic three-term recurrence p_{j+1} = (x − α_j)p_j − β_j p_{j−1}
/// against ⟨x^a⟩ = μ_a; returns (α_0..α_{n−1}, β_0..β_{n−1}, Gram).
fn recurrence_coefficients(
    mu: &[f64],
    n: usize,
) -> Result<(Vec<f64>, Vec<f64>, DMatrix<f64>), BoundsError> {
    let inner = |a: &[f64], b: &[f64], extra: usize| -> f64 {
        let mut acc = 0.0;
        for (i, &ca) in a.iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            for (j, &cb) in b.iter().enumerate() {
                acc += ca * cb * mu[i + j + extra];
            }
        }
        acc
    };
    let mut alpha = Vec::with_capacity(n);
    let mut beta = vec![0.0f64];
    let mut p_prev: Vec<f64> = vec![];
    let mut p_cur: Vec<f64> = vec![1.0];
    let mut s_prev = 1.0f64;
    let mut s_cur = mu[0]; // = 1
    let mut gram = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            gram[(i, j)] = mu[i + j];
        }
    }
    for j in 0..n {
        if j > 0 {
            let b = s_cur / s_prev;
            let scale = beta.get(1).copied().unwrap_or(1.0).max(1.0);
            if !b.is_finite() || b <= 0.0 {
                if b.is_finite() && b.abs() < DEGENERACY_TOL * scale {
                    return Err(BoundsError::Degenerate { max_order: j });
                }
                return Err(BoundsError::BadMoments(format!(
                    "indefinite Hankel form at order {j} (β = {b:e}); \
                     not a valid moment sequence"
                )));
            }
            if b < DEGENERACY_TOL * scale {
                return Err(BoundsError::Degenerate { max_order: j });
            }
            beta.push(b);
        }
        let t = inner(&p_cur, &p_cur, 1);
        alpha.push(t / s_cur);
        if j + 1 < n {
            // p_next = (x − α_j) p_cur − β_j p_prev
            let mut p_next = vec![0.0; p_cur.len() + 1];
            for (i, &c) in p_cur.iter().enumerate() {
                p_next[i + 1] += c;
                p_next[i] -= alpha[j] * c;
            }
            if j > 0 {
                for (i, &c) in p_prev.iter().enumerate() {
                    p_next[i] -= beta[j] * c;
                }
            }
            s_prev = s_cur;
            s_cur = inner(&p_next, &p_next, 0);
            p_prev = std::mem::replace(&mut p_cur, p_next);
        }
    }
    Ok((alpha, beta, gram))
}

/// Coefficients of the monic p_n in the shifted variable, low degree
/// first.
fn recurrence_polynomial(alpha: &[f64], beta: &[f64], n: usize) -> Vec<f64> {
    let mut p_prev: Vec<f64> = vec![];
    let mut p_cur: Vec<f64> = vec![1.0];
    for j in 0..n {
        let mut p_next = vec![0.0; p_cur.len() + 1];
        for (i, &c) in p_cur.iter().enumerate() {
            p_next[i + 1] += c;
            p_next[i] -= alpha[j] * c;
        }
        if j > 0 {
            for (i, &c) in p_prev.iter().enumerate() {
                p_next[i] -= beta[j] * c;
            }
        }
        p_prev = std::mem::replace(&mut p_cur, p_next);
    }
    p_cur
}

/// p(x − c) expanded, returned as X_0..X_n (descending powers), X_0 = 1.
fn unshift_polynomial(shifted_low_first: &[f64], c: f64) -> Vec<f64> {
    let n = shifted_low_first.len() - 1;
    let mut out = vec![0.0f64; n + 1]; // low degree first during work
    for (deg, &coeff) in shifted_low_first.iter().enumerate() {
        // coeff · (x − c)^deg contributes C(deg,i)(−c)^i to x^{deg−i}
        let mut binom = 1.0f64;
        for i in 0..=deg {
            out[deg - i] += coeff * binom * (-c).powi(i as i32);
            binom *= (deg - i) as f64 / (i + 1) as f64;
        }
    }
    out.reverse(); // X_0 (x^n) first
    out
}

fn gram_condition(gram: &DMatrix<f64>) -> f64 {
    let svd = gram.clone().svd(false, false);
    let max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let min = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Evaluate P_n(x) = Σ X_i x^{n−i} (Horner).
pub fn eval_monic(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}
