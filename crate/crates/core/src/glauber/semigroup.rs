use nalgebra::DMatrix;

use super::GeneratorMatrix;
use crate::error::{invalid, Result};

/// Largest `Λ·dt` handled in one uniformization chunk.
const CHUNK: f64 = 50.0;
/// Poisson tail mass left out of each chunk.
const TAIL: f64 = 1e-13;

/// `P_t f = e^{tL} f` by uniformization: with `Π = I + L/Λ`,
/// `P_t = Σ_k e^{−Λt}(Λt)^k/k! Π^k`, truncated once the Poisson tail is
/// below `1e−13` per chunk of length `Λ·dt ≤ 50`.
pub fn semigroup_apply(l: &GeneratorMatrix, f: &[f64], t: f64) -> Result<Vec<f64>> {
    uniformize(l, f, t, false)
}

/// `ν P_t`, the law at time `t` started from `ν`.
pub fn semigroup_apply_left(l: &GeneratorMatrix, nu: &[f64], t: f64) -> Result<Vec<f64>> {
    uniformize(l, nu, t, true)
}

fn uniformize(l: &GeneratorMatrix, v: &[f64], t: f64, left: bool) -> Result<Vec<f64>> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid(format!("time must be finite and ≥ 0, got {t}")));
    }
    if v.len() != l.size() {
        return Err(invalid("vector length does not match the generator"));
    }
    let rate = l.rate();
    if t == 0.0 || rate == 0.0 {
        return Ok(v.to_vec());
    }
    let chunks = ((rate * t) / CHUNK).ceil().max(1.0) as usize;
    let dt = t / chunks as f64;
    let lam = rate * dt;
    let mut cur = v.to_vec();
    let mut term = vec![0.0; v.len()];
    let mut next = vec![0.0; v.len()];
    let mut acc = vec![0.0; v.len()];
    for _ in 0..chunks {
        term.copy_from_slice(&cur);
        let mut w = (-lam).exp();
        let mut mass = 0.0;
        acc.iter_mut().for_each(|a| *a = 0.0);
        let mut k = 0usize;
        loop {
            for (a, x) in acc.iter_mut().zip(&term) {
                *a += w * x;
            }
            mass += w;
            if 1.0 - mass < TAIL && k as f64 >= lam {
                break;
            }
            // term ← Π term
            if left {
                l.apply_left(&term, &mut next);
            } else {
                l.apply(&term, &mut next);
            }
            for (n, x) in next.iter_mut().zip(&term) {
                *n = x + *n / rate;
            }
            std::mem::swap(&mut term, &mut next);
            k += 1;
            w *= lam / k as f64;
            if k > 10_000 {
                break;
            }
        }
        cur.copy_from_slice(&acc);
    }
    Ok(cur)
}

/// Dense `e^{tM}` by Taylor series with scaling and squaring. When `M` has
/// nonnegative off-diagonal entries the diagonal is shifted out first so
/// every series term is nonnegative and the result is entrywise ≥ 0.
pub fn matexp_small(m: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    assert!(m.is_square(), "matrix exponential needs a square matrix");
    let n = m.nrows();
    let mut a = m * t;
    let metzler = (0..n).all(|i| (0..n).all(|j| i == j || a[(i, j)] >= 0.0));
    let mut shift = 0.0;
    if metzler && n > 0 {
        shift = (0..n).map(|i| a[(i, i)]).fold(f64::INFINITY, f64::min);
        for i in 0..n {
            a[(i, i)] -= shift;
        }
    }
    let norm = a.abs().row_sum().iter().cloned().fold(0.0, f64::max);
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = a * scale;
    let mut result = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=40 {
        term = &term * &a / k as f64;
        result += &term;
        if term.abs().max() <= f64::EPSILON * 1e-3 * result.abs().max() {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    if metzler {
        result *= shift.exp();
    }
    result
}
