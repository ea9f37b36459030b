use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::models::FiniteModel;
use crate::space::ProductSpace;
use crate::tolerance::DEFAULT_STATE_CAP;

/// Conservative Markov generator on a mixed-radix state space, stored as
/// sparse off-diagonal rows plus the diagonal.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    space: ProductSpace,
    offdiag: Vec<Vec<(usize, f64)>>,
    diag: Vec<f64>,
    mu: Option<Vec<f64>>,
    reversible: bool,
    rate: f64,
}

impl GeneratorMatrix {
    /// Assembles a generator from off-diagonal rows; duplicate targets are
    /// summed and the diagonal makes every row sum to zero.
    pub fn from_rates(space: ProductSpace, mut rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        if rows.len() != space.size() {
            return Err(invalid("one rate row per state is required"));
        }
        let mut diag = vec![0.0; rows.len()];
        for (a, row) in rows.iter_mut().enumerate() {
            row.retain(|&(b, _)| b != a);
            row.sort_by_key(|&(b, _)| b);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(b, r) in row.iter() {
                if !(r >= 0.0) || !r.is_finite() {
                    return Err(invalid(format!("rate {r} from state {a} to {b} is not a finite nonnegative number")));
                }
                match merged.last_mut() {
                    Some((c, acc)) if *c == b => *acc += r,
                    _ => merged.push((b, r)),
                }
            }
            merged.retain(|&(_, r)| r > 0.0);
            diag[a] = -merged.iter().map(|&(_, r)| r).sum::<f64>();
            *row = merged;
        }
        let rate = diag.iter().map(|d| d.abs()).fold(0.0, f64::max);
        Ok(GeneratorMatrix { space, offdiag: rows, diag, mu: None, reversible: false, rate })
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn n_sites(&self) -> usize {
        self.space.n_sites()
    }

    /// Stationary law supplied at assembly (heat-bath generators).
    pub fn mu(&self) -> Option<&[f64]> {
        self.mu.as_deref()
    }

    pub fn is_reversible(&self) -> bool {
        self.reversible
    }

    /// Uniformization rate `Λ ≥ max_a |L(a, a)|`.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn row(&self, a: usize) -> &[(usize, f64)] {
        &self.offdiag[a]
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn entry(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return self.diag[a];
        }
        self.offdiag[a].iter().find(|&&(c, _)| c == b).map_or(0.0, |&(_, r)| r)
    }

    /// `(Lf)(a) = Σ_b L(a, b) f(b)`.
    pub fn apply(&self, f: &[f64], out: &mut [f64]) {
        for (a, o) in out.iter_mut().enumerate() {
            *o = self.diag[a] * f[a] + self.offdiag[a].iter().map(|&(b, r)| r * f[b]).sum::<f64>();
        }
    }

    /// `(νL)(b) = Σ_a ν(a) L(a, b)`.
    pub fn apply_left(&self, nu: &[f64], out: &mut [f64]) {
        for (o, (n, d)) in out.iter_mut().zip(nu.iter().zip(&self.diag)) {
            *o = n * d;
        }
        for (a, row) in self.offdiag.iter().enumerate() {
            if nu[a] != 0.0 {
                for &(b, r) in row {
                    out[b] += nu[a] * r;
                }
            }
        }
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut m = DMatrix::zeros(n, n);
        for a in 0..n {
            m[(a, a)] = self.diag[a];
            for &(b, r) in &self.offdiag[a] {
                m[(a, b)] = r;
            }
        }
        m
    }

    pub fn max_row_sum_residual(&self) -> f64 {
        (0..self.size())
            .map(|a| (self.diag[a] + self.offdiag[a].iter().map(|&(_, r)| r).sum::<f64>()).abs())
            .fold(0.0, f64::max)
    }

    /// `max_b |(μᵀL)(b)|`.
    pub fn stationarity_residual(&self, mu: &[f64]) -> f64 {
        let mut out = vec![0.0; self.size()];
        self.apply_left(mu, &mut out);
        out.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// `max_{a,b} |μ(a)L(a,b) − μ(b)L(b,a)|`.
    pub fn detailed_balance_residual(&self, mu: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.size() {
            for &(b, r) in &self.offdiag[a] {
                worst = worst.max((mu[a] * r - mu[b] * self.entry(b, a)).abs());
            }
        }
        worst
    }
}

/// Heat-bath generator `L = Σ_i (μ_i − I)` of an enumerable model.
pub fn build_generator(model: &FiniteModel) -> Result<GeneratorMatrix> {
    build_generator_capped(model, DEFAULT_STATE_CAP)
}

pub fn build_generator_capped(model: &FiniteModel, cap: usize) -> Result<GeneratorMatrix> {
    let mu = model.joint_table_capped(cap)?;
    let space = ProductSpace::new(model.space().radices().to_vec(), cap)?;
    let n = model.n_sites();
    let q = model.q();
    let mut rows = Vec::with_capacity(space.size());
    let mut x = vec![0; n];
    let mut p = vec![0.0; q];
    for a in 0..space.size() {
        space.decode_into(a, &mut x);
        let mut row = Vec::with_capacity(n * (q - 1));
        for i in 0..n {
            model.conditional_into(i, &mut x, &mut p);
            for (v, &pv) in p.iter().enumerate() {
                if v != x[i] && pv > 0.0 {
                    row.push((space.with_value(a, i, v), pv));
                }
            }
        }
        rows.push(row);
    }
    let mut g = GeneratorMatrix::from_rates(space, rows)?;
    let resid = g.stationarity_residual(&mu);
    if resid > 1e-8 {
        return Err(Error::Internal(format!("heat-bath generator not stationary for μ (residual {resid:.3e})")));
    }
    g.reversible = g.detailed_balance_residual(&mu) <= 1e-10;
    g.rate = n as f64;
    g.mu = Some(mu);
    Ok(g)
}

/// Eigenvalues of the symmetrized `D^{1/2} L D^{−1/2}`, descending.
pub fn reversible_spectrum(l: &GeneratorMatrix) -> Result<Vec<f64>> {
    let mu = l.mu().ok_or_else(|| Error::UnsupportedModel("generator has no stationary law attached".into()))?;
    if !l.is_reversible() {
        return Err(Error::NotReversible(l.detailed_balance_residual(mu)));
    }
    if mu.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::UnsupportedModel("stationary law must be strictly positive".into()));
    }
    let n = l.size();
    let sq: Vec<f64> = mu.iter().map(|m| m.sqrt()).collect();
    let mut s = DMatrix::zeros(n, n);
    for a in 0..n {
        s[(a, a)] = l.diag()[a];
        for &(b, r) in l.row(a) {
            let v = 0.5 * sq[a] * r / sq[b];
            s[(a, b)] += v;
            s[(b, a)] += v;
        }
    }
    let mut ev: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    Ok(ev)
}

/// Smallest nonzero eigenvalue of `−L`, from the second-largest eigenvalue of
/// the symmetrized generator.
pub fn exact_spectral_gap(l: &GeneratorMatrix) -> Result<f64> {
    let ev = reversible_spectrum(l)?;
    if ev.len() < 2 {
        return Err(invalid("a one-state chain has no spectral gap"));
    }
    Ok(-ev[1])
}

/// Eigenvalues of `L` within `tol` of zero.
pub fn zero_multiplicity(l: &GeneratorMatrix, tol: f64) -> Result<usize> {
    Ok(reversible_spectrum(l)?.iter().filter(|v| v.abs() <= tol).count())
}
