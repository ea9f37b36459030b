//! Dobrushin interdependence matrices, their norms and spectral radius, gap
//! certificates, and closed-form bounds for the standard model families.

mod bounds;

pub use bounds::{
    grid_slack, ising_bounds, ising_r_bound, nvector_bounds, phi4_bounds, potts_bound, BoundReport, NamedConstant,
};

use nalgebra::{DMatrix, Schur};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{FiniteModel, ModelSpec};
use crate::tolerance::DENSE_EIGEN_MAX_SITES;
use crate::wasserstein::{w1_dense, Metric, MetricChoice};

/// Upper limit on the boundary configurations enumerated for one entry.
pub const ENUMERATION_CAP: usize = 1 << 24;

/// Configuration pair attaining an entry of the matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DobrushinMatrix {
    n: usize,
    entries: Vec<f64>,
    metric_tag: &'static str,
    witnesses: Option<Vec<Option<Witness>>>,
}

impl DobrushinMatrix {
    /// Wraps a row-major nonnegative matrix with zero diagonal.
    pub fn from_rows(rows: Vec<Vec<f64>>, metric_tag: &'static str) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(crate::error::invalid("interdependence matrix must be square"));
            }
            for (j, v) in row.into_iter().enumerate() {
                if !(v >= 0.0) || !v.is_finite() || (i == j && v != 0.0) {
                    return Err(crate::error::invalid(format!("invalid entry c[{i}][{j}] = {v}")));
                }
                entries.push(v);
            }
        }
        Ok(DobrushinMatrix { n, entries, metric_tag, witnesses: None })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn metric_tag(&self) -> &'static str {
        self.metric_tag
    }

    pub fn witness(&self, i: usize, j: usize) -> Option<&Witness> {
        self.witnesses.as_ref().and_then(|w| w[i * self.n + j].as_ref())
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.entries)
    }

    pub fn norms(&self) -> (f64, f64) {
        matrix_norms(&self.entries, self.n)
    }

    pub fn spectral_radius(&self) -> f64 {
        spectral_radius(&self.entries, self.n)
    }
}

/// Interdependence matrix `c_ij = sup_{x = y off j} W1(μ_i(·|x), μ_i(·|y)) / d(x_j, y_j)`.
pub fn interdependence_matrix(model: &ModelSpec, metric: &MetricChoice) -> Result<DobrushinMatrix> {
    match model {
        ModelSpec::GaussianPair(g) => match metric {
            MetricChoice::Euclidean => {
                let c = g.coefficient();
                DobrushinMatrix::from_rows(vec![vec![0.0, c], vec![c, 0.0]], "euclidean")
            }
            _ => Err(Error::UnsupportedModel(
                "the Gaussian pair is only supported under the Euclidean metric; its state space is unbounded".into(),
            )),
        },
        _ => {
            let fm = model.finite()?;
            let d = fm.metric(metric)?;
            interdependence_finite(&fm, &d)
        }
    }
}

/// Exhaustive evaluation over the neighbourhood of each site; spins outside
/// `N(i) ∪ {j}` cannot change `μ_i(·|x)` and are held at 0.
pub fn interdependence_finite(model: &FiniteModel, metric: &Metric) -> Result<DobrushinMatrix> {
    let n = model.n_sites();
    let q = model.q();
    if metric.size() != q {
        return Err(crate::error::invalid("metric size does not match the spin space"));
    }
    let mut entries = vec![0.0; n * n];
    let mut witnesses = vec![None; n * n];
    let mut probs = vec![vec![0.0; q]; q];
    for i in 0..n {
        for j in 0..n {
            if i == j || !model.interacts(i, j) {
                continue;
            }
            let others: Vec<usize> = (0..n).filter(|&k| k != i && k != j && model.interacts(i, k)).collect();
            let cells = q.checked_pow(others.len() as u32).filter(|&c| c <= ENUMERATION_CAP);
            let cells = cells.ok_or(Error::SizeLimit {
                what: "interdependence enumeration",
                needed: q.saturating_pow(others.len() as u32),
                cap: ENUMERATION_CAP,
            })?;
            let mut x = vec![0usize; n];
            let mut best = 0.0f64;
            let mut arg = None;
            for cell in 0..cells {
                let mut c = cell;
                for &k in &others {
                    x[k] = c % q;
                    c /= q;
                }
                for (a, p) in probs.iter_mut().enumerate() {
                    x[j] = a;
                    model.conditional_into(i, &mut x, p);
                }
                for a in 0..q {
                    for b in a + 1..q {
                        let d = metric.distance(a, b);
                        if d == 0.0 {
                            continue;
                        }
                        let r = w1_dense(&probs[a], &probs[b], metric)? / d;
                        if r > best {
                            best = r;
                            let mut y = x.clone();
                            let mut xa = x.clone();
                            xa[j] = a;
                            y[j] = b;
                            arg = Some(Witness { x: xa, y });
                        }
                    }
                }
            }
            entries[i * n + j] = best;
            witnesses[i * n + j] = arg;
        }
    }
    Ok(DobrushinMatrix { n, entries, metric_tag: metric.tag(), witnesses: Some(witnesses) })
}

/// `(‖C‖₁, ‖C‖∞)`: maximal column sum and maximal row sum.
pub fn matrix_norms(c: &[f64], n: usize) -> (f64, f64) {
    let mut col = 0.0f64;
    let mut row = 0.0f64;
    for k in 0..n {
        col = col.max((0..n).map(|i| c[i * n + k]).sum());
        row = row.max(c[k * n..(k + 1) * n].iter().sum());
    }
    (col, row)
}

/// Spectral radius of a nonnegative matrix given row-major.
pub fn spectral_radius(c: &[f64], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if n <= DENSE_EIGEN_MAX_SITES {
        let m = DMatrix::from_row_slice(n, n, c);
        if m == m.transpose() {
            return m.symmetric_eigenvalues().iter().map(|v| v.abs()).fold(0.0, f64::max);
        }
        // The unbounded Schur iteration can stall on some inputs.
        if let Some(schur) = Schur::try_new(m, f64::EPSILON, 10_000) {
            return schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
        }
    }
    power_iteration(c, n, 1e-13, 1_000_000)
}

/// Power iteration on `I + C`, whose Perron root `1 + r_sp` is strictly
/// dominant in modulus. Returns the Collatz–Wielandt upper bound minus one.
pub fn power_iteration(c: &[f64], n: usize, tol: f64, max_iter: usize) -> f64 {
    let mut v = vec![1.0; n];
    let mut w = vec![0.0; n];
    let mut upper = f64::INFINITY;
    for _ in 0..max_iter {
        for i in 0..n {
            w[i] = v[i] + c[i * n..(i + 1) * n].iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let r = w[i] / v[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        upper = upper.min(hi);
        let norm = w.iter().cloned().fold(0.0, f64::max);
        for i in 0..n {
            v[i] = w[i] / norm;
        }
        if hi - lo < tol {
            break;
        }
    }
    upper - 1.0
}

/// Spectral-gap certificate derived from an interdependence matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapCertificate {
    pub metric: &'static str,
    pub r_sp: f64,
    pub norm1: f64,
    pub norminf: f64,
    #[serde(rename = "eq_2_4_lambda1_lower")]
    pub lambda1_bound: f64,
    #[serde(rename = "eq_2_4_valid")]
    pub valid: bool,
    #[serde(rename = "eq_2_6_lambda0", skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
    #[serde(rename = "eq_2_7_lambda1_grad_lower", skip_serializing_if = "Option::is_none")]
    pub lambda1_grad_bound: Option<f64>,
}

impl GapCertificate {
    pub fn from_matrix(c: &DobrushinMatrix, lambda0: Option<f64>) -> Self {
        let (norm1, norminf) = c.norms();
        // Round-off in the eigen-solver must not push r_sp above a norm.
        let r_sp = c.spectral_radius().min(norm1.min(norminf)).max(0.0);
        let lambda1_bound = 1.0 - r_sp;
        GapCertificate {
            metric: c.metric_tag(),
            r_sp,
            norm1,
            norminf,
            lambda1_bound,
            valid: r_sp < 1.0,
            lambda0,
            lambda1_grad_bound: lambda0.map(|l| l * lambda1_bound),
        }
    }
}

pub fn gap_certificate(model: &ModelSpec, metric: &MetricChoice, lambda0: Option<f64>) -> Result<GapCertificate> {
    let c = interdependence_matrix(model, metric)?;
    Ok(GapCertificate::from_matrix(&c, lambda0))
}
