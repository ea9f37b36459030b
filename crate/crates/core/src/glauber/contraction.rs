use nalgebra::DMatrix;
use serde::Serialize;

use super::{build_generator, matexp_small, semigroup_apply, GeneratorMatrix};
use crate::dobrushin::{interdependence_finite, matrix_norms};
use crate::error::{invalid, Result};
use crate::models::FiniteModel;
use crate::tolerance::INEQ_SLACK;
use crate::wasserstein::{lipschitz_vector, Metric};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayPoint {
    pub t: f64,
    pub site: usize,
    pub delta_actual: f64,
    pub delta_bound: f64,
    pub margin: f64,
}

/// Aggregated forms at one time: `Σ_j δ_j` against `e^{−t(η−‖C‖∞)} Σ_j δ_j(f)`
/// and `max_j δ_j` against `e^{−t(η−‖C‖₁)} max_j δ_j(f)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateCheck {
    pub t: f64,
    pub sum_actual: f64,
    pub sum_bound: f64,
    pub max_actual: f64,
    pub max_bound: f64,
}

impl AggregateCheck {
    pub fn holds(&self, slack: f64) -> bool {
        self.sum_actual <= self.sum_bound + slack && self.max_actual <= self.max_bound + slack
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport {
    /// Diagonal rate of the comparison matrix: 1 for heat-bath, η for jump rates.
    pub eta: f64,
    pub norm1: f64,
    pub norminf: f64,
    pub tolerance: f64,
    pub points: Vec<DecayPoint>,
    pub aggregates: Vec<AggregateCheck>,
}

impl ContractionReport {
    pub fn worst_margin(&self) -> f64 {
        self.points.iter().map(|p| p.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn passed(&self) -> bool {
        self.points.iter().all(|p| p.margin >= -self.tolerance)
            && self.aggregates.iter().all(|a| a.holds(self.tolerance))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,site,delta_actual,delta_bound,margin\n");
        for p in &self.points {
            s.push_str(&format!("{},{},{:e},{:e},{:e}\n", p.t, p.site, p.delta_actual, p.delta_bound, p.margin));
        }
        s
    }
}

/// Compares `δ(P_t f)` with `δ(f)ᵀ e^{−t(η I − C)}` for every `t`.
pub fn contraction_against(
    l: &GeneratorMatrix,
    metric: &Metric,
    c: &DMatrix<f64>,
    eta: f64,
    f: &[f64],
    t_grid: &[f64],
) -> Result<ContractionReport> {
    let n = l.n_sites();
    if c.nrows() != n || c.ncols() != n {
        return Err(invalid("comparison matrix does not match the number of sites"));
    }
    let delta0 = lipschitz_vector(f, l.space(), metric)?;
    let entries: Vec<f64> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| c[(i, j)]).collect();
    let (norm1, norminf) = matrix_norms(&entries, n);
    let gen = c - DMatrix::identity(n, n) * eta;
    let sum0: f64 = delta0.iter().sum();
    let max0 = delta0.iter().cloned().fold(0.0, f64::max);
    let mut points = Vec::new();
    let mut aggregates = Vec::new();
    for &t in t_grid {
        let pf = semigroup_apply(l, f, t)?;
        let delta = lipschitz_vector(&pf, l.space(), metric)?;
        let e = matexp_small(&gen, t);
        for j in 0..n {
            let bound: f64 = (0..n).map(|i| delta0[i] * e[(i, j)]).sum();
            points.push(DecayPoint {
                t,
                site: j,
                delta_actual: delta[j],
                delta_bound: bound,
                margin: bound - delta[j],
            });
        }
        aggregates.push(AggregateCheck {
            t,
            sum_actual: delta.iter().sum(),
            sum_bound: (-t * (eta - norminf)).exp() * sum0,
            max_actual: delta.iter().cloned().fold(0.0, f64::max),
            max_bound: (-t * (eta - norm1)).exp() * max0,
        });
    }
    Ok(ContractionReport { eta, norm1, norminf, tolerance: INEQ_SLACK, points, aggregates })
}

/// Lipschitz contraction of the heat-bath semigroup against `e^{−t(I−C)}`.
pub fn check_contraction(model: &FiniteModel, metric: &Metric, f: &[f64], t_grid: &[f64]) -> Result<ContractionReport> {
    let c = interdependence_finite(model, metric)?.to_dmatrix();
    let l = build_generator(model)?;
    contraction_against(&l, metric, &c, 1.0, f, t_grid)
}
