//! Exact Wasserstein-1 distances, total variation, Lipschitz seminorms and
//! per-site oscillations on finite spaces.
//!
//! W1 is solved exactly: under the trivial metric through the closed form
//! `W1 = ‖ν₁ − ν₂‖_TV / 2`, on the real line through the quantile coupling,
//! and otherwise with the transportation simplex in [`simplex`].

mod distribution;
mod metric;
pub(crate) mod simplex;

pub use distribution::DiscreteDistribution;
pub use metric::{Metric, MetricChoice};

use crate::error::{invalid, Error, Result};
use crate::space::ProductSpace;
use crate::tolerance::{DEFAULT_TRANSPORT_CAP, EQ_TOL};

/// Coupling of two finite distributions together with its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    /// Support points of the first marginal (plan rows).
    pub rows: Vec<usize>,
    /// Support points of the second marginal (plan columns).
    pub cols: Vec<usize>,
    /// Row-major `rows.len() × cols.len()` mass matrix.
    pub plan: Vec<f64>,
    pub cost: f64,
}

impl TransportPlan {
    pub fn mass(&self, r: usize, c: usize) -> f64 {
        self.plan[r * self.cols.len() + c]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let n = self.cols.len();
        (0..self.rows.len()).map(|r| self.plan[r * n..(r + 1) * n].iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let n = self.cols.len();
        (0..n).map(|c| (0..self.rows.len()).map(|r| self.plan[r * n + c]).sum()).collect()
    }

    /// Marginal and cost invariants, each within `1e-10`.
    pub fn is_feasible_for(
        &self,
        nu1: &DiscreteDistribution,
        nu2: &DiscreteDistribution,
        distance: impl Fn(usize, usize) -> f64,
    ) -> bool {
        if self.plan.iter().any(|&p| p < -EQ_TOL) {
            return false;
        }
        let rows_ok = self.row_sums().iter().zip(&self.rows).all(|(s, &a)| (s - nu1.mass(a)).abs() <= EQ_TOL);
        let cols_ok = self.col_sums().iter().zip(&self.cols).all(|(s, &b)| (s - nu2.mass(b)).abs() <= EQ_TOL);
        let mut cost = 0.0;
        for (r, &a) in self.rows.iter().enumerate() {
            for (c, &b) in self.cols.iter().enumerate() {
                cost += self.mass(r, c) * distance(a, b);
            }
        }
        rows_ok && cols_ok && (cost - self.cost).abs() <= EQ_TOL
    }
}

fn same_space(nu1: &DiscreteDistribution, nu2: &DiscreteDistribution) -> Result<()> {
    if nu1.space_size() != nu2.space_size() {
        return Err(invalid(format!(
            "distributions live on spaces of size {} and {}",
            nu1.space_size(),
            nu2.space_size()
        )));
    }
    Ok(())
}

pub fn tv_distance(nu1: &DiscreteDistribution, nu2: &DiscreteDistribution) -> Result<f64> {
    same_space(nu1, nu2)?;
    let (a, b) = (nu1.dense(), nu2.dense());
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum())
}

/// Optimal coupling and W1 cost of `nu1`, `nu2` under `metric`.
pub fn w1_exact(nu1: &DiscreteDistribution, nu2: &DiscreteDistribution, metric: &Metric) -> Result<TransportPlan> {
    same_space(nu1, nu2)?;
    if metric.size() != nu1.space_size() {
        return Err(invalid(format!(
            "metric has {} points but distributions live on {}",
            metric.size(),
            nu1.space_size()
        )));
    }
    if metric.is_trivial() {
        return Ok(trivial_plan(nu1, nu2));
    }
    if let Some(points) = metric.line_points() {
        return Ok(quantile_plan(nu1, nu2, points));
    }
    general_plan(nu1, nu2, |a, b| metric.distance(a, b))
}

/// W1 cost only; cheaper than building the plan under the trivial metric.
pub fn w1_cost(nu1: &DiscreteDistribution, nu2: &DiscreteDistribution, metric: &Metric) -> Result<f64> {
    if metric.is_trivial() {
        return Ok(0.5 * tv_distance(nu1, nu2)?);
    }
    Ok(w1_exact(nu1, nu2, metric)?.cost)
}

/// W1 between two dense probability vectors on the metric's points.
/// Uses the closed forms for trivial and line metrics.
pub fn w1_dense(p: &[f64], q: &[f64], metric: &Metric) -> Result<f64> {
    if p.len() != metric.size() || q.len() != metric.size() {
        return Err(invalid("probability vectors do not match the metric"));
    }
    if metric.is_trivial() {
        return Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>());
    }
    if let Some(points) = metric.line_points() {
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&i, &j| points[i].total_cmp(&points[j]));
        let mut cdf_gap = 0.0;
        let mut total = 0.0;
        for w in order.windows(2) {
            cdf_gap += p[w[0]] - q[w[0]];
            total += cdf_gap.abs() * (points[w[1]] - points[w[0]]);
        }
        return Ok(total);
    }
    let a = DiscreteDistribution::from_dense(p)?;
    let b = DiscreteDistribution::from_dense(q)?;
    Ok(general_plan(&a, &b, |u, v| metric.distance(u, v))?.cost)
}

pub(crate) fn general_plan(
    nu1: &DiscreteDistribution,
    nu2: &DiscreteDistribution,
    distance: impl Fn(usize, usize) -> f64,
) -> Result<TransportPlan> {
    let rows = nu1.support().to_vec();
    let cols = nu2.support().to_vec();
    let cost_matrix: Vec<f64> =
        rows.iter().flat_map(|&a| cols.iter().map(move |&b| (a, b))).map(|(a, b)| distance(a, b)).collect();
    let plan = simplex::solve(nu1.weights(), nu2.weights(), &cost_matrix)?;
    let cost = plan.iter().zip(&cost_matrix).map(|(p, c)| p * c).sum();
    Ok(TransportPlan { rows, cols, plan, cost })
}

/// Keeps the common mass in place and moves the excess of `nu1` onto the
/// deficit; every moved unit costs exactly one.
fn trivial_plan(nu1: &DiscreteDistribution, nu2: &DiscreteDistribution) -> TransportPlan {
    let rows = nu1.support().to_vec();
    let cols = nu2.support().to_vec();
    let n = cols.len();
    let mut plan = vec![0.0; rows.len() * n];
    let mut excess: Vec<(usize, f64)> = Vec::new();
    let mut deficit: Vec<f64> = nu2.weights().to_vec();
    for (r, (&a, &w)) in rows.iter().zip(nu1.weights()).enumerate() {
        if let Some(c) = cols.iter().position(|&b| b == a) {
            let keep = w.min(deficit[c]);
            plan[r * n + c] = keep;
            deficit[c] -= keep;
            if w > keep {
                excess.push((r, w - keep));
            }
        } else {
            excess.push((r, w));
        }
    }
    let mut moved = 0.0;
    let mut c = 0;
    for (r, mut amount) in excess {
        while amount > 0.0 && c < n {
            let x = amount.min(deficit[c]);
            if x > 0.0 {
                plan[r * n + c] += x;
                moved += x;
                amount -= x;
                deficit[c] -= x;
            }
            if deficit[c] <= 0.0 || x == 0.0 {
                c += 1;
            }
        }
    }
    let cost = 0.5 * tv_distance(nu1, nu2).unwrap_or(moved);
    TransportPlan { rows, cols, plan, cost }
}

/// Monotone coupling of two measures on the real line.
fn quantile_plan(nu1: &DiscreteDistribution, nu2: &DiscreteDistribution, points: &[f64]) -> TransportPlan {
    let rows = nu1.support().to_vec();
    let cols = nu2.support().to_vec();
    let n = cols.len();
    let mut order1: Vec<usize> = (0..rows.len()).collect();
    let mut order2: Vec<usize> = (0..n).collect();
    order1.sort_by(|&i, &j| points[rows[i]].total_cmp(&points[rows[j]]));
    order2.sort_by(|&i, &j| points[cols[i]].total_cmp(&points[cols[j]]));
    let mut s: Vec<f64> = nu1.weights().to_vec();
    let mut d: Vec<f64> = nu2.weights().to_vec();
    let mut plan = vec![0.0; rows.len() * n];
    let (mut i, mut j) = (0, 0);
    while i < order1.len() && j < order2.len() {
        let (r, c) = (order1[i], order2[j]);
        let x = s[r].min(d[c]);
        plan[r * n + c] += x;
        s[r] -= x;
        d[c] -= x;
        if i == order1.len() - 1 {
            j += 1;
        } else if j == order2.len() - 1 || s[r] <= d[c] {
            i += 1;
        } else {
            j += 1;
        }
    }
    let mut cost = 0.0;
    for (r, &a) in rows.iter().enumerate() {
        for (c, &b) in cols.iter().enumerate() {
            cost += plan[r * n + c] * (points[a] - points[b]).abs();
        }
    }
    TransportPlan { rows, cols, plan, cost }
}

/// Lipschitz seminorm of `f` restricted to `points`.
pub fn lipschitz_seminorm(f: &[f64], points: &[usize], metric: &Metric) -> f64 {
    let mut best: f64 = 0.0;
    for (k, &a) in points.iter().enumerate() {
        for &b in &points[k + 1..] {
            let d = metric.distance(a, b);
            if d > 0.0 {
                best = best.max((f[a] - f[b]).abs() / d);
            }
        }
    }
    best
}

/// `∫ f d(ν₁ − ν₂) / ‖f‖_Lip`, which never exceeds W1 (Kantorovich duality).
/// The seminorm is taken over the union of the two supports; a constant `f`
/// gives zero.
pub fn dual_lower_bound(
    nu1: &DiscreteDistribution,
    nu2: &DiscreteDistribution,
    metric: &Metric,
    f: &[f64],
) -> Result<f64> {
    same_space(nu1, nu2)?;
    if f.len() != nu1.space_size() {
        return Err(invalid("test function must be given on the whole space"));
    }
    let mut union: Vec<usize> = nu1.support().iter().chain(nu2.support()).copied().collect();
    union.sort_unstable();
    union.dedup();
    let lip = lipschitz_seminorm(f, &union, metric);
    if lip == 0.0 {
        return Ok(0.0);
    }
    let integral = nu1.expect(|a| f[a]) - nu2.expect(|a| f[a]);
    Ok(integral / lip)
}

/// Per-site oscillations
/// `δ_i(f) = max_{x = y off i} |f(y) − f(x)| / d(y_i, x_i)`
/// of a function tabulated over the whole product space.
pub fn lipschitz_vector(f: &[f64], space: &ProductSpace, metric: &Metric) -> Result<Vec<f64>> {
    if f.len() != space.size() {
        return Err(invalid(format!("function table has {} entries, space has {}", f.len(), space.size())));
    }
    let mut delta = vec![0.0f64; space.n_sites()];
    for (i, slot) in delta.iter_mut().enumerate() {
        let q = space.radix(i);
        if metric.size() != q {
            return Err(invalid(format!("metric has {} points but site {i} has {q} values", metric.size())));
        }
        let stride = space.stride(i);
        for x in 0..space.size() {
            let xi = space.value_at(x, i);
            let base = x - xi * stride;
            for b in xi + 1..q {
                let y = base + b * stride;
                let d = metric.distance(xi, b);
                if d > 0.0 {
                    *slot = slot.max((f[y] - f[x]).abs() / d);
                }
            }
        }
    }
    Ok(delta)
}

/// Exact W1 between two measures on `E^T` under `d_l1(x, y) = Σ_i d(x_i, y_i)`.
/// Both measures are full tables over `space`.
pub fn product_w1(nu1: &[f64], nu2: &[f64], space: &ProductSpace, metric: &Metric) -> Result<f64> {
    product_w1_capped(nu1, nu2, space, metric, DEFAULT_TRANSPORT_CAP)
}

pub fn product_w1_capped(nu1: &[f64], nu2: &[f64], space: &ProductSpace, metric: &Metric, cap: usize) -> Result<f64> {
    if space.size() > cap {
        return Err(Error::SizeLimit { what: "product transport", needed: space.size(), cap });
    }
    if nu1.len() != space.size() || nu2.len() != space.size() {
        return Err(invalid("state tables do not match the product space"));
    }
    if space.radices().iter().any(|&q| q != metric.size()) {
        return Err(invalid("metric size does not match the spin spaces"));
    }
    let d1 = DiscreteDistribution::from_dense(nu1)?;
    let d2 = DiscreteDistribution::from_dense(nu2)?;
    let plan = general_plan(&d1, &d2, |a, b| space.l1_distance(a, b, |u, v| metric.distance(u, v)))?;
    Ok(plan.cost)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(w: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::from_dense(w).unwrap()
    }

    #[test]
    fn identical_measures_cost_zero() {
        let nu = dist(&[0.2, 0.3, 0.5]);
        let line = Metric::line(vec![0.0, 1.0, 5.0]).unwrap();
        let table = Metric::table(vec![vec![0., 1., 2.], vec![1., 0., 1.5], vec![2., 1.5, 0.]]).unwrap();
        for m in [Metric::trivial(3), line, table] {
            assert!(w1_exact(&nu, &nu, &m).unwrap().cost.abs() < 1e-15);
        }
    }

    #[test]
    fn diracs_under_trivial_metric() {
        let a = DiscreteDistribution::point_mass(3, 0).unwrap();
        let b = DiscreteDistribution::point_mass(3, 2).unwrap();
        let plan = w1_exact(&a, &b, &Metric::trivial(3)).unwrap();
        assert_eq!(plan.cost, 1.0);
        assert_eq!(tv_distance(&a, &b).unwrap(), 2.0);
    }

    #[test]
    fn two_point_example() {
        // Coupling vertices: π(0,0) ∈ [0.1, 0.3]; cost = π(0,1) + π(1,0) minimal at 0.5.
        let a = dist(&[0.8, 0.2]);
        let b = dist(&[0.3, 0.7]);
        let plan = w1_exact(&a, &b, &Metric::trivial(2)).unwrap();
        assert!((plan.cost - 0.5).abs() < 1e-15);
        assert!((tv_distance(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        assert!(plan.is_feasible_for(&a, &b, |x, y| if x == y { 0.0 } else { 1.0 }));
    }

    #[test]
    fn split_mass_on_embedded_points() {
        // δ₀ vs ½δ₁ + ½δ₃ on points {0, 1, 2, 3}: the only coupling costs ½·1 + ½·3.
        let metric = Metric::line(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let a = DiscreteDistribution::point_mass(4, 0).unwrap();
        let b = dist(&[0.0, 0.5, 0.0, 0.5]);
        assert!((w1_exact(&a, &b, &metric).unwrap().cost - 2.0).abs() < 1e-15);
        let table =
            Metric::table((0..4).map(|i| (0..4).map(|j| (i as f64 - j as f64).abs()).collect()).collect()).unwrap();
        assert!((w1_exact(&a, &b, &table).unwrap().cost - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_spaces_rejected() {
        let a = dist(&[0.5, 0.5]);
        let b = dist(&[0.2, 0.3, 0.5]);
        assert!(w1_exact(&a, &b, &Metric::trivial(2)).is_err());
        assert!(tv_distance(&a, &b).is_err());
    }

    #[test]
    fn weight_sum_checked() {
        assert!(DiscreteDistribution::from_dense(&[0.5, 0.4]).is_err());
        let d = DiscreteDistribution::from_dense(&[0.5, 0.0, 0.5 + 5e-10]).unwrap();
        assert_eq!(d.support(), &[0, 2]);
        assert!((d.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_witness_gives_zero() {
        let a = dist(&[0.8, 0.2]);
        let b = dist(&[0.3, 0.7]);
        assert_eq!(dual_lower_bound(&a, &b, &Metric::trivial(2), &[3.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn indicator_witness_attains_tv() {
        let a = dist(&[0.5, 0.1, 0.4]);
        let b = dist(&[0.2, 0.6, 0.2]);
        let f: Vec<f64> = a.dense().iter().zip(b.dense()).map(|(x, y)| if *x > y { 1.0 } else { 0.0 }).collect();
        let lb = dual_lower_bound(&a, &b, &Metric::trivial(3), &f).unwrap();
        assert!((lb - 0.5 * tv_distance(&a, &b).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn oscillations_of_spin_product() {
        // f = x₁x₂ on {−1, +1}², site values index 0 ↦ −1, 1 ↦ +1.
        let space = ProductSpace::uniform(2, 2, 16).unwrap();
        let spin = |v: usize| if v == 0 { -1.0 } else { 1.0 };
        let f: Vec<f64> = space.states().map(|x| spin(x[0]) * spin(x[1])).collect();
        let delta = lipschitz_vector(&f, &space, &Metric::trivial(2)).unwrap();
        assert_eq!(delta, vec![2.0, 2.0]);

        let g: Vec<f64> = space.states().map(|x| spin(x[1]) * 3.0).collect();
        assert_eq!(lipschitz_vector(&g, &space, &Metric::trivial(2)).unwrap(), vec![0.0, 6.0]);
        let c = vec![1.5; 4];
        assert_eq!(lipschitz_vector(&c, &space, &Metric::trivial(2)).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn product_transport_between_diracs_is_hamming() {
        let space = ProductSpace::uniform(3, 2, 256).unwrap();
        let mut a = vec![0.0; 8];
        let mut b = vec![0.0; 8];
        a[space.encode(&[0, 1, 0])] = 1.0;
        b[space.encode(&[1, 0, 0])] = 1.0;
        assert!((product_w1(&a, &b, &space, &Metric::trivial(2)).unwrap() - 2.0).abs() < 1e-12);
        assert!(product_w1(&a, &a, &space, &Metric::trivial(2)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn product_transport_cap() {
        let space = ProductSpace::uniform(9, 2, 4096).unwrap();
        let u = vec![1.0 / 512.0; 512];
        assert!(matches!(product_w1(&u, &u, &space, &Metric::trivial(2)), Err(Error::SizeLimit { .. })));
    }
}
