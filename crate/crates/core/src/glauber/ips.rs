use microlp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use super::{contraction_against, matexp_small, semigroup_apply_left, ContractionReport, GeneratorMatrix};
use crate::dobrushin::matrix_norms;
use crate::error::{invalid, Error, Result};
use crate::models::FiniteModel;
use crate::space::ProductSpace;
use crate::tolerance::{DEFAULT_STATE_CAP, EXACT_RATE_LP_MAX_STATES, INEQ_SLACK};
use crate::wasserstein::{product_w1, Metric};

/// Rates `J_S(x, {z})` for one site set `S`, tabulated as
/// `rates[x · |E^S| + z]` with `z` little-endian in the order of `sites`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpTerm {
    pub sites: Vec<usize>,
    pub rates: Vec<f64>,
}

/// Local jump rates `(J_S)` of a generator `Lf(x) = Σ_S ∫ J_S(x, dz)[f(x^z) − f(x)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpRateFamily {
    space: ProductSpace,
    q: usize,
    terms: Vec<JumpTerm>,
}

impl JumpRateFamily {
    /// Uniform spin space with `q` values per site and no terms yet.
    pub fn empty(n_sites: usize, q: usize) -> Result<Self> {
        let space = ProductSpace::uniform(n_sites, q, DEFAULT_STATE_CAP)?;
        Ok(JumpRateFamily { space, q, terms: Vec::new() })
    }

    pub fn push(&mut self, term: JumpTerm) -> Result<()> {
        let s = &term.sites;
        if s.is_empty() {
            return Err(invalid("jump-rate site sets must be nonempty"));
        }
        if s.iter().any(|&i| i >= self.space.n_sites()) {
            return Err(invalid("jump-rate site outside the window"));
        }
        let mut sorted = s.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != s.len() {
            return Err(invalid("jump-rate site set lists a site twice"));
        }
        let m = self.local_size(s.len());
        if term.rates.len() != self.space.size() * m {
            return Err(invalid(format!("rates for {s:?} need {} entries", self.space.size() * m)));
        }
        if term.rates.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(invalid("jump rates must be finite and nonnegative"));
        }
        self.terms.push(term);
        Ok(())
    }

    /// Adds `J_S(x, z) = rate(x, z)` with `x` the full configuration and `z`
    /// the new values on `sites`.
    pub fn push_fn(&mut self, sites: Vec<usize>, rate: impl Fn(&[usize], &[usize]) -> f64) -> Result<()> {
        let m = self.local_size(sites.len());
        let mut rates = Vec::with_capacity(self.space.size() * m);
        let mut z = vec![0; sites.len()];
        for x in self.space.states() {
            for k in 0..m {
                decode_local(k, self.q, &mut z);
                rates.push(rate(&x, &z));
            }
        }
        self.push(JumpTerm { sites, rates })
    }

    /// Heat-bath family `J_{i}(x, ·) = μ_i(·|x)`.
    pub fn heat_bath(model: &FiniteModel) -> Result<Self> {
        let mut fam = Self::empty(model.n_sites(), model.q())?;
        for i in 0..model.n_sites() {
            fam.push_fn(vec![i], |x, z| model.conditional_probs(i, x)[z[0]])?;
        }
        Ok(fam)
    }

    /// Random family with `n_terms` site sets of size at most `max_size`.
    /// With `gauge`, `J_S(x, {x_S})` is chosen so that every total mass
    /// `J_S(x, E^S)` equals `(|E^S| − 1)·scale`.
    pub fn random(
        rng: &mut impl Rng,
        n_sites: usize,
        q: usize,
        n_terms: usize,
        max_size: usize,
        gauge: bool,
    ) -> Result<Self> {
        let mut fam = Self::empty(n_sites, q)?;
        let max_size = max_size.clamp(1, n_sites);
        for _ in 0..n_terms {
            let size = rng.random_range(1..=max_size);
            let mut sites: Vec<usize> = (0..n_sites).collect();
            for k in 0..size {
                let swap = rng.random_range(k..n_sites);
                sites.swap(k, swap);
            }
            sites.truncate(size);
            let m = fam.local_size(size);
            let scale: f64 = rng.random_range(0.2..1.5);
            let mut rates = Vec::with_capacity(fam.space.size() * m);
            let mut x = vec![0; n_sites];
            for a in 0..fam.space.size() {
                fam.space.decode_into(a, &mut x);
                let here = encode_local(&sites.iter().map(|&s| x[s]).collect::<Vec<_>>(), q);
                let mut row: Vec<f64> = (0..m).map(|_| scale * rng.random::<f64>()).collect();
                if gauge {
                    let off: f64 = row.iter().enumerate().filter(|&(k, _)| k != here).map(|(_, r)| r).sum();
                    row[here] = (m as f64 - 1.0) * scale - off;
                }
                rates.extend(row);
            }
            fam.push(JumpTerm { sites, rates })?;
        }
        Ok(fam)
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn terms(&self) -> &[JumpTerm] {
        &self.terms
    }

    fn local_size(&self, len: usize) -> usize {
        self.q.pow(len as u32)
    }

    pub fn rates_at(&self, term: usize, x: usize) -> &[f64] {
        let m = self.local_size(self.terms[term].sites.len());
        &self.terms[term].rates[x * m..(x + 1) * m]
    }

    /// `J_S(x, E^S)`.
    pub fn total_mass(&self, term: usize, x: usize) -> f64 {
        self.rates_at(term, x).iter().sum()
    }
}

fn decode_local(mut k: usize, q: usize, z: &mut [usize]) {
    for v in z.iter_mut() {
        *v = k % q;
        k /= q;
    }
}

fn encode_local(z: &[usize], q: usize) -> usize {
    z.iter().rev().fold(0, |acc, &v| acc * q + v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IpsConstants {
    /// `c_S(j)` from the total-variation bound, per term and site.
    pub c_s_j_tv: Vec<Vec<f64>>,
    /// Exact optimal `c_S(j)` where `|E^S|` permits the LP.
    pub c_s_j_lp: Vec<Vec<Option<f64>>>,
    pub eta: f64,
    pub warnings: Vec<String>,
    #[serde(skip)]
    sites: Vec<Vec<usize>>,
    #[serde(skip)]
    n: usize,
}

/// Which `c_S(j)` feed the matrix `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantChoice {
    /// Exact LP value when available, otherwise the TV bound.
    Exact,
    Tv,
}

impl IpsConstants {
    pub fn c_s_j(&self, term: usize, j: usize, choice: ConstantChoice) -> f64 {
        match choice {
            ConstantChoice::Tv => self.c_s_j_tv[term][j],
            ConstantChoice::Exact => self.c_s_j_lp[term][j].unwrap_or(self.c_s_j_tv[term][j]),
        }
    }

    /// `c_ij = Σ_{S∋i} c_S(j)`.
    pub fn matrix(&self, choice: ConstantChoice) -> DMatrix<f64> {
        let mut c = DMatrix::zeros(self.n, self.n);
        for (k, sites) in self.sites.iter().enumerate() {
            for &i in sites {
                for j in 0..self.n {
                    c[(i, j)] += self.c_s_j(k, j, choice);
                }
            }
        }
        c
    }

    pub fn is_finite(&self) -> bool {
        self.c_s_j_tv.iter().flatten().all(|v| v.is_finite())
    }
}

/// `c_S(j)` by both routes and `η = min_x min_i Σ_{S∋i} J_S(x, E^S)`. The
/// supremum over `x = y off j` ranges over the declared window.
pub fn ips_constants(family: &JumpRateFamily, metric: &Metric) -> Result<IpsConstants> {
    let q = family.q;
    if metric.size() != q {
        return Err(invalid("metric size does not match the spin space"));
    }
    let space = &family.space;
    let n = space.n_sites();
    let diam = metric.diameter();
    let mut tv = vec![vec![0.0; n]; family.terms.len()];
    let mut lp = vec![vec![None; n]; family.terms.len()];
    let mut warnings = Vec::new();
    for (k, term) in family.terms.iter().enumerate() {
        let m = family.local_size(term.sites.len());
        let use_lp = m <= EXACT_RATE_LP_MAX_STATES;
        let mut varies = false;
        for j in 0..n {
            let mut best_tv = 0.0f64;
            let mut best_lp = 0.0f64;
            for x in 0..space.size() {
                let xj = space.value_at(x, j);
                for b in xj + 1..q {
                    let d = metric.distance(xj, b);
                    if d == 0.0 {
                        continue;
                    }
                    let y = space.with_value(x, j, b);
                    let (rx, ry) = (family.rates_at(k, x), family.rates_at(k, y));
                    let delta: Vec<f64> = rx.iter().zip(ry).map(|(a, b)| a - b).collect();
                    let scale = rx.iter().chain(ry).map(|v| v.abs()).fold(1.0, f64::max);
                    if delta.iter().sum::<f64>().abs() > 1e-12 * scale {
                        varies = true;
                        best_tv = f64::INFINITY;
                        best_lp = f64::INFINITY;
                        continue;
                    }
                    if delta.iter().all(|&v| v == 0.0) {
                        continue;
                    }
                    best_tv = best_tv.max(0.5 * diam * delta.iter().map(|v| v.abs()).sum::<f64>() / d);
                    if use_lp && best_lp.is_finite() {
                        best_lp = best_lp.max(optimal_constant(&delta, term.sites.len(), q, metric)? / d);
                    }
                }
            }
            tv[k][j] = best_tv;
            if use_lp {
                lp[k][j] = Some(best_lp);
            }
        }
        if varies {
            warnings.push(format!(
                "term {k} (sites {:?}): total mass J_S(x, E^S) depends on x, so c_S(j) is infinite; \
                 choose J_S(x, {{x_S}}) to make it constant",
                term.sites
            ));
        }
    }
    let mut eta = f64::INFINITY;
    for x in 0..space.size() {
        for i in 0..n {
            let s: f64 = (0..family.terms.len())
                .filter(|&k| family.terms[k].sites.contains(&i))
                .map(|k| family.total_mass(k, x))
                .sum();
            eta = eta.min(s);
        }
    }
    Ok(IpsConstants {
        c_s_j_tv: tv,
        c_s_j_lp: lp,
        eta: if eta.is_finite() { eta } else { 0.0 },
        warnings,
        sites: family.terms.iter().map(|t| t.sites.clone()).collect(),
        n,
    })
}

/// `sup { Σ_z g(z)Δ(z) : Σ_{i∈S} δ_i(g) ≤ 1 }` for a zero-sum `Δ` on `E^S`,
/// as an LP in `g` (with `g(0) = 0`) and per-site slopes `t_i ≥ δ_i(g)`.
pub fn optimal_constant(delta: &[f64], len: usize, q: usize, metric: &Metric) -> Result<f64> {
    let m = delta.len();
    let mut prog = Problem::new(OptimizationDirection::Maximize);
    let g: Vec<Option<Variable>> =
        (0..m).map(|z| (z > 0).then(|| prog.add_var(delta[z], (f64::NEG_INFINITY, f64::INFINITY)))).collect();
    let t: Vec<Variable> = (0..len).map(|_| prog.add_var(0.0, (0.0, f64::INFINITY))).collect();
    let mut za = vec![0; len];
    let mut zb = vec![0; len];
    for a in 0..m {
        decode_local(a, q, &mut za);
        for i in 0..len {
            for v in 0..q {
                if v == za[i] {
                    continue;
                }
                zb.copy_from_slice(&za);
                zb[i] = v;
                let b = encode_local(&zb, q);
                // g(a) − g(b) ≤ t_i d(a_i, b_i)
                let mut terms = vec![(t[i], -metric.distance(za[i], v))];
                terms.extend(g[a].map(|x| (x, 1.0)));
                terms.extend(g[b].map(|x| (x, -1.0)));
                prog.add_constraint(terms.as_slice(), ComparisonOp::Le, 0.0);
            }
        }
    }
    let all_t: Vec<(Variable, f64)> = t.iter().map(|&v| (v, 1.0)).collect();
    prog.add_constraint(all_t.as_slice(), ComparisonOp::Le, 1.0);
    let outcome = prog.solve().map_err(|e| Error::Internal(format!("rate-constant LP: {e}")))?;
    let solution = outcome
        .into_solution()
        .map_err(|_| Error::Internal("rate-constant LP stopped before reaching a solution".into()))?;
    Ok(solution.objective().max(0.0))
}

/// Generator with `L(x, x^{z_S}) += J_S(x, {z_S})`; not assumed reversible.
pub fn build_ips_generator(family: &JumpRateFamily) -> Result<GeneratorMatrix> {
    let space = family.space.clone();
    let mut x = vec![0; space.n_sites()];
    let mut rows = Vec::with_capacity(space.size());
    for a in 0..space.size() {
        space.decode_into(a, &mut x);
        let mut row = Vec::new();
        for (k, term) in family.terms.iter().enumerate() {
            let mut z = vec![0; term.sites.len()];
            for (loc, &r) in family.rates_at(k, a).iter().enumerate() {
                if r == 0.0 {
                    continue;
                }
                decode_local(loc, family.q, &mut z);
                let mut b = a;
                for (&s, &v) in term.sites.iter().zip(&z) {
                    b = space.with_value(b, s, v);
                }
                row.push((b, r));
            }
        }
        rows.push(row);
    }
    GeneratorMatrix::from_rates(space, rows)
}

/// Lipschitz contraction of the jump-rate semigroup against `e^{−t(η−C)}`.
pub fn check_ips_contraction(
    family: &JumpRateFamily,
    metric: &Metric,
    f: &[f64],
    t_grid: &[f64],
    choice: ConstantChoice,
) -> Result<ContractionReport> {
    let consts = ips_constants(family, metric)?;
    if !consts.is_finite() {
        return Err(invalid(consts.warnings.join("; ")));
    }
    let l = build_ips_generator(family)?;
    contraction_against(&l, metric, &consts.matrix(choice), consts.eta, f, t_grid)
}

/// Invariant law from the null space of `Lᵀ`, with the dimension of that
/// null space. The law is only returned when the null space is one-dimensional.
pub fn stationary_distribution(l: &GeneratorMatrix) -> Result<(Option<Vec<f64>>, usize)> {
    let n = l.size();
    let lt = l.dense().transpose();
    let scale = l.rate().max(1.0);
    let sv = lt.clone().singular_values();
    let multiplicity = sv.iter().filter(|&&s| s <= 1e-10 * scale).count();
    if multiplicity != 1 {
        return Ok((None, multiplicity));
    }
    let mut a = lt;
    for c in 0..n {
        a[(n - 1, c)] = 1.0;
    }
    let mut rhs = nalgebra::DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let sol = a.lu().solve(&rhs).ok_or_else(|| Error::Internal("stationary system singular".into()))?;
    let mut mu: Vec<f64> = sol.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = mu.iter().sum();
    mu.iter_mut().for_each(|v| *v /= total);
    Ok((Some(mu), multiplicity))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct W1DecayPoint {
    pub t: f64,
    pub w1: f64,
    /// `e^{−ηt} ‖e^{tC}‖₁ ∫ d_l1(x, y) μ(dy)`.
    pub bound_tight: f64,
    /// `e^{−t(η − ‖C‖₁)} ∫ d_l1(x, y) μ(dy)`.
    pub bound: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct W1DecayReport {
    pub x0: usize,
    pub eta: f64,
    pub norm1: f64,
    pub integral: f64,
    pub null_dimension: usize,
    pub tolerance: f64,
    pub points: Vec<W1DecayPoint>,
}

impl W1DecayReport {
    pub fn passed(&self) -> bool {
        self.points.iter().all(|p| p.margin >= -self.tolerance && p.w1 <= p.bound_tight + self.tolerance)
    }
}

/// `W1_{d_l1}(P_t(x0, ·), μ)` against its exponential envelope.
pub fn invariant_w1_decay(
    family: &JumpRateFamily,
    metric: &Metric,
    x0: usize,
    t_grid: &[f64],
) -> Result<W1DecayReport> {
    let consts = ips_constants(family, metric)?;
    if !consts.is_finite() {
        return Err(invalid(consts.warnings.join("; ")));
    }
    let c = consts.matrix(ConstantChoice::Exact);
    let n = family.space.n_sites();
    let entries: Vec<f64> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| c[(i, j)]).collect();
    let (norm1, _) = matrix_norms(&entries, n);
    let l = build_ips_generator(family)?;
    let space = &family.space;
    if x0 >= space.size() {
        return Err(invalid("initial state outside the state space"));
    }
    let (mu, null_dimension) = stationary_distribution(&l)?;
    let mut report = W1DecayReport {
        x0,
        eta: consts.eta,
        norm1,
        integral: f64::NAN,
        null_dimension,
        tolerance: INEQ_SLACK,
        points: Vec::new(),
    };
    let Some(mu) = mu else { return Ok(report) };
    let dist = |a: usize, b: usize| space.l1_distance(a, b, |u, v| metric.distance(u, v));
    let integral: f64 = mu.iter().enumerate().map(|(y, m)| m * dist(x0, y)).sum();
    report.integral = integral;
    let mut start = vec![0.0; space.size()];
    start[x0] = 1.0;
    for &t in t_grid {
        let row = semigroup_apply_left(&l, &start, t)?;
        let w1 = product_w1(&row, &mu, space, metric)?;
        let etc = matexp_small(&c, t);
        let col_max = (0..n).map(|j| (0..n).map(|i| etc[(i, j)]).sum::<f64>()).fold(0.0, f64::max);
        let bound_tight = (-consts.eta * t).exp() * col_max * integral;
        let bound = (-t * (consts.eta - norm1)).exp() * integral;
        report.points.push(W1DecayPoint { t, w1, bound_tight, bound, margin: bound - w1 });
    }
    Ok(report)
}
