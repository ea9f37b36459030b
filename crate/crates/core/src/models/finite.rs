use super::{ModelSpec, Site};
use crate::error::{invalid, Error, Result};
use crate::space::ProductSpace;
use crate::tolerance::DEFAULT_STATE_CAP;
use crate::wasserstein::{DiscreteDistribution, Metric, MetricChoice};

/// Largest configuration space that may be indexed at all; tables are
/// separately capped by [`DEFAULT_STATE_CAP`].
const INDEX_CAP: usize = 1 << 40;

#[derive(Debug, Clone)]
struct Factor {
    sites: Vec<usize>,
    log_table: Vec<f64>,
}

/// Enumerable local specification with the boundary condition substituted.
#[derive(Debug, Clone)]
pub struct FiniteModel {
    family: &'static str,
    space: ProductSpace,
    q: usize,
    values: Vec<f64>,
    log_ref: Vec<Vec<f64>>,
    factors: Vec<Factor>,
    site_factors: Vec<Vec<usize>>,
}

impl FiniteModel {
    pub(super) fn compile(spec: &ModelSpec) -> Result<Self> {
        match spec {
            ModelSpec::Ising(m) => {
                let n = m.sites.len();
                let mut b = Builder::new("ising", n, vec![-1.0, 1.0]);
                for c in &m.couplings {
                    let mut active = Vec::new();
                    let mut outer = 1.0;
                    for s in &c.sites {
                        match s {
                            Site::In(i) => {
                                if active.contains(i) {
                                    return Err(invalid("Ising coupling lists a site twice"));
                                }
                                active.push(*i);
                            }
                            Site::Out(name) => {
                                let v = m.boundary.value(name)?;
                                if v != 1.0 && v != -1.0 {
                                    return Err(invalid(format!("Ising boundary value of `{name}` must be ±1")));
                                }
                                outer *= v;
                            }
                        }
                    }
                    let j = c.strength * outer;
                    b.add(active, |vals| j * vals.iter().product::<f64>());
                }
                b.finish()
            }
            ModelSpec::Potts(m) => {
                let n = m.sites.len();
                let colors: Vec<f64> = (1..=m.n_colors).map(|c| c as f64).collect();
                let mut b = Builder::new("potts", n, colors);
                let j = m.strength;
                for (s, t) in &m.edges {
                    let side = |x: &Site| -> Result<std::result::Result<usize, f64>> {
                        match x {
                            Site::In(i) => Ok(Ok(*i)),
                            Site::Out(name) => {
                                let v = m.boundary.value(name)?;
                                if v.fract() != 0.0 || v < 1.0 || v > m.n_colors as f64 {
                                    return Err(invalid(format!(
                                        "Potts boundary colour of `{name}` must be an integer in 1..={}",
                                        m.n_colors
                                    )));
                                }
                                Ok(Err(v))
                            }
                        }
                    };
                    match (side(s)?, side(t)?) {
                        (Ok(a), Ok(c)) => {
                            if a == c {
                                return Err(invalid("Potts edge joins a site to itself"));
                            }
                            b.add(vec![a, c], |v| if v[0] == v[1] { -j } else { 0.0 })
                        }
                        (Ok(a), Err(col)) | (Err(col), Ok(a)) => b.add(vec![a], |v| if v[0] == col { -j } else { 0.0 }),
                        (Err(_), Err(_)) => {}
                    }
                }
                b.finish()
            }
            ModelSpec::Phi4(m) => {
                let n = m.sites.len();
                let grid = m.grid_metric()?;
                let single = super::phi4_single_site(m.a, m.b, &grid)?;
                let points = grid.line_points().expect("line metric").to_vec();
                let log_m: Vec<f64> = single.m.dense().iter().map(|w| w.ln()).collect();
                let mut b = Builder::new("phi4", n, points);
                for row in b.log_ref.iter_mut() {
                    row.clone_from(&log_m);
                }
                for c in &m.couplings {
                    let j = c.strength;
                    let mut active = Vec::new();
                    let mut outer = 1.0;
                    for s in &c.sites {
                        match s {
                            Site::In(i) => active.push(*i),
                            Site::Out(name) => outer *= m.boundary.value(name)?,
                        }
                    }
                    if c.sites.len() != 2 || (active.len() == 2 && active[0] == active[1]) {
                        return Err(invalid("φ⁴ couplings join two distinct sites"));
                    }
                    let jj = j * outer;
                    b.add(active, |v| jj * v.iter().product::<f64>());
                }
                b.finish()
            }
            ModelSpec::Free(m) => {
                let q = m.marginals[0].len();
                let values = m.values.clone().unwrap_or_else(|| (0..q).map(|v| v as f64).collect());
                let mut b = Builder::new("free_product", m.marginals.len(), values);
                for (row, w) in b.log_ref.iter_mut().zip(&m.marginals) {
                    let total: f64 = w.iter().sum();
                    *row = w.iter().map(|x| (x / total).ln()).collect();
                }
                b.finish()
            }
            ModelSpec::GaussianPair(_) => {
                Err(Error::UnsupportedModel("the Gaussian pair is continuous; no enumerable form".into()))
            }
        }
    }

    pub fn family(&self) -> &'static str {
        self.family
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    pub fn n_sites(&self) -> usize {
        self.space.n_sites()
    }

    /// Number of spin values per site.
    pub fn q(&self) -> usize {
        self.q
    }

    /// Numeric value of each spin index (±1 for Ising, colours, grid points).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Whether the conditional at `i` can depend on the spin at `j`.
    pub fn interacts(&self, i: usize, j: usize) -> bool {
        self.site_factors[i].iter().any(|&f| self.factors[f].sites.contains(&j))
    }

    pub fn metric(&self, choice: &MetricChoice) -> Result<Metric> {
        match choice {
            MetricChoice::Trivial => Ok(Metric::trivial(self.q)),
            MetricChoice::Euclidean => Metric::line(self.values.clone()),
            MetricChoice::Table(m) => {
                if m.size() != self.q {
                    return Err(invalid(format!("metric has {} points, spin space has {}", m.size(), self.q)));
                }
                Ok(m.clone())
            }
        }
    }

    /// Natural metric of the family: trivial for discrete spins, `|x − y|`
    /// for the φ⁴ grid.
    pub fn default_metric(&self) -> Metric {
        if self.family == "phi4" {
            Metric::line(self.values.clone()).expect("grid points are distinct")
        } else {
            Metric::trivial(self.q)
        }
    }

    #[inline]
    fn factor_value(&self, f: &Factor, x: &[usize]) -> f64 {
        let mut idx = 0;
        let mut stride = 1;
        for &s in &f.sites {
            idx += x[s] * stride;
            stride *= self.q;
        }
        f.log_table[idx]
    }

    pub fn log_weight(&self, x: &[usize]) -> f64 {
        let r: f64 = x.iter().enumerate().map(|(i, &v)| self.log_ref[i][v]).sum();
        r + self.factors.iter().map(|f| self.factor_value(f, x)).sum::<f64>()
    }

    /// Writes `μ_i(·|x)` into `out` (length `q`); `x_i` is ignored.
    pub fn conditional_into(&self, i: usize, x: &mut [usize], out: &mut [f64]) {
        let keep = x[i];
        for a in 0..self.q {
            x[i] = a;
            let mut lw = self.log_ref[i][a];
            for &f in &self.site_factors[i] {
                lw += self.factor_value(&self.factors[f], x);
            }
            out[a] = lw;
        }
        x[i] = keep;
        normalize_log(out);
    }

    pub fn conditional_probs(&self, i: usize, x: &[usize]) -> Vec<f64> {
        let mut xs = x.to_vec();
        let mut out = vec![0.0; self.q];
        self.conditional_into(i, &mut xs, &mut out);
        out
    }

    /// Single-site conditional `μ_i(·|x)`.
    pub fn conditional(&self, i: usize, x: &[usize]) -> Result<DiscreteDistribution> {
        if i >= self.n_sites() || x.len() != self.n_sites() || x.iter().any(|&v| v >= self.q) {
            return Err(invalid("configuration does not match the model"));
        }
        DiscreteDistribution::from_dense(&self.conditional_probs(i, x))
    }

    pub fn joint_table(&self) -> Result<Vec<f64>> {
        self.joint_table_capped(DEFAULT_STATE_CAP)
    }

    /// Normalised Gibbs measure over the window, in mixed-radix order.
    pub fn joint_table_capped(&self, cap: usize) -> Result<Vec<f64>> {
        if self.space.size() > cap {
            return Err(Error::SizeLimit { what: "joint table", needed: self.space.size(), cap });
        }
        let mut table = Vec::with_capacity(self.space.size());
        let mut x = vec![0; self.n_sites()];
        for k in 0..self.space.size() {
            self.space.decode_into(k, &mut x);
            table.push(self.log_weight(&x));
        }
        normalize_log(&mut table);
        Ok(table)
    }

    /// Block conditional `μ_S(·|x)` over `E^S`, little-endian in the order of
    /// `block`.
    pub fn conditional_block(&self, block: &[usize], x: &[usize]) -> Result<Vec<f64>> {
        self.conditional_block_capped(block, x, DEFAULT_STATE_CAP)
    }

    pub fn conditional_block_capped(&self, block: &[usize], x: &[usize], cap: usize) -> Result<Vec<f64>> {
        if x.len() != self.n_sites() || block.iter().any(|&s| s >= self.n_sites()) {
            return Err(invalid("block or configuration does not match the model"));
        }
        let local = ProductSpace::uniform(block.len().max(1), self.q, cap)?;
        if block.is_empty() {
            return Ok(vec![1.0]);
        }
        let mut xs = x.to_vec();
        let mut out = Vec::with_capacity(local.size());
        for k in 0..local.size() {
            for (pos, &s) in block.iter().enumerate() {
                xs[s] = local.value_at(k, pos);
            }
            out.push(self.log_weight(&xs));
        }
        normalize_log(&mut out);
        Ok(out)
    }

    /// Expectation of a per-site function of the spin value under a table.
    pub fn site_marginal(&self, table: &[f64], site: usize) -> Vec<f64> {
        let mut m = vec![0.0; self.q];
        for (k, &p) in table.iter().enumerate() {
            m[self.space.value_at(k, site)] += p;
        }
        m
    }
}

pub(crate) fn normalize_log(v: &mut [f64]) {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        total += *x;
    }
    for x in v.iter_mut() {
        *x /= total;
    }
}

struct Builder {
    family: &'static str,
    n: usize,
    values: Vec<f64>,
    log_ref: Vec<Vec<f64>>,
    factors: Vec<Factor>,
}

impl Builder {
    fn new(family: &'static str, n: usize, values: Vec<f64>) -> Self {
        let q = values.len();
        Builder { family, n, values, log_ref: vec![vec![0.0; q]; n], factors: Vec::new() }
    }

    /// `potential` receives the spin values of `sites` in order.
    fn add(&mut self, sites: Vec<usize>, potential: impl Fn(&[f64]) -> f64) {
        if sites.is_empty() {
            return;
        }
        let q = self.values.len();
        let size = q.pow(sites.len() as u32);
        let mut vals = vec![0.0; sites.len()];
        let log_table = (0..size)
            .map(|mut k| {
                for v in vals.iter_mut() {
                    *v = self.values[k % q];
                    k /= q;
                }
                potential(&vals)
            })
            .collect();
        self.factors.push(Factor { sites, log_table });
    }

    fn finish(self) -> Result<FiniteModel> {
        let space = ProductSpace::uniform(self.n, self.values.len(), INDEX_CAP)?;
        let mut site_factors = vec![Vec::new(); self.n];
        for (k, f) in self.factors.iter().enumerate() {
            for &s in &f.sites {
                site_factors[s].push(k);
            }
        }
        Ok(FiniteModel {
            family: self.family,
            q: self.values.len(),
            space,
            values: self.values,
            log_ref: self.log_ref,
            factors: self.factors,
            site_factors,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;

    #[test]
    fn two_site_ising_joint() {
        let beta: f64 = 0.7;
        let m = ModelSpec::Ising(IsingGeneral::chain(2, beta)).finite().unwrap();
        let t = m.joint_table().unwrap();
        let z = 2.0 * beta.exp() + 2.0 * (-beta).exp();
        assert!((t[m.space().encode(&[1, 1])] - beta.exp() / z).abs() < 1e-15);
        assert!((t[m.space().encode(&[0, 1])] - (-beta).exp() / z).abs() < 1e-15);
    }

    #[test]
    fn two_site_ising_conditional() {
        let beta: f64 = 0.4;
        let m = ModelSpec::Ising(IsingGeneral::chain(2, beta)).finite().unwrap();
        for (x2, s) in [(0usize, -1.0f64), (1, 1.0)] {
            let p = m.conditional_probs(0, &[0, x2]);
            let expect = (beta * s).exp() / ((beta * s).exp() + (-beta * s).exp());
            assert!((p[1] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn potts_ratio_penalises_equal_colours() {
        let j: f64 = 1.3;
        let m = ModelSpec::Potts(PottsAf::chain(2, 5, j)).finite().unwrap();
        let t = m.joint_table().unwrap();
        let s = m.space();
        let ratio = t[s.encode(&[2, 2])] / t[s.encode(&[2, 4])];
        assert!((ratio - (-j).exp()).abs() < 1e-14);
    }

    #[test]
    fn free_product_tensorizes() {
        let spec = ModelSpec::Free(FreeProduct {
            marginals: vec![vec![0.2, 0.8], vec![0.5, 0.5], vec![0.9, 0.1]],
            values: None,
        });
        let m = spec.finite().unwrap();
        let t = m.joint_table().unwrap();
        for (k, x) in m.space().states().enumerate() {
            let w = [0.2, 0.8][x[0]] * 0.5 * [0.9, 0.1][x[2]];
            assert!((t[k] - w).abs() < 1e-15);
        }
        assert_eq!(m.conditional_probs(0, &[0, 1, 1]), m.conditional_probs(0, &[1, 0, 0]));
    }

    #[test]
    fn boundary_values_required() {
        let mut ising = IsingGeneral::chain(2, 0.5);
        ising.couplings.push(Coupling { sites: vec![Site::In(0), Site::Out("left".into())], strength: 0.5 });
        let spec = ModelSpec::Ising(ising.clone());
        assert!(spec.finite().is_err());
        ising.boundary.values.insert("left".into(), 1.0);
        let fm = ModelSpec::Ising(ising).finite().unwrap();
        // The + boundary tilts site 0 upward.
        let p = fm.conditional_probs(0, &[0, 0]);
        assert!((p[1] - 0.5).abs() < 1e-15);
        let p = fm.conditional_probs(0, &[0, 1]);
        assert!(p[1] > 0.5);
    }

    #[test]
    fn block_conditional_matches_enumeration() {
        let m = ModelSpec::Ising(IsingGeneral::chain(3, 0.6)).finite().unwrap();
        let t = m.joint_table().unwrap();
        let s = m.space();
        for x1 in 0..2 {
            let block = m.conditional_block(&[1, 2], &[x1, 0, 0]).unwrap();
            let z: f64 = (0..4).map(|k| t[s.encode(&[x1, k % 2, k / 2])]).sum();
            for k in 0..4 {
                let brute = t[s.encode(&[x1, k % 2, k / 2])] / z;
                assert!((block[k] - brute).abs() < 1e-14);
            }
        }
        let single = m.conditional_block(&[1], &[1, 0, 1]).unwrap();
        assert_eq!(single, m.conditional_probs(1, &[1, 0, 1]));
    }
}
