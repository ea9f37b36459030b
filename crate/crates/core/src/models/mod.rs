//! Spin-model zoo: specifications, single-site and block conditionals, and
//! full joint tables for enumerable systems.
//!
//! Every enumerable family is compiled into a [`FiniteModel`]: a uniform spin
//! space of `q` values, per-site reference log-weights and a list of local
//! log-potential tables with the boundary condition already substituted.
//! Sign conventions of the Boltzmann weights:
//!
//! * Ising: `exp(Σ_S J(S) x^S)`, so `J > 0` favours aligned spins;
//! * Potts anti-ferromagnet: `exp(−J Σ_{ij} 1{x_i = x_j})`, `J > 0`;
//! * φ⁴ grid: `exp(Σ J_ij x_i x_j − Σ_i u(x_i))`, `u(x) = a x⁴ − b x²`.

mod file;
mod finite;
pub(crate) use finite::normalize_log;
mod gaussian;
mod phi4;

pub use file::{parse_model, parse_model_file, parse_model_table};
pub use finite::FiniteModel;
pub use gaussian::{GaussianConditional, GaussianPair};
pub use phi4::{default_half_width, phi4_single_site, symmetric_grid, Phi4Grid, Phi4SingleSite};

use std::collections::BTreeMap;

use crate::error::{invalid, Error, Result};
use crate::wasserstein::{Metric, MetricChoice};

/// Site reference inside a coupling: either a window site or a named
/// exterior site whose value comes from the boundary condition.
#[derive(Debug, Clone, PartialEq)]
pub enum Site {
    In(usize),
    Out(String),
}

impl From<usize> for Site {
    fn from(i: usize) -> Self {
        Site::In(i)
    }
}

/// Ordered, distinct site identifiers of the active window.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteSet {
    names: Vec<String>,
}

impl SiteSet {
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(invalid("a model needs at least one site"));
        }
        let mut sorted = names.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("site identifiers must be distinct"));
        }
        Ok(SiteSet { names })
    }

    pub fn numbered(n: usize) -> Self {
        SiteSet { names: (0..n).map(|i| i.to_string()).collect() }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Spin values of exterior sites, by name. Free boundary = empty map.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundaryCondition {
    pub values: BTreeMap<String, f64>,
}

impl BoundaryCondition {
    pub fn free() -> Self {
        Self::default()
    }

    pub fn value(&self, name: &str) -> Result<f64> {
        self.values
            .get(name)
            .copied()
            .ok_or_else(|| invalid(format!("boundary value for exterior site `{name}` is missing")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub sites: Vec<Site>,
    pub strength: f64,
}

impl Coupling {
    pub fn pair(i: usize, j: usize, strength: f64) -> Self {
        Coupling { sites: vec![Site::In(i), Site::In(j)], strength }
    }
}

/// Ising model on `{−1, +1}` with multi-body couplings `J(S)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingGeneral {
    pub sites: SiteSet,
    pub couplings: Vec<Coupling>,
    pub boundary: BoundaryCondition,
}

impl IsingGeneral {
    pub fn new(n_sites: usize, couplings: Vec<Coupling>) -> Self {
        IsingGeneral { sites: SiteSet::numbered(n_sites), couplings, boundary: BoundaryCondition::free() }
    }

    /// Open nearest-neighbour chain with coupling `beta`.
    pub fn chain(n: usize, beta: f64) -> Self {
        Self::new(n, (0..n.saturating_sub(1)).map(|i| Coupling::pair(i, i + 1, beta)).collect())
    }

    /// Star: site 0 coupled to every other site.
    pub fn star(n: usize, beta: f64) -> Self {
        Self::new(n, (1..n).map(|i| Coupling::pair(0, i, beta)).collect())
    }

    /// Free-boundary `w × h` square lattice, site `(r, c)` ↦ `r·w + c`.
    pub fn square(w: usize, h: usize, beta: f64) -> Self {
        let mut couplings = Vec::new();
        for r in 0..h {
            for c in 0..w {
                let i = r * w + c;
                if c + 1 < w {
                    couplings.push(Coupling::pair(i, i + 1, beta));
                }
                if r + 1 < h {
                    couplings.push(Coupling::pair(i, i + w, beta));
                }
            }
        }
        Self::new(w * h, couplings)
    }
}

/// Anti-ferromagnetic Potts model on `{1, .., N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PottsAf {
    pub sites: SiteSet,
    pub n_colors: usize,
    pub strength: f64,
    pub edges: Vec<(Site, Site)>,
    /// Lattice dimension the window is cut from (for the family bound).
    pub lattice_dim: usize,
    pub boundary: BoundaryCondition,
}

impl PottsAf {
    pub fn chain(n: usize, n_colors: usize, strength: f64) -> Self {
        PottsAf {
            sites: SiteSet::numbered(n),
            n_colors,
            strength,
            edges: (0..n.saturating_sub(1)).map(|i| (Site::In(i), Site::In(i + 1))).collect(),
            lattice_dim: 1,
            boundary: BoundaryCondition::free(),
        }
    }

    /// Degree of each window site (exterior neighbours included).
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.sites.len()];
        for (a, b) in &self.edges {
            for s in [a, b] {
                if let Site::In(i) = s {
                    deg[*i] += 1;
                }
            }
        }
        deg
    }
}

/// Independent sites with fixed marginals over a common value set.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeProduct {
    pub marginals: Vec<Vec<f64>>,
    /// Numeric value of each spin index; defaults to `0, 1, ..`.
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Ising(IsingGeneral),
    Potts(PottsAf),
    GaussianPair(GaussianPair),
    Phi4(Phi4Grid),
    Free(FreeProduct),
}

impl ModelSpec {
    pub fn family(&self) -> &'static str {
        match self {
            ModelSpec::Ising(_) => "ising",
            ModelSpec::Potts(_) => "potts",
            ModelSpec::GaussianPair(_) => "gaussian_pair",
            ModelSpec::Phi4(_) => "phi4",
            ModelSpec::Free(_) => "free_product",
        }
    }

    pub fn n_sites(&self) -> usize {
        match self {
            ModelSpec::Ising(m) => m.sites.len(),
            ModelSpec::Potts(m) => m.sites.len(),
            ModelSpec::GaussianPair(_) => 2,
            ModelSpec::Phi4(m) => m.sites.len(),
            ModelSpec::Free(m) => m.marginals.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Ising(m) => {
                for c in &m.couplings {
                    if !c.strength.is_finite() {
                        return Err(invalid("Ising couplings must be finite"));
                    }
                    if c.sites.is_empty() {
                        return Err(invalid("Ising coupling with empty site set"));
                    }
                    check_sites(&c.sites, m.sites.len())?;
                }
                Ok(())
            }
            ModelSpec::Potts(m) => {
                if m.n_colors < 2 {
                    return Err(invalid("Potts model needs N ≥ 2 colours"));
                }
                if !(m.strength > 0.0) || !m.strength.is_finite() {
                    return Err(invalid("Potts strength J must be finite and > 0"));
                }
                for (a, b) in &m.edges {
                    check_sites(&[a.clone(), b.clone()], m.sites.len())?;
                }
                Ok(())
            }
            ModelSpec::GaussianPair(g) => GaussianPair::new(g.rho).map(|_| ()),
            ModelSpec::Phi4(m) => m.validate(),
            ModelSpec::Free(m) => {
                if m.marginals.is_empty() {
                    return Err(invalid("free product needs at least one site"));
                }
                let q = m.marginals[0].len();
                if q == 0 || m.marginals.iter().any(|w| w.len() != q) {
                    return Err(invalid("free product marginals must share one nonempty value set"));
                }
                for w in &m.marginals {
                    crate::wasserstein::DiscreteDistribution::from_dense(w)?;
                }
                if let Some(v) = &m.values {
                    if v.len() != q {
                        return Err(invalid("free product values must match the marginal length"));
                    }
                }
                Ok(())
            }
        }
    }

    /// Compiles an enumerable model; the Gaussian pair has no finite form.
    pub fn finite(&self) -> Result<FiniteModel> {
        self.validate()?;
        FiniteModel::compile(self)
    }

    /// Resolves a metric choice against this model's spin space.
    pub fn metric(&self, choice: &MetricChoice) -> Result<Metric> {
        match self {
            ModelSpec::GaussianPair(_) => {
                Err(Error::UnsupportedModel("the Gaussian pair has no finite spin space; use the analytic path".into()))
            }
            _ => self.finite()?.metric(choice),
        }
    }
}

fn check_sites(sites: &[Site], n: usize) -> Result<()> {
    for s in sites {
        if let Site::In(i) = s {
            if *i >= n {
                return Err(invalid(format!("site index {i} outside window of {n} sites")));
            }
        }
    }
    Ok(())
}
