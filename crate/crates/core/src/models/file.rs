//! TOML model files.
//!
//! ```toml
//! family = "ising"          # ising | potts | gaussian_pair | phi4 | free_product
//! sites = 3                 # count, or a list of names
//! lattice = "chain"         # chain | star | square (with `width`), or explicit couplings
//! beta = 0.4
//! couplings = [{ sites = [0, "left"], j = 0.2 }]
//! [boundary]
//! left = 1
//! ```
//!
//! Integer site references index the window; strings name window sites or,
//! when not listed in `sites`, exterior sites whose values come from
//! `[boundary]`.

use std::path::Path;

use toml::{Table, Value};

use super::*;
use crate::error::{field, from_toml_error};
use crate::wasserstein::DiscreteDistribution;

pub fn parse_model_file(path: impl AsRef<Path>) -> Result<ModelSpec> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse { location: path.display().to_string(), message: e.to_string() })?;
    parse_model(&src)
}

pub fn parse_model(src: &str) -> Result<ModelSpec> {
    let table: Table = toml::from_str(src).map_err(|e| from_toml_error(src, &e))?;
    parse_model_table(&table)
}

pub fn parse_model_table(t: &Table) -> Result<ModelSpec> {
    let mut r = Reader { t, prefix: String::new(), used: vec!["family"] };
    let family = r.string("family")?;
    let spec = match family.as_str() {
        "ising" => ModelSpec::Ising(ising(&mut r)?),
        "potts" => ModelSpec::Potts(potts(&mut r)?),
        "gaussian_pair" => {
            let rho = r.float("rho")?;
            ModelSpec::GaussianPair(GaussianPair::new(rho).map_err(|e| field("rho", e.to_string()))?)
        }
        "phi4" => ModelSpec::Phi4(phi4(&mut r)?),
        "free_product" => ModelSpec::Free(free(&mut r)?),
        other => return Err(field("family", format!("unknown family `{other}`"))),
    };
    r.finish()?;
    spec.validate().map_err(|e| match e {
        Error::InvalidInput(m) => Error::Parse { location: "model".into(), message: m },
        e => e,
    })?;
    Ok(spec)
}

struct Reader<'a> {
    t: &'a Table,
    prefix: String,
    used: Vec<&'static str>,
}

impl<'a> Reader<'a> {
    fn path(&self, key: &str) -> String {
        format!("{}{key}", self.prefix)
    }

    fn get(&mut self, key: &'static str) -> Option<&'a Value> {
        self.used.push(key);
        self.t.get(key)
    }

    fn require(&mut self, key: &'static str) -> Result<&'a Value> {
        let p = self.path(key);
        self.get(key).ok_or_else(|| field(p, "missing"))
    }

    fn string(&mut self, key: &'static str) -> Result<String> {
        let p = self.path(key);
        self.require(key)?.as_str().map(str::to_string).ok_or_else(|| field(p, "expected a string"))
    }

    fn opt_string(&mut self, key: &'static str) -> Result<Option<String>> {
        let p = self.path(key);
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.as_str().map(|s| Some(s.to_string())).ok_or_else(|| field(p, "expected a string")),
        }
    }

    fn float(&mut self, key: &'static str) -> Result<f64> {
        let p = self.path(key);
        as_float(self.require(key)?).ok_or_else(|| field(p, "expected a number"))
    }

    fn opt_float(&mut self, key: &'static str) -> Result<Option<f64>> {
        let p = self.path(key);
        match self.get(key) {
            None => Ok(None),
            Some(v) => as_float(v).map(Some).ok_or_else(|| field(p, "expected a number")),
        }
    }

    fn count(&mut self, key: &'static str) -> Result<usize> {
        let p = self.path(key);
        as_count(self.require(key)?).ok_or_else(|| field(p, "expected a non-negative integer"))
    }

    fn opt_count(&mut self, key: &'static str) -> Result<Option<usize>> {
        let p = self.path(key);
        match self.get(key) {
            None => Ok(None),
            Some(v) => as_count(v).map(Some).ok_or_else(|| field(p, "expected a non-negative integer")),
        }
    }

    fn finish(&self) -> Result<()> {
        for k in self.t.keys() {
            if !self.used.contains(&k.as_str()) {
                return Err(field(self.path(k), "unknown field"));
            }
        }
        Ok(())
    }

    fn sites(&mut self) -> Result<SiteSet> {
        let p = self.path("sites");
        match self.require("sites")? {
            Value::Integer(n) if *n > 0 => Ok(SiteSet::numbered(*n as usize)),
            Value::Array(a) => {
                let names = a
                    .iter()
                    .enumerate()
                    .map(|(k, v)| {
                        v.as_str().map(str::to_string).ok_or_else(|| field(format!("{p}[{k}]"), "expected a site name"))
                    })
                    .collect::<Result<Vec<_>>>()?;
                SiteSet::new(names).map_err(|e| field(p, e.to_string()))
            }
            _ => Err(field(p, "expected a positive site count or a list of names")),
        }
    }

    fn boundary(&mut self) -> Result<BoundaryCondition> {
        let mut b = BoundaryCondition::free();
        if let Some(v) = self.get("boundary") {
            let tbl = v.as_table().ok_or_else(|| field("boundary", "expected a table"))?;
            for (k, v) in tbl {
                let x = as_float(v).ok_or_else(|| field(format!("boundary.{k}"), "expected a number"))?;
                b.values.insert(k.clone(), x);
            }
        }
        Ok(b)
    }
}

fn as_float(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn as_count(v: &Value) -> Option<usize> {
    v.as_integer().filter(|i| *i >= 0).map(|i| i as usize)
}

fn site_ref(v: &Value, sites: &SiteSet, path: &str) -> Result<Site> {
    match v {
        Value::Integer(i) if *i >= 0 && (*i as usize) < sites.len() => Ok(Site::In(*i as usize)),
        Value::Integer(i) => Err(field(path, format!("site index {i} outside the window of {} sites", sites.len()))),
        Value::String(s) => Ok(sites.index_of(s).map_or_else(|| Site::Out(s.clone()), Site::In)),
        _ => Err(field(path, "expected a site index or name")),
    }
}

fn couplings(r: &mut Reader, sites: &SiteSet, strength_key: &str) -> Result<Vec<Coupling>> {
    let Some(v) = r.get("couplings") else { return Ok(Vec::new()) };
    let arr = v.as_array().ok_or_else(|| field("couplings", "expected an array of tables"))?;
    let mut out = Vec::new();
    for (k, c) in arr.iter().enumerate() {
        let p = format!("couplings[{k}]");
        let tbl = c.as_table().ok_or_else(|| field(&p, "expected a table"))?;
        for key in tbl.keys() {
            if key != "sites" && key != strength_key {
                return Err(field(format!("{p}.{key}"), "unknown field"));
            }
        }
        let list = tbl
            .get("sites")
            .and_then(Value::as_array)
            .ok_or_else(|| field(format!("{p}.sites"), "expected a list of sites"))?;
        let refs = list
            .iter()
            .enumerate()
            .map(|(m, s)| site_ref(s, sites, &format!("{p}.sites[{m}]")))
            .collect::<Result<Vec<_>>>()?;
        let strength = tbl
            .get(strength_key)
            .and_then(as_float)
            .ok_or_else(|| field(format!("{p}.{strength_key}"), "expected a number"))?;
        out.push(Coupling { sites: refs, strength });
    }
    Ok(out)
}

fn lattice_pairs(r: &mut Reader, n: usize) -> Result<Vec<(usize, usize)>> {
    let Some(kind) = r.opt_string("lattice")? else { return Ok(Vec::new()) };
    let width = r.opt_count("width")?;
    let pairs = match kind.as_str() {
        "chain" => (1..n).map(|i| (i - 1, i)).collect(),
        "star" => (1..n).map(|i| (0, i)).collect(),
        "square" => {
            let w = width.ok_or_else(|| field("width", "square lattice needs `width`"))?;
            if w == 0 || n % w != 0 {
                return Err(field("width", format!("width {w} does not divide {n} sites")));
            }
            let IsingGeneral { couplings, .. } = IsingGeneral::square(w, n / w, 0.0);
            couplings
                .iter()
                .map(|c| match (&c.sites[0], &c.sites[1]) {
                    (Site::In(a), Site::In(b)) => (*a, *b),
                    _ => unreachable!(),
                })
                .collect()
        }
        other => return Err(field("lattice", format!("unknown lattice `{other}`"))),
    };
    Ok(pairs)
}

fn ising(r: &mut Reader) -> Result<IsingGeneral> {
    let sites = r.sites()?;
    let mut couplings = couplings(r, &sites, "j")?;
    let beta = r.opt_float("beta")?;
    let pairs = lattice_pairs(r, sites.len())?;
    if !pairs.is_empty() {
        let beta = beta.ok_or_else(|| field("beta", "a lattice needs `beta`"))?;
        couplings.extend(pairs.into_iter().map(|(a, b)| Coupling::pair(a, b, beta)));
    }
    if let Some(h) = r.opt_float("field")? {
        couplings.extend((0..sites.len()).map(|i| Coupling { sites: vec![Site::In(i)], strength: h }));
    }
    let boundary = r.boundary()?;
    Ok(IsingGeneral { sites, couplings, boundary })
}

fn potts(r: &mut Reader) -> Result<PottsAf> {
    let sites = r.sites()?;
    let n_colors = r.count("colors")?;
    let strength = r.float("j")?;
    let lattice_dim = r.opt_count("lattice_dim")?.unwrap_or(1);
    let mut edges: Vec<(Site, Site)> =
        lattice_pairs(r, sites.len())?.into_iter().map(|(a, b)| (Site::In(a), Site::In(b))).collect();
    if let Some(v) = r.get("edges") {
        let arr = v.as_array().ok_or_else(|| field("edges", "expected a list of site pairs"))?;
        for (k, e) in arr.iter().enumerate() {
            let p = format!("edges[{k}]");
            match e.as_array().map(Vec::as_slice) {
                Some([a, b]) => edges.push((site_ref(a, &sites, &p)?, site_ref(b, &sites, &p)?)),
                _ => return Err(field(p, "expected a pair of sites")),
            }
        }
    }
    let boundary = r.boundary()?;
    Ok(PottsAf { sites, n_colors, strength, edges, lattice_dim, boundary })
}

fn phi4(r: &mut Reader) -> Result<Phi4Grid> {
    let sites = r.sites()?;
    let a = r.float("a")?;
    let b = r.opt_float("b")?.unwrap_or(0.0);
    let grid_points = r.opt_count("grid_points")?.unwrap_or(64);
    let half_width = r.opt_float("half_width")?;
    let mut couplings = couplings(r, &sites, "j")?;
    let kappa = r.opt_float("kappa")?;
    let pairs = lattice_pairs(r, sites.len())?;
    if !pairs.is_empty() {
        let kappa = kappa.ok_or_else(|| field("kappa", "a lattice needs `kappa`"))?;
        couplings.extend(pairs.into_iter().map(|(x, y)| Coupling::pair(x, y, kappa)));
    }
    let boundary = r.boundary()?;
    Ok(Phi4Grid { sites, a, b, grid_points, half_width, couplings, boundary })
}

fn free(r: &mut Reader) -> Result<FreeProduct> {
    let arr =
        r.require("marginals")?.as_array().ok_or_else(|| field("marginals", "expected a list of weight lists"))?;
    let mut marginals = Vec::new();
    for (k, row) in arr.iter().enumerate() {
        let p = format!("marginals[{k}]");
        let w = float_list(row, &p)?;
        DiscreteDistribution::from_dense(&w).map_err(|e| field(&p, e.to_string()))?;
        marginals.push(w);
    }
    let values = match r.get("values") {
        None => None,
        Some(v) => Some(float_list(v, "values")?),
    };
    Ok(FreeProduct { marginals, values })
}

fn float_list(v: &Value, path: &str) -> Result<Vec<f64>> {
    let arr = v.as_array().ok_or_else(|| field(path, "expected a list of numbers"))?;
    arr.iter()
        .enumerate()
        .map(|(k, x)| as_float(x).ok_or_else(|| field(format!("{path}[{k}]"), "expected a number")))
        .collect()
}
