use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::models::{phi4_single_site, Coupling};
use crate::wasserstein::Metric;

/// One closed-form constant with the inequality it instantiates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedConstant {
    pub name: String,
    pub equation: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub valid: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub family: String,
    pub parameters: Vec<(String, f64)>,
    pub constants: Vec<NamedConstant>,
}

impl BoundReport {
    fn new(family: &str, parameters: &[(&str, f64)]) -> Self {
        BoundReport {
            family: family.into(),
            parameters: parameters.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            constants: Vec::new(),
        }
    }

    fn push(&mut self, name: &str, equation: &str, value: f64, valid: Option<bool>) -> &mut NamedConstant {
        self.constants.push(NamedConstant { name: name.into(), equation: equation.into(), value, valid, note: None });
        self.constants.last_mut().expect("just pushed")
    }

    pub fn get(&self, name: &str) -> Option<&NamedConstant> {
        self.constants.iter().find(|c| c.name == name)
    }

    /// Value of a named constant; panics on an unknown name.
    pub fn value(&self, name: &str) -> f64 {
        self.get(name).unwrap_or_else(|| panic!("no constant `{name}` in {} report", self.family)).value
    }

    pub fn flag(&self, name: &str) -> Option<bool> {
        self.get(name).and_then(|c| c.valid)
    }
}

/// `max_i Σ_{S∋i} (|S| − 1) tanh|J(S)|` over the window sites; exterior
/// sites count towards `|S|`.
pub fn ising_r_bound(couplings: &[Coupling]) -> f64 {
    use crate::models::Site;
    let mut per_site: std::collections::BTreeMap<usize, f64> = Default::default();
    for c in couplings {
        let w = (c.sites.len() as f64 - 1.0) * c.strength.abs().tanh();
        for s in &c.sites {
            if let Site::In(i) = s {
                *per_site.entry(*i).or_default() += w;
            }
        }
    }
    per_site.values().cloned().fold(0.0, f64::max)
}

/// Ising calculator as a report: `r` and the gap bound `1 − r` when `r < 1`.
pub fn ising_bounds(couplings: &[Coupling]) -> BoundReport {
    let r = ising_r_bound(couplings);
    let mut rep = BoundReport::new("ising", &[("couplings", couplings.len() as f64)]);
    rep.push("r_bound", "eq_5_1_r", r, Some(r < 1.0));
    rep.push("lambda1_lower", "eq_2_4_lambda1_lower", 1.0 - r, Some(r < 1.0));
    rep
}

/// Anti-ferromagnetic Potts bound on `ℤ^d`: `c_ij ≤ 1/(N − 2d)` for
/// neighbours, so both norms are at most `2d/(N − 2d)`.
pub fn potts_bound(n_colors: usize, dim: usize) -> Result<BoundReport> {
    if n_colors < 2 || dim < 1 {
        return Err(invalid(format!("Potts bound needs N ≥ 2 and d ≥ 1, got N = {n_colors}, d = {dim}")));
    }
    let (n, d) = (n_colors as f64, dim as f64);
    let mut r = BoundReport::new("potts", &[("N", n), ("d", d)]);
    if n_colors <= 2 * dim {
        let note = Some("inapplicable: N ≤ 2d".to_string());
        r.push("edge_bound", "eq_5_2_edge", f64::INFINITY, Some(false)).note = note.clone();
        r.push("norm_bound", "eq_5_2_norm", f64::INFINITY, Some(false)).note = note;
        return Ok(r);
    }
    let edge = 1.0 / (n - 2.0 * d);
    let norm = 2.0 * d * edge;
    let valid = n_colors > 4 * dim;
    r.push("edge_bound", "eq_5_2_edge", edge, None).note = Some("independent of the interaction strength J".into());
    r.push("norm_bound", "eq_5_2_norm", norm, Some(valid));
    r.push("lambda1_lower", "eq_2_4_lambda1_lower", 1.0 - norm, Some(valid));
    Ok(r)
}

/// `y / (1 − e^{−y})`, equal to 1 at `y = 0`.
fn chen_wang(y: f64) -> f64 {
    if y == 0.0 {
        1.0
    } else {
        y / -(-y).exp_m1()
    }
}

/// Constants of the `N = p + 1` vector model with interaction `γ = Σ|J|`.
pub fn nvector_bounds(p: usize, gamma: f64) -> Result<BoundReport> {
    if p < 1 || !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(invalid(format!("n-vector bounds need p ≥ 1 and finite γ ≥ 0, got p = {p}, γ = {gamma}")));
    }
    let pf = p as f64;
    let mut r = BoundReport::new("nvector", &[("p", pf), ("gamma", gamma)]);
    let lambda0 = chen_wang(PI * PI / 8.0 * (pf - 1.0 - gamma));
    r.push("lambda0", "eq_5_2_lambda0", lambda0, None);
    let k0 = (PI * PI / 4.0).min((2.0 * gamma).exp() / pf);
    r.push("K0", "eq_5_4_K0", k0, None);
    let sigma2 = 1.0f64.min(1.0 / lambda0);
    let sigma = sigma2.sqrt();
    r.push("sigma_E2_bound", "eq_5_6_sigma_E2", sigma2, None);
    let root = (pf + 1.0).sqrt();
    let cond57 = gamma < root / sigma;
    r.push("condition_5_7", "eq_5_7_threshold", root / sigma, Some(cond57));
    let thr59 = ((pf + 1.0) * lambda0).sqrt();
    r.push("condition_5_9", "eq_5_9_threshold", thr59, Some(gamma < thr59));
    let gap = 1.0 - gamma * sigma / root;
    r.push("lambda1_lower", "eq_5_8_lambda1_lower", gap, Some(cond57));
    r.push("lambda1_grad_lower", "eq_5_8_lambda1_grad_lower", gap * lambda0, Some(cond57));
    let k_tilde = if gamma < thr59 { k0 * lambda0 * (pf + 1.0) / (thr59 - gamma).powi(2) } else { f64::INFINITY };
    r.push("K_tilde", "eq_5_10_K_tilde", k_tilde, Some(gamma < thr59));
    let be = pf - 1.0 - 2.0 * gamma;
    r.push("bakry_emery_gap", "eq_5_14_gap", be, Some(be > 0.0));
    r.push("bakry_emery_K", "eq_5_14_K", if be > 0.0 { 1.0 / be } else { f64::INFINITY }, Some(be > 0.0));
    let a = 8.0 / (PI * PI) * (pf - 1.0) / (pf + 1.0);
    let thr513 = 2.0 / (1.0 + (1.0 + 4.0 * a).sqrt()) * (pf - 1.0);
    r.push("condition_5_13", "eq_5_13_threshold", thr513, Some(gamma < thr513));
    let levin = (pf + 1.0) / 5f64.sqrt();
    r.push("levin_threshold", "levin", levin, Some(gamma < levin));
    Ok(r)
}

/// `max(0, sup_θ var(m_θ)/σ² − 1)` over tilts `|θ| ≤ theta_max` of the grid
/// single-site measure, sampled on `samples` equispaced tilts including 0.
pub fn grid_slack(a: f64, b: f64, grid: &Metric, theta_max: f64, samples: usize) -> Result<f64> {
    let base = phi4_single_site(a, b, grid)?;
    let points = grid.line_points().expect("checked by phi4_single_site");
    let log_m: Vec<f64> = base.m.dense().iter().map(|w| w.ln()).collect();
    let half = samples.max(1);
    let mut worst = base.sigma2;
    let mut lw = vec![0.0; points.len()];
    for k in -(half as i64)..=half as i64 {
        let theta = theta_max * k as f64 / half as f64;
        for (l, (&x, &m)) in lw.iter_mut().zip(points.iter().zip(&log_m)) {
            *l = m + theta * x;
        }
        crate::models::normalize_log(&mut lw);
        let mean: f64 = lw.iter().zip(points).map(|(w, x)| w * x).sum();
        let var: f64 = lw.iter().zip(points).map(|(w, x)| w * (x - mean).powi(2)).sum();
        worst = worst.max(var);
    }
    Ok((worst / base.sigma2 - 1.0).max(0.0))
}

/// Constants of the φ⁴ field with interactions `J(k)` (one entry per
/// offset `k ≠ 0`) on the given grid.
pub fn phi4_bounds(a: f64, b: f64, couplings: &[f64], grid: &Metric, k0: Option<f64>) -> Result<BoundReport> {
    if !(a > 0.0) {
        return Err(invalid(format!("φ⁴ bounds need a > 0, got {a}")));
    }
    let single = phi4_single_site(a, b, grid)?;
    let sigma2 = single.sigma2;
    let gamma: f64 = couplings.iter().map(|j| j.abs()).sum();
    let mut r = BoundReport::new("phi4", &[("a", a), ("b", b), ("grid_points", grid.size() as f64)]);
    r.push("sigma2", "eq_5_17_sigma2", sigma2, None);
    let valid = gamma < 1.0 / sigma2;
    r.push("gamma", "eq_5_18_gamma", gamma, Some(valid));
    r.push("threshold", "eq_5_18_threshold", 1.0 / sigma2, Some(valid));
    r.push("lambda1_lower", "eq_5_19_lambda1_lower", 1.0 - sigma2 * gamma, Some(valid));
    for (k, j) in couplings.iter().enumerate() {
        r.push(&format!("c_bound[{k}]"), "eq_5_21_c_bound", sigma2 * j.abs(), None);
    }
    let c = match k0 {
        Some(k0) if valid => r.push("K_tilde", "eq_5_20_K_tilde", k0 / (1.0 - gamma * sigma2).powi(2), Some(true)),
        Some(_) => r.push("K_tilde", "eq_5_20_K_tilde", f64::INFINITY, Some(false)),
        None => r.push("K_tilde", "eq_5_20_K_tilde", f64::NAN, None),
    };
    if k0.is_none() {
        c.note = Some("unknown: K0 not supplied".into());
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{symmetric_grid, IsingGeneral};

    #[test]
    fn ising_lattice_bounds() {
        assert_eq!(ising_r_bound(&IsingGeneral::chain(5, 0.0).couplings), 0.0);
        let b: f64 = 0.3;
        assert!((ising_r_bound(&IsingGeneral::chain(5, b).couplings) - 2.0 * b.tanh()).abs() < 1e-15);
        assert!((ising_r_bound(&IsingGeneral::square(3, 3, b).couplings) - 4.0 * b.tanh()).abs() < 1e-15);
    }

    #[test]
    fn potts_examples() {
        let r = potts_bound(5, 1).unwrap();
        assert!((r.value("norm_bound") - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.flag("norm_bound"), Some(true));
        let r = potts_bound(9, 2).unwrap();
        assert!((r.value("norm_bound") - 0.8).abs() < 1e-15);
        let r = potts_bound(4, 1).unwrap();
        assert_eq!(r.value("norm_bound"), 1.0);
        assert_eq!(r.flag("norm_bound"), Some(false));
        let r = potts_bound(2, 1).unwrap();
        assert_eq!(r.flag("edge_bound"), Some(false));
    }

    #[test]
    fn nvector_examples() {
        let r = nvector_bounds(10, 0.0).unwrap();
        assert!((r.value("K0") - 0.1).abs() < 1e-15);
        let r = nvector_bounds(3, 2.0).unwrap();
        assert_eq!(r.value("lambda0"), 1.0);
        let r = nvector_bounds(2, 0.0).unwrap();
        let y = PI * PI / 8.0;
        assert!((r.value("lambda0") - y / (1.0 - (-y).exp())).abs() < 1e-14);
        assert!((r.value("lambda0") - 1.7405799399394095).abs() < 1e-14);
    }

    #[test]
    fn phi4_threshold_is_strict() {
        let g = symmetric_grid(64, 4.0).unwrap();
        let s2 = phi4_single_site(1.0, 0.0, &g).unwrap().sigma2;
        let kappa = 1.0 / (2.0 * s2);
        let r = phi4_bounds(1.0, 0.0, &[kappa, kappa], &g, Some(1.0)).unwrap();
        assert_eq!(r.flag("gamma"), Some(false));
        let r = phi4_bounds(1.0, 0.0, &[], &g, None).unwrap();
        assert_eq!(r.value("lambda1_lower"), 1.0);
        assert!(phi4_bounds(0.0, 0.0, &[], &g, None).is_err());
    }
}
