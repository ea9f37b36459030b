//! Continuous-time heat-bath simulation, exact sampling from enumerated
//! tables and autocovariance estimates against certified envelopes.
//!
//! Replica `r` of master seed `s` draws from `ChaCha8Rng::seed_from_u64(s)`
//! on stream `r`, so replicas are independent and individually reproducible.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;
use serde::Serialize;

use crate::dobrushin::{interdependence_finite, GapCertificate};
use crate::error::{invalid, Error, Result};
use crate::models::FiniteModel;
use crate::tolerance::DEFAULT_STATE_CAP;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SeedSpec {
    pub master: u64,
}

impl SeedSpec {
    pub fn new(master: u64) -> Self {
        SeedSpec { master }
    }

    pub fn rng(&self, replica: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(replica);
        rng
    }
}

/// One clock ring: site `site` resampled to `new_value` at `time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub time: f64,
    pub site: usize,
    pub new_value: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub initial: Vec<usize>,
    pub events: Vec<Event>,
    pub t_max: f64,
}

impl Trajectory {
    /// Configuration at time `t` (right-continuous).
    pub fn state_at(&self, t: f64) -> Vec<usize> {
        let mut x = self.initial.clone();
        for e in self.events.iter().take_while(|e| e.time <= t) {
            x[e.site] = e.new_value;
        }
        x
    }

    pub fn final_state(&self) -> Vec<usize> {
        self.state_at(self.t_max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("time,site,new_value\n");
        for e in &self.events {
            s.push_str(&format!("{:e},{},{}\n", e.time, e.site, e.new_value));
        }
        s
    }
}

fn check_config(model: &FiniteModel, x: &[usize]) -> Result<()> {
    if x.len() != model.n_sites() || x.iter().any(|&v| v >= model.q()) {
        return Err(invalid("initial configuration does not match the model"));
    }
    Ok(())
}

/// Heat-bath dynamics by a global `Exp(|T|)` clock and a uniform site pick;
/// equal in law to independent rate-1 clocks at every site.
pub fn gillespie(model: &FiniteModel, x0: &[usize], t_max: f64, rng: &mut impl Rng) -> Result<Trajectory> {
    check_config(model, x0)?;
    if !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(invalid(format!("t_max must be finite and ≥ 0, got {t_max}")));
    }
    let n = model.n_sites();
    let clock = Exp::new(n as f64).map_err(|e| Error::Internal(e.to_string()))?;
    let mut x = x0.to_vec();
    let mut p = vec![0.0; model.q()];
    let mut events = Vec::new();
    let mut t = 0.0;
    loop {
        t += clock.sample(rng);
        if t > t_max {
            break;
        }
        let site = rng.random_range(0..n);
        model.conditional_into(site, &mut x, &mut p);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut v = p.len() - 1;
        for (k, &pk) in p.iter().enumerate() {
            acc += pk;
            if u < acc {
                v = k;
                break;
            }
        }
        x[site] = v;
        events.push(Event { time: t, site, new_value: v });
    }
    Ok(Trajectory { initial: x0.to_vec(), events, t_max })
}

/// `n` state indices drawn by inverse CDF over the mixed-radix order.
pub fn exact_sample(mu: &[f64], n: usize, rng: &mut impl Rng) -> Result<Vec<usize>> {
    if mu.len() > DEFAULT_STATE_CAP {
        return Err(Error::SizeLimit { what: "exact sampling table", needed: mu.len(), cap: DEFAULT_STATE_CAP });
    }
    let dist = WeightedIndex::new(mu).map_err(|e| invalid(format!("not a sampling table: {e}")))?;
    Ok((0..n).map(|_| dist.sample(rng)).collect())
}

/// Default burn-in `10·|T|/gap` when no exact sampler is available.
pub fn default_burn_in(n_sites: usize, gap: f64) -> f64 {
    10.0 * n_sites as f64 / gap
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AutocovPoint {
    pub t: f64,
    pub autocov: f64,
    pub ci_half: f64,
    pub envelope: f64,
}

impl AutocovPoint {
    pub fn within_envelope(&self) -> bool {
        self.autocov <= self.envelope + self.ci_half
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AutocovReport {
    pub replicas: usize,
    pub seed: u64,
    pub r_sp: f64,
    pub variance: f64,
    /// `None` when replicas start from exact samples of μ.
    pub burn_in: Option<f64>,
    pub points: Vec<AutocovPoint>,
    pub warnings: Vec<String>,
}

impl AutocovReport {
    pub fn passed(&self) -> bool {
        self.points.iter().all(AutocovPoint::within_envelope)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,autocov,ci_half,envelope\n");
        for p in &self.points {
            s.push_str(&format!("{},{:e},{:e},{:e}\n", p.t, p.autocov, p.ci_half, p.envelope));
        }
        s
    }
}

/// Minimal replica count below which the confidence interval is flagged.
pub const MIN_REPLICAS: usize = 100;

/// `ρ_f(t) = Cov(f(X_0), f(X_t))` over independent stationary replicas, with
/// 95% normal confidence half-widths, against `Var(f)·e^{−(1−r_sp)t}`.
pub fn autocorrelation_decay(
    model: &FiniteModel,
    f: &dyn Fn(&[usize]) -> f64,
    t_grid: &[f64],
    replicas: usize,
    seed: SeedSpec,
) -> Result<AutocovReport> {
    if t_grid.is_empty() || t_grid.iter().any(|t| !(*t >= 0.0)) || t_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(invalid("t-grid must be nonempty, nonnegative and sorted"));
    }
    if replicas < 2 {
        return Err(invalid("at least two replicas are needed for a confidence interval"));
    }
    let metric = model.default_metric();
    let c = interdependence_finite(model, &metric)?;
    let cert = GapCertificate::from_matrix(&c, None);
    let mut warnings = Vec::new();
    if replicas < MIN_REPLICAS {
        warnings.push(format!("only {replicas} replicas; confidence intervals have low statistical power"));
    }
    let table = model.joint_table().ok();
    let t_max = *t_grid.last().expect("nonempty");
    let n = model.n_sites();
    let mut burn_in = None;
    let starts: Vec<Vec<usize>> = match &table {
        Some(mu) => {
            let mut rng = seed.rng(u64::MAX);
            exact_sample(mu, replicas, &mut rng)?.into_iter().map(|k| model.space().decode(k)).collect()
        }
        None => {
            if !cert.valid {
                return Err(invalid("no exact sampler and no certified gap to size the burn-in"));
            }
            let b = default_burn_in(n, cert.lambda1_bound);
            burn_in = Some(b);
            let mut out = Vec::with_capacity(replicas);
            for r in 0..replicas {
                let mut rng = seed.rng(u64::MAX - 1 - r as u64);
                out.push(gillespie(model, &vec![0; n], b, &mut rng)?.final_state());
            }
            out
        }
    };
    let mut values = vec![vec![0.0; t_grid.len()]; replicas];
    let mut f0 = vec![0.0; replicas];
    for (r, x0) in starts.iter().enumerate() {
        let mut rng = seed.rng(r as u64);
        let traj = gillespie(model, x0, t_max, &mut rng)?;
        f0[r] = f(x0);
        let mut x = x0.clone();
        let mut ev = traj.events.iter().peekable();
        for (k, &t) in t_grid.iter().enumerate() {
            while let Some(e) = ev.next_if(|e| e.time <= t) {
                x[e.site] = e.new_value;
            }
            values[r][k] = f(&x);
        }
    }
    let (mean, variance) = match &table {
        Some(mu) => {
            let fx: Vec<f64> = model.space().states().map(|x| f(&x)).collect();
            let m: f64 = mu.iter().zip(&fx).map(|(p, v)| p * v).sum();
            (m, mu.iter().zip(&fx).map(|(p, v)| p * (v - m).powi(2)).sum())
        }
        None => {
            let m = f0.iter().sum::<f64>() / replicas as f64;
            (m, f0.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (replicas - 1) as f64)
        }
    };
    let rf = replicas as f64;
    let points = t_grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let prods: Vec<f64> = (0..replicas).map(|r| (f0[r] - mean) * (values[r][k] - mean)).collect();
            let est = prods.iter().sum::<f64>() / rf;
            let var = prods.iter().map(|p| (p - est).powi(2)).sum::<f64>() / (rf - 1.0);
            AutocovPoint {
                t,
                autocov: est,
                ci_half: 1.96 * (var / rf).sqrt(),
                envelope: variance * (-(1.0 - cert.r_sp) * t).exp(),
            }
        })
        .collect();
    Ok(AutocovReport { replicas, seed: seed.master, r_sp: cert.r_sp, variance, burn_in, points, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{IsingGeneral, ModelSpec};

    #[test]
    fn zero_horizon_has_no_events() {
        let m = ModelSpec::Ising(IsingGeneral::chain(3, 0.2)).finite().unwrap();
        let t = gillespie(&m, &[0, 1, 0], 0.0, &mut SeedSpec::new(1).rng(0)).unwrap();
        assert!(t.events.is_empty());
    }

    #[test]
    fn seeds_are_reproducible_and_streams_differ() {
        let m = ModelSpec::Ising(IsingGeneral::chain(3, 0.2)).finite().unwrap();
        let s = SeedSpec::new(42);
        let a = gillespie(&m, &[0, 0, 0], 5.0, &mut s.rng(3)).unwrap();
        let b = gillespie(&m, &[0, 0, 0], 5.0, &mut s.rng(3)).unwrap();
        let c = gillespie(&m, &[0, 0, 0], 5.0, &mut s.rng(4)).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_ne!(a.to_csv(), c.to_csv());
        assert!(a.events.windows(2).all(|w| w[0].time < w[1].time));
    }

    #[test]
    fn point_mass_sampling() {
        let s = exact_sample(&[0.0, 0.0, 1.0, 0.0], 50, &mut SeedSpec::new(7).rng(0)).unwrap();
        assert!(s.iter().all(|&k| k == 2));
    }
}
