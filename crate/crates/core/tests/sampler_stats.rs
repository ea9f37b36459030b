use gibbsgap_core::models::{IsingGeneral, ModelSpec, PottsAf};
use gibbsgap_core::sampler::{autocorrelation_decay, exact_sample, gillespie, SeedSpec};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pearson statistic of `counts` against `probs`, and its upper 0.1% quantile.
fn chi_square(counts: &[usize], probs: &[f64]) -> (f64, f64) {
    let total: usize = counts.iter().sum();
    let stat = counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let e = p * total as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let crit = ChiSquared::new((probs.len() - 1) as f64).unwrap().inverse_cdf(0.999);
    (stat, crit)
}

#[test]
fn exact_sampler_fits_the_table() {
    let fm = ModelSpec::Potts(PottsAf::chain(2, 4, 1.3)).finite().unwrap();
    let mu = fm.joint_table().unwrap();
    let draws = exact_sample(&mu, 40_000, &mut SeedSpec::new(3).rng(0)).unwrap();
    let mut counts = vec![0; mu.len()];
    draws.iter().for_each(|&a| counts[a] += 1);
    let (stat, crit) = chi_square(&counts, &mu);
    assert!(stat < crit, "χ² = {stat} ≥ {crit}");
}

#[test]
fn glauber_endpoints_fit_the_gibbs_law() {
    let fm = ModelSpec::Ising(IsingGeneral::chain(3, 0.7)).finite().unwrap();
    let mu = fm.joint_table().unwrap();
    let seed = SeedSpec::new(17);
    let mut counts = vec![0; mu.len()];
    for r in 0..20_000 {
        let traj = gillespie(&fm, &[0, 0, 0], 15.0, &mut seed.rng(r)).unwrap();
        counts[fm.space().encode(&traj.final_state())] += 1;
    }
    let (stat, crit) = chi_square(&counts, &mu);
    assert!(stat < crit, "χ² = {stat} ≥ {crit}");
}

#[test]
fn streams_are_reproducible_and_distinct() {
    let fm = ModelSpec::Ising(IsingGeneral::chain(4, 0.3)).finite().unwrap();
    let seed = SeedSpec::new(99);
    let a = gillespie(&fm, &[0; 4], 5.0, &mut seed.rng(7)).unwrap();
    let b = gillespie(&fm, &[0; 4], 5.0, &mut seed.rng(7)).unwrap();
    let c = gillespie(&fm, &[0; 4], 5.0, &mut seed.rng(8)).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_ne!(a.to_csv(), c.to_csv());
    for w in a.events.windows(2) {
        assert!(w[0].time <= w[1].time);
    }
    assert!(a.events.iter().all(|e| e.time <= 5.0));
}

#[test]
fn trajectory_replays_events() {
    let fm = ModelSpec::Ising(IsingGeneral::chain(2, 0.3)).finite().unwrap();
    let traj = gillespie(&fm, &[1, 0], 3.0, &mut SeedSpec::new(1).rng(0)).unwrap();
    let mut x = traj.initial.clone();
    for e in &traj.events {
        assert_eq!(traj.state_at(e.time - 1e-12), x);
        x[e.site] = e.new_value;
        assert_eq!(traj.state_at(e.time), x);
    }
    assert_eq!(traj.final_state(), x);
}

#[test]
fn autocovariance_report_is_deterministic() {
    let fm = ModelSpec::Ising(IsingGeneral::chain(5, 0.25)).finite().unwrap();
    let values = fm.values().to_vec();
    let f = move |x: &[usize]| values[x[0]];
    let grid = [0.0, 0.5, 1.0];
    let a = autocorrelation_decay(&fm, &f, &grid, 400, SeedSpec::new(5)).unwrap();
    let b = autocorrelation_decay(&fm, &f, &grid, 400, SeedSpec::new(5)).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert!(a.warnings.is_empty());
    let few = autocorrelation_decay(&fm, &f, &grid, 50, SeedSpec::new(5)).unwrap();
    assert!(!few.warnings.is_empty(), "fewer than the recommended replicas should warn");
}
