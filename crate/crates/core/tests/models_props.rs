mod common;

use gibbsgap_core::models::{parse_model, phi4_single_site, symmetric_grid, FreeProduct, ModelSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn conditionals_agree_with_the_joint_table(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = match seed % 3 {
            0 => { let n = rng.random_range(2..=4); common::random_ising(&mut rng, n, 1.5, seed % 2 == 0) }
            1 => { let q = rng.random_range(3..=5); common::random_potts_chain(&mut rng, 3, q, 4.0) }
            _ => common::random_free(&mut rng, 3, 3),
        };
        let fm = spec.finite().unwrap();
        let mu = fm.joint_table().unwrap();
        prop_assert!((mu.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let space = fm.space();
        for x in 0..space.size() {
            let state = space.decode(x);
            for i in 0..fm.n_sites() {
                let p = fm.conditional_probs(i, &state);
                let z: f64 = (0..fm.q()).map(|a| mu[space.with_value(x, i, a)]).sum();
                for (a, pa) in p.iter().enumerate() {
                    prop_assert!((pa - mu[space.with_value(x, i, a)] / z).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn free_product_tensorizes(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = common::random_free(&mut rng, 3, 2);
        let ModelSpec::Free(FreeProduct { marginals, .. }) = &spec else { unreachable!() };
        let fm = spec.finite().unwrap();
        let mu = fm.joint_table().unwrap();
        for (x, m) in mu.iter().enumerate() {
            let s = fm.space().decode(x);
            let prod: f64 = s.iter().enumerate().map(|(i, &v)| marginals[i][v]).product();
            prop_assert!((m - prod).abs() <= 1e-14);
        }
        for i in 0..3 {
            let marg = fm.site_marginal(&mu, i);
            for (a, b) in marg.iter().zip(&marginals[i]) {
                prop_assert!((a - b).abs() <= 1e-14);
            }
        }
    }
}

#[test]
fn boundary_spin_acts_as_a_field() {
    let with_boundary = parse_model(
        "family = \"ising\"\nsites = 2\nlattice = \"chain\"\nbeta = 0.3\n\
         couplings = [{ sites = [0, \"ghost\"], j = 0.25 }]\n[boundary]\nghost = -1\n",
    )
    .unwrap();
    let with_field = parse_model(
        "family = \"ising\"\nsites = 2\nlattice = \"chain\"\nbeta = 0.3\n\
         couplings = [{ sites = [0], j = -0.25 }]\n",
    )
    .unwrap();
    let a = with_boundary.finite().unwrap().joint_table().unwrap();
    let b = with_field.finite().unwrap().joint_table().unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-14);
    }
}

#[test]
fn potts_weight_ratio_is_exponential_in_agreements() {
    let fm = parse_model("family = \"potts\"\nsites = 2\ncolors = 3\nj = 0.7\nlattice = \"chain\"")
        .unwrap()
        .finite()
        .unwrap();
    let mu = fm.joint_table().unwrap();
    let space = fm.space();
    let same = mu[space.encode(&[1, 1])];
    let diff = mu[space.encode(&[1, 2])];
    assert!((same / diff - f64::exp(-0.7)).abs() < 1e-14);
}

#[test]
fn quartic_variance_matches_gamma_ratio() {
    // ∫x²e^{−x⁴} / ∫e^{−x⁴} = Γ(3/4)/Γ(1/4).
    let exact = gamma(0.75) / gamma(0.25);
    let grid = symmetric_grid(64, 4.0).unwrap();
    let s = phi4_single_site(1.0, 0.0, &grid).unwrap();
    assert!((s.sigma2 - exact).abs() < 1e-6, "{} vs {exact}", s.sigma2);
    assert!(s.mean.abs() < 1e-14);
}

#[test]
fn malformed_files_are_rejected_with_locations() {
    for (src, needle) in [
        ("family = \"potts\"\nsites = 2\ncolors = 4\nj = 1\nedges = [[0]]", "edges[0]"),
        ("family = \"free_product\"\nmarginals = [[0.5, 0.6]]", "marginals[0]"),
        ("family = \"phi4\"\nsites = 2\na = 1\nlattice = \"chain\"", "kappa"),
        ("family = \"ising\"\nsites = 2\nlattice = \"square\"\nbeta = 1", "width"),
        ("family = \"melon\"", "family"),
        ("sites = 2", "family"),
    ] {
        let e = parse_model(src).unwrap_err().to_string();
        assert!(e.contains(needle), "{src:?}: {e}");
    }
}
