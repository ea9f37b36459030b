//! One line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use gibbsgap_core::dobrushin::{
    gap_certificate, grid_slack, interdependence_finite, interdependence_matrix, ising_r_bound, nvector_bounds,
    phi4_bounds, GapCertificate,
};
use gibbsgap_core::glauber::{
    build_generator, build_ips_generator, check_contraction, check_ips_contraction, exact_spectral_gap,
    gaussian_linear_gap, invariant_w1_decay, ips_constants, ConstantChoice, JumpRateFamily,
};
use gibbsgap_core::models::{phi4_single_site, FreeProduct, GaussianPair, IsingGeneral, ModelSpec, Phi4Grid, PottsAf};
use gibbsgap_core::sampler::{autocorrelation_decay, SeedSpec};
use gibbsgap_core::transport::{apriori_check, clt_hoeffding_check, hoeffding_check, t1_check, tilted_family};
use gibbsgap_core::wasserstein::Metric;
use gibbsgap_core::MetricChoice;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn c01_gaussian() -> Outcome {
    for rho in [0.1f64, 0.3, 0.5, 0.7, 0.9] {
        let g = GaussianPair::new(rho).map_err(err)?;
        let spec = ModelSpec::GaussianPair(g);
        let c = interdependence_matrix(&spec, &MetricChoice::Euclidean).map_err(err)?;
        ensure((c.get(0, 1) - rho).abs() <= 1e-12 && (c.get(1, 0) - rho).abs() <= 1e-12, || format!("c12 at ρ={rho}"))?;
        let cert = gap_certificate(&spec, &MetricChoice::Euclidean, Some(g.lambda0())).map_err(err)?;
        ensure((cert.lambda1_bound - (1.0 - rho)).abs() <= 1e-12, || format!("λ₁ bound at ρ={rho}"))?;
        let grad = cert.lambda1_grad_bound.ok_or("missing gradient bound")?;
        ensure((grad - 1.0 / (1.0 + rho)).abs() <= 1e-12, || format!("gradient bound {grad} at ρ={rho}"))?;
        ensure((grad - g.exact_gradient_gap()).abs() <= 1e-12, || "gradient bound is not the exact value".into())?;
        let gap = gaussian_linear_gap(&g);
        ensure((gap - (1.0 - rho)).abs() <= 1e-12, || format!("linear gap {gap} at ρ={rho}"))?;
    }
    Ok("5 values of ρ".into())
}

fn c02_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut models = Vec::new();
    for k in 0..90 {
        let n = rng.random_range(2..=5);
        models.push(common::random_ising(&mut rng, n, 0.4, k % 2 == 1));
    }
    for k in 0..60 {
        let n = 2 + k % 2;
        let colors = [5, 6, 7][k % 3];
        models.push(common::random_potts_chain(&mut rng, n, colors, 5.0));
    }
    for _ in 0..60 {
        let (n, q) = (rng.random_range(1..=4), rng.random_range(2..=3));
        models.push(common::random_free(&mut rng, n, q));
    }
    let mut checked = 0;
    let mut worst = f64::INFINITY;
    for spec in &models {
        let cert = gap_certificate(spec, &MetricChoice::Trivial, None).map_err(err)?;
        if !cert.valid {
            continue;
        }
        let fm = spec.finite().map_err(err)?;
        let gap = exact_spectral_gap(&build_generator(&fm).map_err(err)?).map_err(err)?;
        let margin = gap - cert.lambda1_bound;
        worst = worst.min(margin);
        ensure(margin >= -1e-9, || format!("{} model: gap {gap} < bound {}", spec.family(), cert.lambda1_bound))?;
        checked += 1;
    }
    ensure(checked >= 200, || format!("only {checked} models had r_sp < 1"))?;
    Ok(format!("{checked} models, worst margin {worst:.3e}"))
}

fn c03_efron_stein() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..40 {
        let (n, q) = (rng.random_range(1..=4), rng.random_range(2..=4));
        let spec = common::random_free(&mut rng, n, q);
        let gap = exact_spectral_gap(&build_generator(&spec.finite().map_err(err)?).map_err(err)?).map_err(err)?;
        worst = worst.max((gap - 1.0).abs());
    }
    ensure(worst <= 1e-9, || format!("free-product gap deviates from 1 by {worst}"))?;
    Ok(format!("40 free products, max |λ₁ − 1| = {worst:.1e}"))
}

fn c04_ising_calculator() -> Outcome {
    for k in 1..=10 {
        let beta = k as f64 / 10.0;
        let ising = IsingGeneral::chain(2, beta);
        let c = interdependence_matrix(&ModelSpec::Ising(ising.clone()), &MetricChoice::Trivial).map_err(err)?;
        let bound = ising_r_bound(&ising.couplings);
        ensure((c.get(0, 1) - beta.tanh()).abs() <= 1e-10, || format!("c12 ≠ tanh β at β={beta}"))?;
        ensure((c.get(0, 1) - bound).abs() <= 1e-10, || format!("calculator {bound} ≠ exact at β={beta}"))?;
        let chain = ModelSpec::Ising(IsingGeneral::chain(6, beta));
        let c = interdependence_matrix(&chain, &MetricChoice::Trivial).map_err(err)?;
        for i in 1..5 {
            let row: f64 = (0..6).map(|j| c.get(i, j)).sum();
            ensure(row <= 2.0 * beta.tanh() + 1e-10, || format!("row {i} sum {row} at β={beta}"))?;
        }
    }
    Ok("β = 0.1..1.0".into())
}

fn c05_potts() -> Outcome {
    let mut detail = Vec::new();
    for n_colors in [5usize, 6] {
        let bound = 1.0 / (n_colors as f64 - 2.0);
        let mut maxes = Vec::new();
        for j in [0.5, 1.0, 2.0, 5.0] {
            let potts = PottsAf::chain(3, n_colors, j);
            let deg = potts.degrees();
            let c = interdependence_matrix(&ModelSpec::Potts(potts), &MetricChoice::Trivial).map_err(err)?;
            let mut m = 0.0f64;
            for i in 0..3 {
                if deg[i] > 2 {
                    continue;
                }
                for k in 0..3 {
                    m = m.max(c.get(i, k));
                    ensure(c.get(i, k) <= bound + 1e-10, || {
                        format!("c[{i}][{k}] = {} > 1/(N−2) at N={n_colors}, J={j}", c.get(i, k))
                    })?;
                }
            }
            maxes.push(m);
        }
        detail.push(format!(
            "N={n_colors}: max c over J = {:?}",
            maxes.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()
        ));
    }
    Ok(detail.join("; "))
}

fn c06_contraction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let t_grid = [0.25, 0.5, 1.0, 2.0, 4.0];
    let mut worst = f64::INFINITY;
    for k in 0..100 {
        let n = 2 + k % 2;
        let spec = if k % 4 < 2 {
            common::random_ising(&mut rng, n, 1.0, false)
        } else {
            let colors = rng.random_range(3..=5);
            common::random_potts_chain(&mut rng, n, colors, 3.0)
        };
        let fm = spec.finite().map_err(err)?;
        let f = common::random_function(&mut rng, fm.space().size());
        let metric = fm.default_metric();
        let rep = check_contraction(&fm, &metric, &f, &t_grid).map_err(err)?;
        worst = worst.min(rep.worst_margin());
        ensure(rep.passed(), || format!("contraction violated on model {k}: worst margin {}", rep.worst_margin()))?;
    }
    Ok(format!("100 functions, worst per-site margin {worst:.3e}"))
}

fn c07_ips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let t_grid = [0.25, 0.5, 1.0, 2.0];
    let mut worst_gap = f64::INFINITY;
    for k in 0..50 {
        let q = 2 + k % 2;
        let n_terms = rng.random_range(1..=4);
        let fam = JumpRateFamily::random(&mut rng, 3, q, n_terms, 2, true).map_err(err)?;
        let metric = Metric::trivial(q);
        let consts = ips_constants(&fam, &metric).map_err(err)?;
        for (t, (tv, lp)) in consts.c_s_j_tv.iter().zip(&consts.c_s_j_lp).enumerate() {
            for (j, (a, b)) in tv.iter().zip(lp).enumerate() {
                let b = b.ok_or("LP constant missing")?;
                worst_gap = worst_gap.min(a - b);
                ensure(b <= a + 1e-12, || format!("family {k}: LP c_S({j}) = {b} exceeds TV/2 bound {a} (term {t})"))?;
            }
        }
        let f = common::random_function(&mut rng, fam.space().size());
        for choice in [ConstantChoice::Exact, ConstantChoice::Tv] {
            let rep = check_ips_contraction(&fam, &metric, &f, &t_grid, choice).map_err(err)?;
            ensure(rep.passed(), || {
                format!("family {k}: contraction violated with {choice:?}, margin {}", rep.worst_margin())
            })?;
        }
    }
    // Reduction to the heat-bath case.
    for spec in [
        ModelSpec::Ising(IsingGeneral::chain(3, 0.6)),
        ModelSpec::Potts(PottsAf::chain(3, 3, 1.2)),
        ModelSpec::Ising(IsingGeneral::star(3, -0.4)),
    ] {
        let fm = spec.finite().map_err(err)?;
        let metric = fm.default_metric();
        let fam = JumpRateFamily::heat_bath(&fm).map_err(err)?;
        let consts = ips_constants(&fam, &metric).map_err(err)?;
        let c = interdependence_finite(&fm, &metric).map_err(err)?;
        ensure((consts.eta - 1.0).abs() <= 1e-10, || format!("η = {}", consts.eta))?;
        for choice in [ConstantChoice::Exact, ConstantChoice::Tv] {
            let m = consts.matrix(choice);
            for i in 0..3 {
                for j in 0..3 {
                    ensure((m[(i, j)] - c.get(i, j)).abs() <= 1e-10, || {
                        format!("c[{i}][{j}] differs from the Dobrushin matrix")
                    })?;
                }
            }
        }
        let a = build_ips_generator(&fam).map_err(err)?.dense();
        let b = build_generator(&fm).map_err(err)?.dense();
        ensure((a - b).abs().max() <= 1e-10, || "jump-rate generator differs from heat-bath generator".into())?;
        let f = common::random_function(&mut rng, fm.space().size());
        let r1 = check_ips_contraction(&fam, &metric, &f, &t_grid, ConstantChoice::Exact).map_err(err)?;
        let r2 = check_contraction(&fm, &metric, &f, &t_grid).map_err(err)?;
        for (p, q) in r1.points.iter().zip(&r2.points) {
            ensure(
                (p.delta_bound - q.delta_bound).abs() <= 1e-10 && (p.delta_actual - q.delta_actual).abs() <= 1e-10,
                || "jump-rate contraction does not reduce to the heat-bath one".into(),
            )?;
        }
    }
    Ok(format!("50 random families, min(TV/2 − LP) = {worst_gap:.3e}; 3 heat-bath reductions"))
}

fn c08_corollary() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let t_grid = [0.5, 1.0, 2.0, 4.0];
    let mut families = Vec::new();
    for spec in [
        ModelSpec::Ising(IsingGeneral::chain(2, 0.3)),
        ModelSpec::Ising(IsingGeneral::chain(2, -0.8)),
        ModelSpec::Potts(PottsAf::chain(2, 4, 1.0)),
    ] {
        families.push(JumpRateFamily::heat_bath(&spec.finite().map_err(err)?).map_err(err)?);
    }
    let mut k = 0;
    while families.len() < 9 {
        let fam = JumpRateFamily::random(&mut rng, 2, 2 + k % 2, 2 + k % 2, 2, true).map_err(err)?;
        k += 1;
        // A family that never moves some site has no unique invariant law.
        if (0..2).all(|i| fam.terms().iter().any(|t| t.sites.contains(&i))) {
            families.push(fam);
        }
    }
    let mut worst = f64::INFINITY;
    let mut checks = 0;
    for fam in &families {
        let metric = Metric::trivial(fam.q());
        for x0 in 0..fam.space().size() {
            let rep = invariant_w1_decay(fam, &metric, x0, &t_grid).map_err(err)?;
            ensure(rep.null_dimension == 1, || format!("invariant law not unique ({})", rep.null_dimension))?;
            for p in &rep.points {
                worst = worst.min(p.margin);
                checks += 1;
            }
            ensure(rep.passed(), || format!("W1 decay violated from state {x0}"))?;
        }
    }
    Ok(format!("{checks} (family, x, t) checks, worst margin {worst:.3e}"))
}

fn c09_transport() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let models = vec![
        ModelSpec::Ising(IsingGeneral::chain(2, 0.2)),
        ModelSpec::Ising(IsingGeneral::chain(3, 0.2)),
        ModelSpec::Ising(IsingGeneral::star(4, 0.1)),
        ModelSpec::Potts(PottsAf::chain(3, 6, 1.0)),
        ModelSpec::Free(FreeProduct { marginals: vec![vec![0.2, 0.5, 0.3], vec![0.6, 0.1, 0.3]], values: None }),
    ];
    let lambdas: Vec<f64> = (0..=24).map(|k| -3.0 + 0.25 * k as f64).collect();
    let mut count = 0;
    let mut worst = f64::INFINITY;
    for spec in &models {
        let fm = spec.finite().map_err(err)?;
        let metric = Metric::trivial(fm.q());
        let c = interdependence_finite(&fm, &metric).map_err(err)?;
        ensure(c.norms().0 < 1.0, || format!("{} test model has ‖C‖₁ ≥ 1", spec.family()))?;
        let mu = fm.joint_table().map_err(err)?;
        let size = mu.len();
        let big_f = common::random_function(&mut rng, size);
        let mut nus = tilted_family(&mu, &big_f, &[-2.0, -0.3, 0.3, 1.0, 3.0]).map_err(err)?;
        for _ in 0..5 {
            nus.push(common::random_simplex(&mut rng, size, 0.0));
        }
        for nu in &nus {
            let f = common::random_function(&mut rng, size);
            for chk in apriori_check(&fm, &metric, nu, Some(&f)).map_err(err)? {
                ensure(!chk.is_skipped() && chk.passed(), || {
                    format!("{} {} margin {}", spec.family(), chk.equation, chk.margin)
                })?;
                worst = worst.min(chk.margin);
                count += 1;
            }
        }
        for chk in t1_check(&fm, &metric, &nus, Some(0.25)).map_err(err)? {
            ensure(chk.passed(), || format!("{} eq_4_5 margin {}", spec.family(), chk.margin))?;
            worst = worst.min(chk.margin);
            count += 1;
        }
        for chk in hoeffding_check(&fm, &metric, &big_f, &lambdas, Some(0.25)).map_err(err)? {
            ensure(!chk.is_skipped() && chk.passed(), || {
                format!("{} eq_4_6 at λ={} margin {}", spec.family(), chk.parameter, chk.margin)
            })?;
            count += 1;
        }
    }
    // Single site, C = 0: Pinsker on a Bernoulli grid.
    let grid: Vec<f64> = (1..=50).map(|k| k as f64 / 51.0).collect();
    for &p in &grid {
        let fm =
            ModelSpec::Free(FreeProduct { marginals: vec![vec![1.0 - p, p]], values: None }).finite().map_err(err)?;
        let nus: Vec<Vec<f64>> = grid.iter().map(|&q| vec![1.0 - q, q]).collect();
        for chk in t1_check(&fm, &Metric::trivial(2), &nus, None).map_err(err)? {
            ensure(chk.passed(), || format!("Pinsker fails at p={p}: margin {}", chk.margin))?;
            count += 1;
        }
    }
    Ok(format!("{count} checks, worst eq_4_1/eq_4_2/eq_4_5 margin {worst:.3e}"))
}

fn c10_clt() -> Outcome {
    let lambdas: Vec<f64> = (0..=40).map(|k| -4.0 + 0.2 * k as f64).collect();
    for n in [1usize, 3, 5] {
        let fm = ModelSpec::Free(FreeProduct { marginals: vec![vec![0.5, 0.5]; n], values: Some(vec![-1.0, 1.0]) })
            .finite()
            .map_err(err)?;
        for chk in clt_hoeffding_check(&fm, &[-1.0, 1.0], &lambdas).map_err(err)? {
            let l = chk.parameter;
            let exact = (l / (n as f64).sqrt()).cosh().powi(n as i32);
            ensure((chk.lhs - exact).abs() <= 1e-12 * exact, || format!("MGF {} ≠ cosh form {exact}", chk.lhs))?;
            ensure(((l * l / 2.0).exp() - chk.rhs).abs() <= 1e-12 * chk.rhs, || "bound is not e^{λ²/2}".into())?;
            ensure(chk.passed(), || format!("free product fails at λ={l}"))?;
        }
    }
    let fm = ModelSpec::Ising(IsingGeneral::chain(3, 0.2)).finite().map_err(err)?;
    let mut worst = f64::INFINITY;
    for chk in clt_hoeffding_check(&fm, &[-1.0, 1.0], &lambdas).map_err(err)? {
        ensure(!chk.is_skipped() && chk.passed(), || format!("Ising fails at λ={}", chk.parameter))?;
        worst = worst.min(chk.margin);
    }
    Ok(format!("free n ∈ {{1,3,5}}, 3-site Ising worst margin {worst:.3e}"))
}

/// Composite Simpson rule for `∫_{−x}^{x} g`.
fn simpson(g: impl Fn(f64) -> f64, x: f64, intervals: usize) -> f64 {
    let h = 2.0 * x / intervals as f64;
    let mut s = g(-x) + g(x);
    for k in 1..intervals {
        s += g(-x + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn c11_calculators() -> Outcome {
    for p in 1..=12usize {
        for k in 0..=40 {
            let gamma = k as f64 * 0.1;
            let r = nvector_bounds(p, gamma).map_err(err)?;
            let k0 = (PI * PI / 4.0).min((2.0 * gamma).exp() / p as f64);
            ensure((r.value("K0") - k0).abs() <= 1e-15, || format!("K0 at p={p}, γ={gamma}"))?;
            if gamma < p as f64 - 1.0 {
                ensure(r.value("lambda0") > 1.0, || format!("λ₀ ≤ 1 at p={p}, γ={gamma}"))?;
            }
        }
    }
    let mut implied = 0;
    for p in 5..=12usize {
        for k in 0..=400 {
            let gamma = k as f64 * (p as f64 + 1.0) / 400.0;
            let r = nvector_bounds(p, gamma).map_err(err)?;
            if r.flag("condition_5_13") == Some(true) {
                ensure(r.flag("condition_5_7") == Some(true), || {
                    format!("condition_5_13 holds but condition_5_7 fails at p={p}, γ={gamma}")
                })?;
                implied += 1;
            }
        }
    }
    // φ⁴ single-site variance against a 10× finer quadrature.
    let model = Phi4Grid::chain(3, 1.0, 0.0, 0.15, 64);
    let grid = model.grid_metric().map_err(err)?;
    let x = model.x_max();
    let s2 = phi4_single_site(1.0, 0.0, &grid).map_err(err)?.sigma2;
    let intervals = 640;
    let oracle = simpson(|t| t * t * (-t.powi(4)).exp(), x, intervals) / simpson(|t| (-t.powi(4)).exp(), x, intervals);
    ensure((s2 - oracle).abs() <= 1e-6, || format!("σ² = {s2}, oracle {oracle}"))?;
    // Exact c_ij of a grid chain against σ²|J|(1 + slack).
    let spec = ModelSpec::Phi4(model.clone());
    let c = interdependence_matrix(&spec, &MetricChoice::Euclidean).map_err(err)?;
    let kappa = 0.15;
    let bounds = phi4_bounds(1.0, 0.0, &[kappa, kappa], &grid, None).map_err(err)?;
    let slack = grid_slack(1.0, 0.0, &grid, 2.0 * kappa * x, 2000).map_err(err)?;
    let bound = bounds.value("c_bound[0]") * (1.0 + slack);
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let coupled = (i as i64 - j as i64).abs() == 1;
            let b = if coupled { bound } else { 0.0 };
            worst = worst.max(c.get(i, j) / bound.max(1e-300));
            ensure(c.get(i, j) <= b + 1e-10, || format!("c[{i}][{j}] = {} > {b}", c.get(i, j)))?;
        }
    }
    Ok(format!(
        "K₀/λ₀ grids ok; condition_5_13 ⇒ condition_5_7 on {implied} points; σ² = {s2:.9} (|Δ| = {:.1e}); max c/bound = {worst:.4}, slack = {slack:.2e}",
        (s2 - oracle).abs()
    ))
}

fn c12_sampler() -> Outcome {
    let fm = ModelSpec::Ising(IsingGeneral::chain(12, 0.2)).finite().map_err(err)?;
    let values = fm.values().to_vec();
    let magnetization = move |x: &[usize]| x.iter().map(|&v| values[v]).sum::<f64>();
    let t_grid = [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0];
    let rep = autocorrelation_decay(&fm, &magnetization, &t_grid, 10_000, SeedSpec::new(12)).map_err(err)?;
    let cert = GapCertificate::from_matrix(&interdependence_finite(&fm, &Metric::trivial(2)).map_err(err)?, None);
    ensure((rep.r_sp - cert.r_sp).abs() < 1e-12, || "envelope does not use the certified rate".into())?;
    for p in &rep.points {
        ensure(p.within_envelope(), || {
            format!("t={}: autocov {} > envelope {} + {}", p.t, p.autocov, p.envelope, p.ci_half)
        })?;
    }
    let zero = &rep.points[0];
    ensure((zero.autocov - rep.variance).abs() <= 3.0 * zero.ci_half, || "ρ(0) does not estimate Var(f)".into())?;
    Ok(format!("10⁴ replicas, r_sp = {:.5}", rep.r_sp))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("01 gaussian pair exact coefficients and gaps", c01_gaussian),
        ("02 gap certificate soundness suite", c02_soundness),
        ("03 free products have gap one", c03_efron_stein),
        ("04 ising calculator against exact matrix", c04_ising_calculator),
        ("05 potts per-edge bound", c05_potts),
        ("06 lipschitz contraction of the heat bath", c06_contraction),
        ("07 jump-rate constants and contraction", c07_ips),
        ("08 wasserstein decay to the invariant law", c08_corollary),
        ("09 transport inequalities", c09_transport),
        ("10 hoeffding bound for normalised sums", c10_clt),
        ("11 n-vector and phi4 calculators", c11_calculators),
        ("12 sampler autocovariance envelope", c12_sampler),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name} [{secs:.2}s] {detail}"),
            Err(why) => {
                failures += 1;
                println!("FAIL  {name} [{secs:.2}s] {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
