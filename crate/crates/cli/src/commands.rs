use std::path::PathBuf;

use gibbsgap_core::dobrushin::{
    grid_slack, interdependence_finite, interdependence_matrix, ising_bounds, nvector_bounds, phi4_bounds, potts_bound,
};
use gibbsgap_core::glauber::{
    build_generator_capped, check_contraction, check_ips_contraction, gaussian_linear_gap, invariant_w1_decay,
    ips_constants, reversible_spectrum, ConstantChoice, JumpRateFamily, JumpTerm,
};
use gibbsgap_core::models::{parse_model_file, symmetric_grid, Site};
use gibbsgap_core::report::ReportHeader;
use gibbsgap_core::sampler::{autocorrelation_decay, gillespie, SeedSpec};
use gibbsgap_core::tolerance::{EQ_TOL, INEQ_SLACK};
use gibbsgap_core::transport::{
    apriori_check, clt_hoeffding_check, hoeffding_check, mgf_csv, t1_check, tilted_family, TransportCheck,
};
use gibbsgap_core::{BoundReport, Error, FiniteModel, GapCertificate, Metric, MetricChoice, ModelSpec};
use rand::Rng;
use serde::Serialize;

use crate::config::{FunctionSpec, RunConfig};
use crate::error::{config, Result};
use crate::output::{Csv, Output};

/// Streams of the master seed reserved for each kind of random input.
const FUNCTION_STREAM: u64 = 0;
const MEASURE_STREAM: u64 = 1 << 32;
const FAMILY_STREAM: u64 = 2 << 32;
const TRAJECTORY_STREAM: u64 = 3 << 32;

pub struct Outcome {
    pub passed: bool,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command.as_str() {
        "certify" => certify(cfg),
        "spectrum" => spectrum(cfg),
        "contract" => contract(cfg),
        "ips" => ips(cfg),
        "transport" => transport(cfg),
        "bounds" => bounds(cfg),
        "simulate" => simulate(cfg),
        other => Err(config(format!("unknown command `{other}`"))),
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn load_model(cfg: &RunConfig) -> Result<ModelSpec> {
    let path = cfg.model.as_ref().ok_or_else(|| config("no model given (use --model or `model` in the config)"))?;
    Ok(parse_model_file(path)?)
}

fn metric_choice(cfg: &RunConfig, spec: &ModelSpec) -> MetricChoice {
    cfg.metric.clone().unwrap_or(match spec {
        ModelSpec::Phi4(_) | ModelSpec::GaussianPair(_) => MetricChoice::Euclidean,
        _ => MetricChoice::Trivial,
    })
}

fn metric_name(choice: &MetricChoice) -> &'static str {
    match choice {
        MetricChoice::Trivial => "trivial",
        MetricChoice::Euclidean => "euclidean",
        MetricChoice::Table(_) => "table",
    }
}

fn finite(cfg: &RunConfig, spec: &ModelSpec) -> Result<FiniteModel> {
    let fm = spec.finite()?;
    let size = fm.space().size();
    if size > cfg.state_cap {
        return Err(Error::SizeLimit { what: "joint state space", needed: size, cap: cfg.state_cap }.into());
    }
    Ok(fm)
}

fn header(cfg: &RunConfig, metric: &str) -> ReportHeader {
    let model = cfg.model.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
    let mut h = ReportHeader::new(&cfg.command, &model, metric);
    h.state_cap = cfg.state_cap;
    h.t_grid = cfg.t_grid.clone();
    h.lambda_grid = cfg.lambda_grid.clone();
    h.seed = Some(cfg.seed);
    h
}

fn finish(out: Output, passed: bool, summary: String) -> Outcome {
    let verdict = if passed { "PASS" } else { "FAIL" };
    Outcome { passed, summary: format!("{verdict} {summary}"), files: out.written().to_vec() }
}

/// Test functions tabulated over the joint states.
fn functions(cfg: &RunConfig, fm: &FiniteModel, default_kind: &str) -> Result<Vec<Vec<f64>>> {
    let fallback = FunctionSpec { kind: default_kind.into(), count: None, site: None, values: None };
    let spec = cfg.function.as_ref().unwrap_or(&fallback);
    let space = fm.space();
    let values = fm.values();
    let size = space.size();
    match spec.kind.as_str() {
        "random" => {
            let count = spec.count.unwrap_or(10);
            if count == 0 {
                return Err(config("function.count must be positive"));
            }
            let seed = SeedSpec::new(cfg.seed);
            Ok((0..count as u64)
                .map(|k| {
                    let mut rng = seed.rng(FUNCTION_STREAM + k);
                    (0..size).map(|_| rng.random_range(-1.0..1.0)).collect()
                })
                .collect())
        }
        "sum" => Ok(vec![space.states().map(|x| x.iter().map(|&v| values[v]).sum()).collect()]),
        "site" => {
            let site = spec.site.ok_or_else(|| config("function.site is required for kind = \"site\""))?;
            if site >= fm.n_sites() {
                return Err(config(format!("function.site {site} is outside the {} sites", fm.n_sites())));
            }
            Ok(vec![space.states().map(|x| values[x[site]]).collect()])
        }
        "table" => {
            let v = spec.values.clone().ok_or_else(|| config("function.values is required for kind = \"table\""))?;
            if v.len() != size || v.iter().any(|x| !x.is_finite()) {
                return Err(config(format!("function.values needs {size} finite entries, got {}", v.len())));
            }
            Ok(vec![v])
        }
        other => Err(config(format!("unknown function kind `{other}`"))),
    }
}

#[derive(Serialize)]
struct MatrixBody {
    equation: &'static str,
    n: usize,
    metric: &'static str,
    norm1: f64,
    norminf: f64,
    rows: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct CertifyBody<'a> {
    passed: bool,
    family: &'static str,
    certificate: &'a GapCertificate,
    matrix: MatrixBody,
}

fn matrix_csv(rows: &[Vec<f64>]) -> Csv {
    let mut csv = Csv::new(&["i", "j", "c_ij"]);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            csv.row(&[i.to_string(), j.to_string(), num(*v)]);
        }
    }
    csv
}

fn certify(cfg: &RunConfig) -> Result<Outcome> {
    let spec = load_model(cfg)?;
    let choice = metric_choice(cfg, &spec);
    let c = interdependence_matrix(&spec, &choice)?;
    let lambda0 = cfg.lambda0.or(match &spec {
        ModelSpec::GaussianPair(g) => Some(g.lambda0()),
        _ => None,
    });
    let cert = GapCertificate::from_matrix(&c, lambda0);
    let rows = c.rows();
    let mut out = Output::new(&cfg.out_dir, &cfg.command)?;
    out.csv("matrix", matrix_csv(&rows).as_str())?;
    let body = CertifyBody {
        passed: cert.valid,
        family: spec.family(),
        certificate: &cert,
        matrix: MatrixBody {
            equation: "eq_2_3",
            n: c.n(),
            metric: c.metric_tag(),
            norm1: cert.norm1,
            norminf: cert.norminf,
            rows,
        },
    };
    out.report(&header(cfg, metric_name(&choice)), &body)?;
    let summary = format!("certify: r_sp = {}, lambda1_bound = {}", cert.r_sp, cert.lambda1_bound);
    Ok(finish(out, cert.valid, summary))
}

#[derive(Serialize)]
struct SpectrumBody<'a> {
    passed: bool,
    family: &'static str,
    states: usize,
    exact_lambda1: f64,
    margin: f64,
    margin_tolerance: f64,
    zero_eigenvalues: usize,
    certificate: &'a GapCertificate,
}

fn spectrum(cfg: &RunConfig) -> Result<Outcome> {
    let spec = load_model(cfg)?;
    let choice = metric_choice(cfg, &spec);
    let (eigen, cert) = match &spec {
        ModelSpec::GaussianPair(g) => {
            let c = interdependence_matrix(&spec, &choice)?;
            let mut ev: Vec<f64> = g.linear_generator().symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(|a, b| b.total_cmp(a));
            // The linear functions span the spectral-gap eigenspace; prepend the constant mode.
            ev.insert(0, 0.0);
            debug_assert!((-ev[1] - gaussian_linear_gap(g)).abs() < 1e-12);
            (ev, GapCertificate::from_matrix(&c, cfg.lambda0.or(Some(g.lambda0()))))
        }
        _ => {
            let fm = finite(cfg, &spec)?;
            let l = build_generator_capped(&fm, cfg.state_cap)?;
            let c = interdependence_finite(&fm, &fm.metric(&choice)?)?;
            (reversible_spectrum(&l)?, GapCertificate::from_matrix(&c, cfg.lambda0))
        }
    };
    if eigen.len() < 2 {
        return Err(config("a single-state model has no spectral gap"));
    }
    let gap = -eigen[1];
    let margin = gap - cert.lambda1_bound;
    let passed = margin >= -INEQ_SLACK;
    let zeros = eigen.iter().filter(|v| v.abs() <= 1e-9).count();
    let mut out = Output::new(&cfg.out_dir, &cfg.command)?;
    let mut csv = Csv::new(&["index", "eigenvalue"]);
    for (k, v) in eigen.iter().enumerate() {
        csv.row(&[k.to_string(), num(*v)]);
    }
    out.csv("eigenvalues", csv.as_str())?;
    let body = SpectrumBody {
        passed,
        family: spec.family(),
        states: if matches!(spec, ModelSpec::GaussianPair(_)) { 0 } else { eigen.len() },
        exact_lambda1: gap,
        margin,
        margin_tolerance: INEQ_SLACK,
        zero_eigenvalues: zeros,
        certificate: &cert,
    };
    out.report(&header(cfg, metric_name(&choice)), &body)?;
    let summary = format!("spectrum: exact lambda1 = {gap}, bound = {}, margin = {margin:e}", cert.lambda1_bound);
    Ok(finish(out, passed, summary))
}

#[derive(Serialize)]
struct ContractBody {
    passed: bool,
    equation_per_site: &'static str,
    equation_aggregate: &'static str,
    functions: usize,
    eta: f64,
    norm1: f64,
    norminf: f64,
    tolerance: f64,
    worst_margin: f64,
    aggregates_hold: bool,
}

fn contract(cfg: &RunConfig) -> Result<Outcome> {
    let spec = load_model(cfg)?;
    let choice = metric_choice(cfg, &spec);
    let fm = finite(cfg, &spec)?;
    let metric = fm.metric(&choice)?;
    let fs = functions(cfg, &fm, "random")?;
    let mut points = Csv::new(&["function", "t", "site", "delta_actual", "delta_bound", "margin"]);
    let mut aggs = Csv::new(&["function", "t", "sum_actual", "sum_bound", "max_actual", "max_bound"]);
    let mut worst = f64::INFINITY;
    let (mut passed, mut aggregates_hold) = (true, true);
    let mut constants = (0.0, 0.0, 0.0, 0.0);
    for (k, f) in fs.iter().enumerate() {
        let rep = check_contraction(&fm, &metric, f, &cfg.t_grid)?;
        constants = (rep.eta, rep.norm1, rep.norminf, rep.tolerance);
        worst = worst.min(rep.worst_margin());
        passed &= rep.passed();
        aggregates_hold &= rep.aggregates.iter().all(|a| a.holds(rep.tolerance));
        for p in &rep.points {
            points.row(&[
                k.to_string(),
                num(p.t),
                p.site.to_string(),
                num(p.delta_actual),
                num(p.delta_bound),
                num(p.margin),
            ]);
        }
        for a in &rep.aggregates {
            aggs.row(&[
                k.to_string(),
                num(a.t),
                num(a.sum_actual),
                num(a.sum_bound),
                num(a.max_actual),
                num(a.max_bound),
            ]);
        }
    }
    let mut out = Output::new(&cfg.out_dir, &cfg.command)?;
    out.csv("sites", points.as_str())?;
    out.csv("aggregates", aggs.as_str())?;
    let body = ContractBody {
        passed,
        equation_per_site: "eq_2_10",
        equation_aggregate: "eq_2_11",
        functions: fs.len(),
        eta: constants.0,
        norm1: constants.1,
        norminf: constants.2,
        tolerance: constants.3,
        worst_margin: worst,
        aggregates_hold,
    };
    out.report(&header(cfg, metric_name(&choice)), &body)?;
    Ok(finish(out, passed, format!("contract: {} functions, worst margin {worst:e}", fs.len())))
}

#[derive(Serialize)]
struct TermBody {
    sites: Vec<usize>,
    c_tv: Vec<f64>,
    /// NaN where the exact LP was not attempted.
    c_lp: Vec<f64>,
}

#[derive(Serialize)]
struct ChoiceBody {
    choice: &'static str,
    equation: &'static str,
    worst_margin: f64,
    passed: bool,
}

#[derive(Serialize)]
struct DecayBody {
    equation: &'static str,
    starts: usize,
    unique_invariant_law: bool,
    worst_margin: f64,
    passed: bool,
    note: String,
}

#[derive(Serialize)]
struct IpsBody {
    passed: bool,
    source: String,
    eta: f64,
    finite_constants: bool,
    warnings: Vec<String>,
    terms: Vec<TermBody>,
    contraction: Vec<ChoiceBody>,
    decay: DecayBody,
}

fn ips_family(cfg: &RunConfig) -> Result<(JumpRateFamily, String, Metric, &'static str, Option<FiniteModel>)> {
    let spec = &cfg.ips;
    let source =
        spec.family.clone().unwrap_or_else(|| if spec.terms.is_some() { "explicit" } else { "heat_bath" }.into());
    match source.as_str() {
        "heat_bath" => {
            let model = load_model(cfg)?;
            let choice = metric_choice(cfg, &model);
            let fm = finite(cfg, &model)?;
            let metric = fm.metric(&choice)?;
            Ok((JumpRateFamily::heat_bath(&fm)?, source, metric, metric_name(&choice), Some(fm)))
        }
        "random" | "explicit" => {
            if matches!(cfg.metric, Some(MetricChoice::Euclidean)) {
                return Err(config("jump-rate families without a model support only the trivial metric"));
            }
            let n = spec.sites.ok_or_else(|| config("ips.sites is required"))?;
            let q = spec.q.ok_or_else(|| config("ips.q is required"))?;
            let fam = if source == "random" {
                let mut rng = SeedSpec::new(cfg.seed).rng(FAMILY_STREAM);
                let n_terms = spec.n_terms.unwrap_or(3);
                JumpRateFamily::random(&mut rng, n, q, n_terms, spec.max_size.unwrap_or(2), spec.gauge.unwrap_or(true))?
            } else {
                let terms =
                    spec.terms.as_ref().ok_or_else(|| config("ips.terms is required for an explicit family"))?;
                let mut fam = JumpRateFamily::empty(n, q)?;
                for t in terms {
                    fam.push(JumpTerm { sites: t.sites.clone(), rates: t.rates.clone() })?;
                }
                fam
            };
            if fam.space().size() > cfg.state_cap {
                return Err(Error::SizeLimit {
                    what: "joint state space",
                    needed: fam.space().size(),
                    cap: cfg.state_cap,
                }
                .into());
            }
            Ok((fam, source, Metric::trivial(q), "trivial", None))
        }
        other => Err(config(format!("unknown ips.family `{other}`"))),
    }
}

fn ips(cfg: &RunConfig) -> Result<Outcome> {
    let (fam, source, metric, metric_label, model) = ips_family(cfg)?;
    let consts = ips_constants(&fam, &metric)?;
    let choices: Vec<(ConstantChoice, &'static str)> = match cfg.ips.choice.as_deref().unwrap_or("both") {
        "exact" => vec![(ConstantChoice::Exact, "exact")],
        "tv" => vec![(ConstantChoice::Tv, "tv")],
        "both" => vec![(ConstantChoice::Exact, "exact"), (ConstantChoice::Tv, "tv")],
        other => return Err(config(format!("unknown ips.choice `{other}`"))),
    };
    let mut out = Output::new(&cfg.out_dir, &cfg.command)?;
    let mut ccsv = Csv::new(&["term", "sites", "j", "c_tv", "c_lp"]);
    let mut terms = Vec::new();
    for (k, t) in fam.terms().iter().enumerate() {
        let sites = t.sites.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ");
        let lp: Vec<f64> = consts.c_s_j_lp[k].iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        for j in 0..fam.space().n_sites() {
            ccsv.row(&[k.to_string(), sites.clone(), j.to_string(), num(consts.c_s_j_tv[k][j]), num(lp[j])]);
        }
        terms.push(TermBody { sites: t.sites.clone(), c_tv: consts.c_s_j_tv[k].clone(), c_lp: lp });
    }
    out.csv("constants", ccsv.as_str())?;

    let fs = match &model {
        Some(fm) => functions(cfg, fm, "random")?,
        None => {
            if cfg.function.as_ref().is_some_and(|f| f.kind != "random") {
                return Err(config("without a model only random test functions are available"));
            }
            let count = cfg.function.as_ref().and_then(|f| f.count).unwrap_or(10);
            let seed = SeedSpec::new(cfg.seed);
            (0..count as u64)
                .map(|k| {
                    let mut rng = seed.rng(FUNCTION_STREAM + k);
                    (0..fam.space().size()).map(|_| rng.random_range(-1.0..1.0)).collect()
                })
                .collect()
        }
    };
    let mut passed = true;
    let mut contraction = Vec::new();
    let mut pcsv = Csv::new(&["choice", "function", "t", "site", "delta_actual", "delta_bound", "margin"]);
    for (choice, label) in &choices {
        let mut worst = f64::INFINITY;
        let mut ok = true;
        for (k, f) in fs.iter().enumerate() {
            let rep = check_ips_contraction(&fam, &metric, f, &cfg.t_grid, *choice)?;
            worst = worst.min(rep.worst_margin());
            ok &= rep.passed();
            for p in &rep.points {
                pcsv.row(&[
                    label.to_string(),
                    k.to_string(),
                    num(p.t),
                    p.site.to_string(),
                    num(p.delta_actual),
                    num(p.delta_bound),
                    num(p.margin),
                ]);
            }
        }
        passed &= ok;
        contraction.push(ChoiceBody { choice: label, equation: "eq_3_5", worst_margin: worst, passed: ok });
    }
    out.csv("contraction", pcsv.as_str())?;

    let mut dcsv = Csv::new(&["x0", "t", "w1", "bound_tight", "bound", "margin"]);
    let starts = fam.space().size().min(256);
    let mut decay = DecayBody {
        equation: "cor_3_5",
        starts: 0,
        unique_invariant_law: true,
        worst_margin: f64::INFINITY,
        passed: true,
        note: String::new(),
    };
    if consts.is_finite() {
        for x0 in 0..starts {
            let rep = invariant_w1_decay(&fam, &metric, x0, &cfg.t_grid)?;
            if rep.null_dimension != 1 {
                decay.unique_invariant_law = false;
                decay.note = format!("invariant law not unique (null space of dimension {})", rep.null_dimension);
                break;
            }
            decay.starts += 1;
            decay.passed &= rep.passed();
            for p in &rep.points {
                decay.worst_margin = decay.worst_margin.min(p.margin);
                dcsv.row(&[x0.to_string(), num(p.t), num(p.w1), num(p.bound_tight), num(p.bound), num(p.margin)]);
            }
        }
        if starts < fam.space().size() {
            decay.note = format!("first {starts} initial states only");
        }
    } else {
        decay.note = "constants are infinite; decay check skipped".into();
    }
    passed &= decay.passed;
    out.csv("decay", dcsv.as_str())?;

    let body = IpsBody {
        passed,
        source,
        eta: consts.eta,
        finite_constants: consts.is_finite(),
        warnings: consts.warnings.clone(),
        terms,
        contraction,
        decay,
    };
    out.report(&header(cfg, metric_label), &body)?;
    Ok(finish(out, passed, format!("ips: eta = {}, {} terms", consts.eta, fam.terms().len())))
}

#[derive(Serialize)]
struct EquationSummary {
    equation: String,
    checks: usize,
    skipped: usize,
    worst_margin: f64,
    passed: bool,
}

#[derive(Serialize)]
struct TransportBody {
    passed: bool,
    measures: usize,
    k: Option<f64>,
    equations: Vec<EquationSummary>,
}

fn transport(cfg: &RunConfig) -> Result<Outcome> {
    let spec = load_model(cfg)?;
    let choice = metric_choice(cfg, &spec);
    let fm = finite(cfg, &spec)?;
    let metric = fm.metric(&choice)?;
    let mu = fm.joint_table_capped(cfg.state_cap)?;
    let fs = functions(cfg, &fm, "sum")?;
    let f = &fs[0];
    let tilts = cfg.transport.tilts.clone().unwrap_or_else(|| vec![-1.0, -0.5, 0.5, 1.0]);
    let mut nus = tilted_family(&mu, f, &tilts)?;
    let seed = SeedSpec::new(cfg.seed);
    for k in 0..cfg.transport.random_nu.unwrap_or(3) as u64 {
        let mut rng = seed.rng(MEASURE_STREAM + k);
        let w: Vec<f64> = (0..mu.len()).map(|_| rng.random::<f64>()).collect();
        let s: f64 = w.iter().sum();
        nus.push(w.into_iter().map(|v| v / s).collect());
    }
    let k = cfg.transport.k;
    let mut checks: Vec<TransportCheck> = Vec::new();
    for nu in &nus {
        checks.extend(apriori_check(&fm, &metric, nu, Some(f))?);
    }
    checks.extend(t1_check(&fm, &metric, &nus, k)?);
    let mgf = hoeffding_check(&fm, &metric, f, &cfg.lambda_grid, k)?;
    let clt = clt_hoeffding_check(&fm, fm.values(), &cfg.lambda_grid)?;

    let mut out = Output::new(&cfg.out_dir, &cfg.command)?;
    let mut csv = Csv::new(&["equation", "parameter", "lhs", "rhs", "margin", "note"]);
    for c in checks.iter().chain(&mgf).chain(&clt) {
        let note = c.note.clone().unwrap_or_default().replace(',', ";");
        csv.row(&[c.equation.clone(), num(c.parameter), num(c.lhs), num(c.rhs), num(c.margin), note]);
    }
    out.csv("checks", csv.as_str())?;
    out.csv("mgf", &mgf_csv(&mgf))?;
    out.csv("clt_mgf", &mgf_csv(&clt))?;

    let all: Vec<&TransportCheck> = checks.iter().chain(&mgf).chain(&clt).collect();
    let mut names: Vec<String> = all.iter().map(|c| c.equation.clone()).collect();
    names.dedup();
    names.sort();
    names.dedup();
    let equations: Vec<EquationSummary> = names
        .into_iter()
        .map(|name| {
            let group: Vec<&&TransportCheck> = all.iter().filter(|c| c.equation == name).collect();
            let live: Vec<&&&TransportCheck> = group.iter().filter(|c| !c.is_skipped()).collect();
            EquationSummary {
                checks: group.len(),
                skipped: group.len() - live.len(),
                worst_margin: live.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min),
                passed: live.iter().all(|c| c.passed()),
                equation: name,
            }
        })
        .collect();
    let passed = equations.iter().all(|e| e.passed);
    let live = all.iter().filter(|c| !c.is_skipped()).count();
    let body = TransportBody { passed, measures: nus.len(), k, equations };
    out.report(&header(cfg, metric_name(&choice)), &body)?;
    Ok(finish(out, passed, format!("transport: {live} checks evaluated, {} skipped", all.len() - live)))
}

#[derive(Serialize)]
struct ExactComparison {
    description: String,
    worst_margin: f64,
    tolerance: f64,
    passed: bool,
}

#[derive(Serialize)]
struct BoundsBody<'a> {
    passed: bool,
    calculator: &'a BoundReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<ExactComparison>,
}

fn bounds_from_table(cfg: &RunConfig) -> Result<Option<BoundReport>> {
    let Some(b) = &cfg.bounds else { return Ok(None) };
    let Some(family) = b.family.as_deref() else { return Ok(None) };
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| config(format!("bounds.{name} is required")));
    let report = match family {
        "nvector" => {
            let p = b.p.ok_or_else(|| config("bounds.p is required"))?;
            nvector_bounds(p, need(b.gamma, "gamma")?)?
        }
        "potts" => potts_bound(b.colors.ok_or_else(|| config("bounds.colors is required"))?, b.dim.unwrap_or(1))?,
        "phi4" => {
            let a = need(b.a, "a")?;
            let bb = b.b.unwrap_or(0.0);
            let x = b.half_width.unwrap_or_else(|| gibbsgap_core::models::default_half_width(a, bb));
            let grid = symmetric_grid(b.grid_points.unwrap_or(64), x)?;
            let couplings = b.couplings.clone().ok_or_else(|| config("bounds.couplings is required"))?;
            phi4_bounds(a, bb, &couplings, &grid, b.k0)?
        }
        other => return Err(config(format!("unknown bounds.family `{other}`"))),
    };
    Ok(Some(report))
}

fn bounds(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Output::new(&cfg.out_dir, &cfg.command)?;
    let (report, exact, metric_label) = match bounds_from_table(cfg)? {
        Some(r) => (r, None, "none"),
        None => {
            let spec = load_model(cfg)?;
            let (report, exact) = bounds_for_model(cfg, &spec)?;
            (report, exact, metric_name(&metric_choice(cfg, &spec)))
        }
    };
    let mut csv = Csv::new(&["name", "equation", "value", "valid"]);
    for c in &report.constants {
        let valid = c.valid.map(|v| v.to_string()).unwrap_or_default();
        csv.row(&[c.name.clone(), c.equation.clone(), num(c.value), valid]);
    }
    out.csv("constants", csv.as_str())?;
    let passed = exact.as_ref().is_none_or(|e| e.passed);
    let body = BoundsBody { passed, calculator: &report, exact };
    out.report(&header(cfg, metric_label), &body)?;
    Ok(finish(out, passed, format!("bounds: {} calculator, {} constants", report.family, report.constants.len())))
}

fn comparison(description: String, margins: impl Iterator<Item = f64>) -> ExactComparison {
    let worst = margins.fold(f64::INFINITY, f64::min);
    ExactComparison { description, worst_margin: worst, tolerance: EQ_TOL, passed: worst >= -EQ_TOL }
}

fn bounds_for_model(cfg: &RunConfig, spec: &ModelSpec) -> Result<(BoundReport, Option<ExactComparison>)> {
    let choice = metric_choice(cfg, spec);
    match spec {
        ModelSpec::Ising(m) => {
            let report = ising_bounds(&m.couplings);
            let r = report.value("r_bound");
            let c = interdependence_matrix(spec, &choice)?;
            let n = c.n();
            let rows = (0..n).map(|i| r - (0..n).map(|j| c.get(i, j)).sum::<f64>());
            Ok((report, Some(comparison("exact row sums of C against r".into(), rows))))
        }
        ModelSpec::Potts(m) => {
            let report = potts_bound(m.n_colors, m.lattice_dim)?;
            let edge = report.value("edge_bound");
            let c = interdependence_matrix(spec, &choice)?;
            let deg = m.degrees();
            let n = c.n();
            let margins = (0..n)
                .filter(|&i| deg[i] <= 2 * m.lattice_dim)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| edge - c.get(i, j))
                .collect::<Vec<_>>();
            Ok((
                report,
                Some(comparison("exact c_ij against 1/(N - 2d) for sites of degree <= 2d".into(), margins.into_iter())),
            ))
        }
        ModelSpec::Phi4(m) => {
            let grid = m.grid_metric()?;
            let n = m.sites.len();
            let mut per_site = vec![Vec::new(); n];
            let mut pair = vec![0.0; n * n];
            for cp in &m.couplings {
                let inside: Vec<usize> =
                    cp.sites.iter().filter_map(|s| if let Site::In(i) = s { Some(*i) } else { None }).collect();
                for &i in &inside {
                    per_site[i].push(cp.strength);
                }
                if let [i, j] = inside[..] {
                    pair[i * n + j] += cp.strength.abs();
                    pair[j * n + i] += cp.strength.abs();
                }
            }
            let widest = per_site
                .iter()
                .max_by(|a, b| {
                    a.iter().map(|v| v.abs()).sum::<f64>().total_cmp(&b.iter().map(|v| v.abs()).sum::<f64>())
                })
                .cloned()
                .unwrap_or_default();
            let k0 = cfg.bounds.as_ref().and_then(|b| b.k0);
            let report = phi4_bounds(m.a, m.b, &widest, &grid, k0)?;
            let sigma2 = report.value("sigma2");
            let gamma = report.value("gamma");
            let slack = grid_slack(m.a, m.b, &grid, gamma * m.x_max(), 400)?;
            let c = interdependence_matrix(spec, &choice)?;
            let margins = (0..n * n).map(|k| sigma2 * pair[k] * (1.0 + slack) - c.entries()[k]);
            Ok((report, Some(comparison(format!("exact c_ij against sigma2 |J| (1 + {slack:e})"), margins))))
        }
        other => Err(Error::UnsupportedModel(format!(
            "no closed-form calculator for the {} family; use [bounds] with family = nvector | potts | phi4",
            other.family()
        ))
        .into()),
    }
}

#[derive(Serialize)]
struct SimulateBody {
    passed: bool,
    equation: &'static str,
    r_sp: f64,
    envelope_rate: f64,
    replicas: usize,
    variance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    burn_in: Option<f64>,
    trajectory_events: usize,
    warnings: Vec<String>,
}

fn simulate(cfg: &RunConfig) -> Result<Outcome> {
    let spec = load_model(cfg)?;
    let fm = finite(cfg, &spec)?;
    let f = functions(cfg, &fm, "sum")?.swap_remove(0);
    let space = fm.space().clone();
    let observable = move |x: &[usize]| f[space.encode(x)];
    let replicas = cfg.replicas.unwrap_or(1000);
    let seed = SeedSpec::new(cfg.seed);
    let rep = autocorrelation_decay(&fm, &observable, &cfg.t_grid, replicas, seed)?;
    let t_max = cfg.t_max.unwrap_or(*cfg.t_grid.last().expect("grid is nonempty"));
    let traj = gillespie(&fm, &vec![0; fm.n_sites()], t_max, &mut seed.rng(TRAJECTORY_STREAM))?;
    let mut out = Output::new(&cfg.out_dir, &cfg.command)?;
    out.csv("autocov", &rep.to_csv())?;
    out.csv("trajectory", &traj.to_csv())?;
    let passed = rep.passed();
    let body = SimulateBody {
        passed,
        equation: "eq_2_4_lambda1_lower",
        r_sp: rep.r_sp,
        envelope_rate: 1.0 - rep.r_sp,
        replicas,
        variance: rep.variance,
        burn_in: rep.burn_in,
        trajectory_events: traj.events.len(),
        warnings: rep.warnings.clone(),
    };
    out.report(&header(cfg, "trivial"), &body)?;
    Ok(finish(out, passed, format!("simulate: {replicas} replicas, r_sp = {}", rep.r_sp)))
}
