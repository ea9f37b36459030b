//! Run configuration: a TOML file, overridden field by field by flags.
//!
//! ```toml
//! model = "ising_chain.toml"   # resolved against this file's directory
//! metric = "trivial"           # trivial | euclidean; default depends on the family
//! t_grid = [0.25, 0.5, 1, 2, 4]
//! lambda_grid = [-3, -1.5, 0, 1.5, 3]
//! seed = 7
//!
//! [function]                   # test function for contract, ips, transport, simulate
//! kind = "random"              # random | sum | site | table
//! count = 10
//! ```

use std::path::{Path, PathBuf};

use clap::Args;
use gibbsgap_core::tolerance::DEFAULT_STATE_CAP;
use gibbsgap_core::{from_toml_error, MetricChoice};
use serde::Deserialize;

use crate::error::{config, Result};

pub const DEFAULT_T_GRID: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
pub const OUT_DIR_ENV: &str = "GIBBSGAP_OUT_DIR";

#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    /// Run configuration file (TOML); flags override its entries
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Model file (TOML)
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Single-site metric: trivial or euclidean
    #[arg(long, value_parser = ["trivial", "euclidean"])]
    pub metric: Option<String>,
    /// Single-site gradient Poincaré constant for the gradient-gap bound
    #[arg(long)]
    pub lambda0: Option<f64>,
    /// Cap on the number of joint states for exact tables and generators
    #[arg(long)]
    pub cap: Option<usize>,
    /// Comma-separated times
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub t_grid: Option<Vec<f64>>,
    /// Comma-separated exponential-moment parameters
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambda_grid: Option<Vec<f64>>,
    /// Master seed for every random choice of the run
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for the report and CSV files [env: GIBBSGAP_OUT_DIR]
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Number of independent replicas (simulate)
    #[arg(long)]
    pub replicas: Option<usize>,
    /// Length of the recorded trajectory (simulate)
    #[arg(long)]
    pub t_max: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<String>,
    pub model: Option<PathBuf>,
    pub metric: Option<String>,
    pub lambda0: Option<f64>,
    pub state_cap: Option<usize>,
    pub t_grid: Option<Vec<f64>>,
    pub lambda_grid: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub replicas: Option<usize>,
    pub t_max: Option<f64>,
    pub function: Option<FunctionSpec>,
    pub ips: Option<IpsSpec>,
    pub transport: Option<TransportSpec>,
    pub bounds: Option<BoundsSpec>,
}

/// Test function on the joint state space.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    /// `random`, `sum` (of spin values), `site` (spin value at `site`) or `table`.
    pub kind: String,
    pub count: Option<usize>,
    pub site: Option<usize>,
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IpsSpec {
    /// `heat_bath` (from the model), `random` or `explicit`.
    pub family: Option<String>,
    pub sites: Option<usize>,
    pub q: Option<usize>,
    pub n_terms: Option<usize>,
    pub max_size: Option<usize>,
    pub gauge: Option<bool>,
    /// `exact`, `tv` or `both`.
    pub choice: Option<String>,
    pub terms: Option<Vec<TermSpec>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub sites: Vec<usize>,
    /// `rates[x · |E^S| + z]` over the joint states `x` and local values `z`.
    pub rates: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportSpec {
    pub k: Option<f64>,
    pub tilts: Option<Vec<f64>>,
    pub random_nu: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    /// `nvector`, `potts` or `phi4`; omitted means "from the model".
    pub family: Option<String>,
    pub p: Option<usize>,
    pub gamma: Option<f64>,
    pub colors: Option<usize>,
    pub dim: Option<usize>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub couplings: Option<Vec<f64>>,
    pub grid_points: Option<usize>,
    pub half_width: Option<f64>,
    pub k0: Option<f64>,
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: String,
    pub model: Option<PathBuf>,
    pub metric: Option<MetricChoice>,
    pub lambda0: Option<f64>,
    pub state_cap: usize,
    pub t_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub replicas: Option<usize>,
    pub t_max: Option<f64>,
    pub function: Option<FunctionSpec>,
    pub ips: IpsSpec,
    pub transport: TransportSpec,
    pub bounds: Option<BoundsSpec>,
}

pub fn default_lambda_grid() -> Vec<f64> {
    (0..=12).map(|k| -3.0 + 0.5 * k as f64).collect()
}

fn read_file(path: &Path) -> Result<FileConfig> {
    let src = std::fs::read_to_string(path).map_err(|e| config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&src).map_err(|e| from_toml_error(&src, &e).into())
}

fn check_grid(name: &str, grid: &[f64], nonnegative: bool) -> Result<()> {
    if grid.is_empty() {
        return Err(config(format!("{name} must not be empty")));
    }
    if grid.iter().any(|v| !v.is_finite() || (nonnegative && *v < 0.0)) {
        return Err(config(format!(
            "{name} entries must be finite{}",
            if nonnegative { " and nonnegative" } else { "" }
        )));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(config(format!("{name} must be sorted")));
    }
    Ok(())
}

impl RunConfig {
    pub fn resolve(command: &str, args: &RunArgs) -> Result<Self> {
        let (file, base) = match &args.config {
            Some(p) => (read_file(p)?, p.parent().map(Path::to_path_buf).unwrap_or_default()),
            None => (FileConfig::default(), PathBuf::new()),
        };
        if let Some(c) = &file.command {
            if c != command {
                return Err(config(format!("configuration is for `{c}`, not `{command}`")));
            }
        }
        let model = match (&args.model, &file.model) {
            (Some(p), _) => Some(p.clone()),
            (None, Some(p)) => Some(base.join(p)),
            (None, None) => None,
        };
        if let Some(p) = &model {
            if !p.is_file() {
                return Err(config(format!("model file {} does not exist", p.display())));
            }
        }
        let metric = match args.metric.as_ref().or(file.metric.as_ref()) {
            None => None,
            Some(m) => Some(MetricChoice::parse(m).ok_or_else(|| config(format!("unknown metric `{m}`")))?),
        };
        let t_grid = args.t_grid.clone().or(file.t_grid).unwrap_or_else(|| DEFAULT_T_GRID.to_vec());
        check_grid("t-grid", &t_grid, true)?;
        let lambda_grid = args.lambda_grid.clone().or(file.lambda_grid).unwrap_or_else(default_lambda_grid);
        check_grid("lambda-grid", &lambda_grid, false)?;
        let out_dir = args
            .out_dir
            .clone()
            .or(file.out_dir.map(|p| base.join(p)))
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        let state_cap = args.cap.or(file.state_cap).unwrap_or(DEFAULT_STATE_CAP);
        if state_cap == 0 {
            return Err(config("cap must be positive"));
        }
        let t_max = args.t_max.or(file.t_max);
        if let Some(t) = t_max {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(config("t-max must be finite and nonnegative"));
            }
        }
        Ok(RunConfig {
            command: command.into(),
            model,
            metric,
            lambda0: args.lambda0.or(file.lambda0),
            state_cap,
            t_grid,
            lambda_grid,
            seed: args.seed.or(file.seed).unwrap_or(0),
            out_dir,
            replicas: args.replicas.or(file.replicas),
            t_max,
            function: file.function,
            ips: file.ips.unwrap_or_default(),
            transport: file.transport.unwrap_or_default(),
            bounds: file.bounds,
        })
    }
}
