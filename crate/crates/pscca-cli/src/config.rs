//! Configuration resolution: defaults, then the key-value config file, then
//! command-line flags (flags win).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use pscca::sim::{CovModel, Method, Scenario, ScenarioSpec};
use pscca::ChainConfig;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config values, or malformed inputs (exit code 2).
    Usage(String),
    /// Failures while running (exit code 1).
    Runtime(String),
}

impl From<pscca::Error> for CliError {
    fn from(e: pscca::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// `key = value` lines; blank lines and `#` comments ignored.
fn parse_config_file(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "{}:{}: expected 'key = value', got '{line}'",
                path.display(),
                lineno + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, raw: &str) -> CliResult<T> {
    raw.parse().map_err(|_| CliError::Usage(format!("invalid value for {key}: '{raw}'")))
}

fn parse_scenario(raw: &str) -> CliResult<Scenario> {
    match raw {
        "I" | "i" | "1" => Ok(Scenario::I),
        "II" | "ii" | "2" => Ok(Scenario::II),
        other => Err(CliError::Usage(format!("unknown scenario '{other}'; expected I or II"))),
    }
}

fn parse_cov_model(raw: &str) -> CliResult<CovModel> {
    match raw {
        "independent" => Ok(CovModel::Independent),
        "identity" => Ok(CovModel::Identity),
        "moderate" => Ok(CovModel::Moderate),
        other => Err(CliError::Usage(format!(
            "unknown cov_model '{other}'; expected independent, identity, or moderate"
        ))),
    }
}

fn parse_methods(raw: &str) -> CliResult<Vec<Method>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Method>().map_err(|e| CliError::Usage(e.to_string())))
        .collect()
}

/// A resolved option: flag beats config beats default.
macro_rules! resolve {
    ($flag:expr, $cfg:expr, $key:literal, $default:expr, $parse:expr) => {
        match (&$flag, $cfg.get($key)) {
            (Some(v), _) => v.clone(),
            (None, Some(raw)) => $parse($key, raw)?,
            (None, None) => $default,
        }
    };
}

fn load(config: &Option<PathBuf>) -> CliResult<BTreeMap<String, String>> {
    match config {
        Some(path) => parse_config_file(path),
        None => Ok(BTreeMap::new()),
    }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Key-value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario: I (correlation) or II (canonical correlation).
    #[arg(long)]
    scenario: Option<String>,
    /// True latent dimension.
    #[arg(long)]
    d_true: Option<usize>,
    #[arg(long)]
    d1: Option<usize>,
    #[arg(long)]
    d2: Option<usize>,
    /// Number of samples.
    #[arg(long)]
    n: Option<usize>,
    /// Scenario II covariance design: independent, identity, or moderate.
    #[arg(long)]
    cov_model: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub spec: ScenarioSpec,
    pub out_dir: PathBuf,
    pub quiet: bool,
}

impl SimulateArgs {
    pub fn resolve(&self) -> CliResult<SimulateConfig> {
        let cfg = load(&self.config)?;
        let scenario_raw: String =
            resolve!(self.scenario, cfg, "scenario", "I".to_string(), parse_value);
        let scenario = parse_scenario(&scenario_raw)?;
        let mut spec = match scenario {
            Scenario::I => ScenarioSpec::scenario_i(5, 0),
            Scenario::II => ScenarioSpec::scenario_ii(CovModel::Identity, 60, 0),
        };
        if let Some(raw) = cfg.get("cov_model") {
            spec.cov_model = Some(parse_cov_model(raw)?);
        }
        if let Some(raw) = &self.cov_model {
            spec.cov_model = Some(parse_cov_model(raw)?);
        }
        spec.d_true = resolve!(self.d_true, cfg, "d_true", spec.d_true, parse_value);
        spec.d1 = resolve!(self.d1, cfg, "d1", spec.d1, parse_value);
        spec.d2 = resolve!(self.d2, cfg, "d2", spec.d2, parse_value);
        spec.n = resolve!(self.n, cfg, "n", spec.n, parse_value);
        spec.seed = resolve!(self.seed, cfg, "seed", 0, parse_value);
        spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        let out_dir: PathBuf =
            resolve!(self.out_dir, cfg, "out_dir", PathBuf::from("."), parse_value);
        let quiet = self.quiet || cfg.get("quiet").map(|v| v == "true").unwrap_or(false);
        Ok(SimulateConfig { spec, out_dir, quiet })
    }
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// View-1 count matrix (features x samples, delimited text).
    #[arg(long)]
    y1: Option<PathBuf>,
    /// View-2 count matrix.
    #[arg(long)]
    y2: Option<PathBuf>,
    /// Latent dimension to fit.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Credible level for the summaries.
    #[arg(long)]
    level: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Clone)]
pub struct FitConfig {
    pub y1: PathBuf,
    pub y2: PathBuf,
    pub d: usize,
    pub chain: ChainConfig,
    pub level: f64,
    pub out_dir: PathBuf,
    pub quiet: bool,
}

impl FitArgs {
    pub fn resolve(&self) -> CliResult<FitConfig> {
        let cfg = load(&self.config)?;
        let y1 = match (&self.y1, cfg.get("y1")) {
            (Some(p), _) => p.clone(),
            (None, Some(raw)) => PathBuf::from(raw),
            (None, None) => return Err(CliError::Usage("--y1 is required for fit".into())),
        };
        let y2 = match (&self.y2, cfg.get("y2")) {
            (Some(p), _) => p.clone(),
            (None, Some(raw)) => PathBuf::from(raw),
            (None, None) => return Err(CliError::Usage("--y2 is required for fit".into())),
        };
        for path in [&y1, &y2] {
            if !path.exists() {
                return Err(CliError::Usage(format!("input file {} does not exist", path.display())));
            }
        }
        let d = resolve!(self.d, cfg, "d", 5, parse_value);
        let defaults = ChainConfig::default();
        let chain = ChainConfig {
            n_iter: resolve!(self.iters, cfg, "iters", defaults.n_iter, parse_value),
            burn_in: resolve!(self.burn_in, cfg, "burn_in", defaults.burn_in, parse_value),
            n_chains: resolve!(self.chains, cfg, "chains", defaults.n_chains, parse_value),
            thin: resolve!(self.thin, cfg, "thin", defaults.thin, parse_value),
            seed: resolve!(self.seed, cfg, "seed", 0, parse_value),
            ..defaults
        };
        chain.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        let level: f64 = resolve!(self.level, cfg, "level", 0.95, parse_value);
        if !(level > 0.0 && level < 1.0) {
            return Err(CliError::Usage(format!("level must lie in (0, 1), got {level}")));
        }
        let out_dir: PathBuf =
            resolve!(self.out_dir, cfg, "out_dir", PathBuf::from("."), parse_value);
        let quiet = self.quiet || cfg.get("quiet").map(|v| v == "true").unwrap_or(false);
        Ok(FitConfig { y1, y2, d, chain, level, out_dir, quiet })
    }
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    d_true: Option<usize>,
    #[arg(long)]
    d1: Option<usize>,
    #[arg(long)]
    d2: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    cov_model: Option<String>,
    /// Comma-separated methods: pscca, pearson, spearman, sample_cca.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Latent dimension fitted by the model methods.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    /// Ridge for the raw-data sample CCA baseline.
    #[arg(long)]
    ridge: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Clone)]
pub struct CompareRunConfig {
    pub spec: ScenarioSpec,
    pub methods: Vec<Method>,
    pub compare: pscca::sim::CompareConfig,
    pub out_dir: PathBuf,
    pub quiet: bool,
}

impl CompareArgs {
    pub fn resolve(&self) -> CliResult<CompareRunConfig> {
        let cfg = load(&self.config)?;
        let scenario_raw: String =
            resolve!(self.scenario, cfg, "scenario", "I".to_string(), parse_value);
        let scenario = parse_scenario(&scenario_raw)?;
        let mut spec = match scenario {
            Scenario::I => ScenarioSpec::scenario_i(5, 0),
            Scenario::II => ScenarioSpec::scenario_ii(CovModel::Identity, 60, 0),
        };
        if let Some(raw) = cfg.get("cov_model") {
            spec.cov_model = Some(parse_cov_model(raw)?);
        }
        if let Some(raw) = &self.cov_model {
            spec.cov_model = Some(parse_cov_model(raw)?);
        }
        spec.d_true = resolve!(self.d_true, cfg, "d_true", spec.d_true, parse_value);
        spec.d1 = resolve!(self.d1, cfg, "d1", spec.d1, parse_value);
        spec.d2 = resolve!(self.d2, cfg, "d2", spec.d2, parse_value);
        spec.n = resolve!(self.n, cfg, "n", spec.n, parse_value);
        spec.seed = resolve!(self.seed, cfg, "seed", 0, parse_value);
        spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;

        let methods_raw: String = resolve!(
            self.methods,
            cfg,
            "methods",
            "pscca,pearson,spearman,sample_cca".to_string(),
            parse_value
        );
        let methods = parse_methods(&methods_raw)?;
        if methods.is_empty() {
            return Err(CliError::Usage("no methods requested".into()));
        }

        let fit_d = resolve!(self.d, cfg, "d", spec.d_true.max(1), parse_value);
        let mut compare = pscca::sim::CompareConfig::new(fit_d);
        compare.replicates = resolve!(self.replicates, cfg, "replicates", 20, parse_value);
        compare.ridge = resolve!(self.ridge, cfg, "ridge", 0.1, parse_value);
        let defaults = ChainConfig::default();
        compare.chain = ChainConfig {
            n_iter: resolve!(self.iters, cfg, "iters", defaults.n_iter, parse_value),
            burn_in: resolve!(self.burn_in, cfg, "burn_in", defaults.burn_in, parse_value),
            n_chains: resolve!(self.chains, cfg, "chains", defaults.n_chains, parse_value),
            thin: resolve!(self.thin, cfg, "thin", defaults.thin, parse_value),
            seed: 0,
            ..defaults
        };
        compare.chain.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        if compare.replicates == 0 {
            return Err(CliError::Usage("replicates must be at least 1".into()));
        }
        if fit_d == 0 || fit_d > spec.d1.min(spec.d2) {
            return Err(CliError::Usage(format!(
                "fitted d = {fit_d} must satisfy 1 <= d <= min(D1, D2) = {}",
                spec.d1.min(spec.d2)
            )));
        }
        let out_dir: PathBuf =
            resolve!(self.out_dir, cfg, "out_dir", PathBuf::from("."), parse_value);
        let quiet = self.quiet || cfg.get("quiet").map(|v| v == "true").unwrap_or(false);
        Ok(CompareRunConfig { spec, methods, compare, out_dir, quiet })
    }
}
