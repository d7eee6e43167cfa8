//! Scenario comparisons: fit the model and the raw-count baselines to
//! replicated simulated datasets and tabulate losses against the
//! natural-parameter truth.

use rand::Rng;
use rayon::prelude::*;

use crate::baselines;
use crate::error::{Error, Result};
use crate::model::{joint_covariance, Hyperparams};
use crate::rng::stream_rng;
use crate::sampler::{run_chain, ChainConfig, StorageMode};
use crate::sim::{frobenius_loss, frobenius_loss_slices, generate, stein_loss, ScenarioSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Pscca,
    Pearson,
    Spearman,
    SampleCca,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Pscca => "pscca",
            Method::Pearson => "pearson",
            Method::Spearman => "spearman",
            Method::SampleCca => "sample_cca",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pscca" => Ok(Method::Pscca),
            "pearson" => Ok(Method::Pearson),
            "spearman" => Ok(Method::Spearman),
            "sample_cca" => Ok(Method::SampleCca),
            other => Err(Error::InvalidArgument(format!(
                "unknown method '{other}'; expected pscca, pearson, spearman, or sample_cca"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareConfig {
    pub replicates: usize,
    /// Latent dimension fitted by the model (also the number of canonical
    /// correlations compared).
    pub fit_d: usize,
    pub chain: ChainConfig,
    /// Ridge added to the raw-data CCA covariance blocks.
    pub ridge: f64,
}

impl CompareConfig {
    /// Defaults: 20 replicates, ridge 0.1, standard chain settings.
    pub fn new(fit_d: usize) -> Self {
        Self { replicates: 20, fit_d, chain: ChainConfig::default(), ridge: 0.1 }
    }
}

/// One loss measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct LossRow {
    pub scenario: String,
    pub model: String,
    pub method: String,
    pub replicate: usize,
    pub metric: String,
    pub value: f64,
}

/// Aggregate of one (method, metric) cell across replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub method: String,
    pub metric: String,
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub std_error: f64,
    pub lower95: f64,
    pub upper95: f64,
}

fn scenario_label(spec: &ScenarioSpec) -> (String, String) {
    let scenario = match spec.scenario {
        super::Scenario::I => "I",
        super::Scenario::II => "II",
    }
    .to_string();
    let model = match spec.cov_model {
        None => "-".to_string(),
        Some(super::CovModel::Independent) => "independent".to_string(),
        Some(super::CovModel::Identity) => "identity".to_string(),
        Some(super::CovModel::Moderate) => "moderate".to_string(),
    };
    (scenario, model)
}

fn replicate_rows(
    spec: &ScenarioSpec,
    methods: &[Method],
    cfg: &CompareConfig,
    replicate: usize,
) -> Result<Vec<LossRow>> {
    let mut seeds = stream_rng(spec.seed, replicate as u64);
    let data_seed = seeds.random::<u64>();
    let chain_seed = seeds.random::<u64>();
    let ds = generate(&spec.reseeded(data_seed))?;
    let (scenario, model) = scenario_label(spec);
    let k = cfg.fit_d.min(spec.d1).min(spec.d2);
    let true_cca = &ds.true_cca[..k];
    // stein loss compares full joint correlation matrices, which only makes
    // sense where sample versions are positive definite
    let stein_feasible = spec.n > spec.d1 + spec.d2;
    let true_joint_corr = joint_covariance(&ds.true_state)?.to_correlation();

    let mut rows = Vec::new();
    let mut push = |method: &Method, metric: &str, value: f64| {
        rows.push(LossRow {
            scenario: scenario.clone(),
            model: model.clone(),
            method: method.name().to_string(),
            replicate,
            metric: metric.to_string(),
            value,
        });
    };

    for method in methods {
        match method {
            Method::Pscca => {
                let hp = Hyperparams::new(cfg.fit_d);
                let chain = ChainConfig { seed: chain_seed, ..cfg.chain.clone() };
                let draws = run_chain(&ds.data, &hp, &chain)?;
                let n_draws = draws.len() as f64;
                let mut corr_sum = ds.true_cross_corr.clone() * 0.0;
                let mut cca_sum = vec![0.0; k];
                let mut joint_sum = if draws.storage_mode() == StorageMode::FullStates {
                    Some(true_joint_corr.clone() * 0.0)
                } else {
                    None
                };
                for idx in 0..draws.len() {
                    corr_sum += draws.cross_correlation_draw(idx)?;
                    for (rank, v) in
                        draws.canonical_correlations_draw(idx, k)?.into_iter().enumerate()
                    {
                        cca_sum[rank] += v;
                    }
                    if let (Some(sum), Some(states)) = (&mut joint_sum, draws.states()) {
                        *sum += joint_covariance(&states[idx])?.to_correlation();
                    }
                }
                let mean_corr = corr_sum / n_draws;
                let mean_cca: Vec<f64> = cca_sum.into_iter().map(|v| v / n_draws).collect();
                push(method, "frobenius_corr", frobenius_loss(&ds.true_cross_corr, &mean_corr)?);
                push(method, "frobenius_cca", frobenius_loss_slices(true_cca, &mean_cca)?);
                if let Some(sum) = joint_sum {
                    let mean_joint = sum / n_draws;
                    push(method, "stein_corr", stein_loss(&mean_joint, &true_joint_corr)?);
                }
            }
            Method::Pearson | Method::Spearman => {
                let on_ranks = matches!(method, Method::Spearman);
                let result = if on_ranks {
                    baselines::spearman(&ds.data)?
                } else {
                    baselines::pearson(&ds.data)?
                };
                let corr = result.correlation().expect("correlation estimate");
                push(method, "frobenius_corr", frobenius_loss(&ds.true_cross_corr, corr)?);
                if stein_feasible {
                    let joint = baselines::joint_raw_correlation(&ds.data, on_ranks)?;
                    push(method, "stein_corr", stein_loss(&joint, &true_joint_corr)?);
                }
            }
            Method::SampleCca => {
                let result = baselines::sample_cca(&ds.data, cfg.ridge, k)?;
                let values = result.canonical_correlations().expect("cca estimate");
                push(method, "frobenius_cca", frobenius_loss_slices(true_cca, values)?);
            }
        }
    }
    Ok(rows)
}

/// Score every requested method on `cfg.replicates` independently simulated
/// datasets. Replicates run in parallel; everything is deterministic in
/// `spec.seed`.
pub fn run_comparison(
    spec: &ScenarioSpec,
    methods: &[Method],
    cfg: &CompareConfig,
) -> Result<Vec<LossRow>> {
    spec.validate()?;
    if methods.is_empty() {
        return Err(Error::InvalidArgument("no methods requested".into()));
    }
    if cfg.replicates == 0 {
        return Err(Error::InvalidArgument("need at least one replicate".into()));
    }
    if cfg.fit_d == 0 || cfg.fit_d > spec.d1.min(spec.d2) {
        return Err(Error::InvalidArgument(format!(
            "fit_d = {} must satisfy 1 <= fit_d <= min(D1, D2) = {}",
            cfg.fit_d,
            spec.d1.min(spec.d2)
        )));
    }
    let per_replicate: Vec<Result<Vec<LossRow>>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|replicate| replicate_rows(spec, methods, cfg, replicate))
        .collect();
    let mut rows = Vec::new();
    for result in per_replicate {
        rows.extend(result?);
    }
    Ok(rows)
}

/// Mean, median, standard error, and the empirical 95% interval of each
/// (method, metric) cell.
pub fn aggregate(rows: &[LossRow]) -> Vec<AggregateRow> {
    let mut keys: Vec<(String, String)> = Vec::new();
    for row in rows {
        let key = (row.method.clone(), row.metric.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.iter()
        .map(|(method, metric)| {
            let mut values: Vec<f64> = rows
                .iter()
                .filter(|r| &r.method == method && &r.metric == metric)
                .map(|r| r.value)
                .collect();
            values.sort_by(f64::total_cmp);
            let n = values.len();
            let mean = values.iter().sum::<f64>() / n as f64;
            let var = if n > 1 {
                values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
            } else {
                0.0
            };
            let quantile = |p: f64| {
                let h = (n as f64 - 1.0) * p;
                let lo = h.floor() as usize;
                let hi = (lo + 1).min(n - 1);
                values[lo] + (h - lo as f64) * (values[hi] - values[lo])
            };
            AggregateRow {
                method: method.clone(),
                metric: metric.clone(),
                n,
                mean,
                median: quantile(0.5),
                std_error: (var / n as f64).sqrt(),
                lower95: quantile(0.025),
                upper95: quantile(0.975),
            }
        })
        .collect()
}
