//! The three subcommands: simulate, fit, compare.

use std::time::Instant;

use pscca::sim::{aggregate, generate, run_comparison};
use pscca::summaries::export_heatmap_grid_with_names;
use pscca::{summarize_cca, summarize_correlations, CountDatasetPair, Hyperparams, ScalarParam};

use crate::config::{CliError, CliResult, CompareRunConfig, FitConfig, SimulateConfig};
use crate::io;

fn scenario_entries(spec: &pscca::sim::ScenarioSpec) -> Vec<(String, String)> {
    let mut entries = vec![
        (
            "scenario".to_string(),
            match spec.scenario {
                pscca::sim::Scenario::I => "I".to_string(),
                pscca::sim::Scenario::II => "II".to_string(),
            },
        ),
        ("d_true".to_string(), spec.d_true.to_string()),
        ("d1".to_string(), spec.d1.to_string()),
        ("d2".to_string(), spec.d2.to_string()),
        ("n".to_string(), spec.n.to_string()),
        ("seed".to_string(), spec.seed.to_string()),
    ];
    if let Some(model) = spec.cov_model {
        let name = match model {
            pscca::sim::CovModel::Independent => "independent",
            pscca::sim::CovModel::Identity => "identity",
            pscca::sim::CovModel::Moderate => "moderate",
        };
        entries.push(("cov_model".to_string(), name.to_string()));
    }
    entries
}

fn chain_entries(chain: &pscca::ChainConfig) -> Vec<(String, String)> {
    vec![
        ("iters".to_string(), chain.n_iter.to_string()),
        ("burn_in".to_string(), chain.burn_in.to_string()),
        ("chains".to_string(), chain.n_chains.to_string()),
        ("thin".to_string(), chain.thin.to_string()),
        ("slice_width".to_string(), chain.slice_width.to_string()),
        ("slice_max_doublings".to_string(), chain.slice_max_doublings.to_string()),
    ]
}

pub fn simulate(cfg: &SimulateConfig) -> CliResult<()> {
    let started = Instant::now();
    io::ensure_out_dir(&cfg.out_dir)?;
    let ds = generate(&cfg.spec)?;

    let sample_ids: Vec<String> = (1..=cfg.spec.n).map(|j| format!("s{j}")).collect();
    let names_1: Vec<String> = (1..=cfg.spec.d1).map(|i| format!("f1_{i}")).collect();
    let names_2: Vec<String> = (1..=cfg.spec.d2).map(|i| format!("f2_{i}")).collect();

    io::write_counts(&cfg.out_dir.join("y1.csv"), ds.data.y(0), &names_1, &sample_ids)?;
    io::write_counts(&cfg.out_dir.join("y2.csv"), ds.data.y(1), &names_2, &sample_ids)?;

    // generating parameters at the covariance level
    let mut params = String::from("param,view,row,col,value\n");
    for m in 0..2 {
        let view = m + 1;
        for i in 0..ds.true_state.w[m].nrows() {
            for k in 0..ds.true_state.w[m].ncols() {
                params.push_str(&format!("w,{view},{},{},{}\n", i + 1, k + 1, ds.true_state.w[m][(i, k)]));
            }
        }
        for i in 0..ds.true_state.mu[m].len() {
            params.push_str(&format!("mu,{view},{},1,{}\n", i + 1, ds.true_state.mu[m][i]));
        }
        params.push_str(&format!("sigma2,{view},1,1,{}\n", ds.true_state.sigma2[m]));
    }
    io::write_text(&cfg.out_dir.join("true_params.csv"), &params)?;

    io::write_matrix(
        &cfg.out_dir.join("true_cross_corr.csv"),
        &ds.true_cross_corr,
        &names_1,
        &names_2,
        "feature",
    )?;
    let mut cca = String::from("rank,value\n");
    for (rank, value) in ds.true_cca.iter().enumerate() {
        cca.push_str(&format!("{},{}\n", rank + 1, value));
    }
    io::write_text(&cfg.out_dir.join("true_cca.csv"), &cca)?;

    io::write_manifest(
        &cfg.out_dir.join("run_manifest.txt"),
        "simulate",
        &scenario_entries(&cfg.spec),
    )?;
    if !cfg.quiet {
        eprintln!(
            "simulate: wrote {} x {} and {} x {} counts to {} in {:.2?}",
            cfg.spec.d1,
            cfg.spec.n,
            cfg.spec.d2,
            cfg.spec.n,
            cfg.out_dir.display(),
            started.elapsed()
        );
    }
    Ok(())
}

pub fn fit(cfg: &FitConfig) -> CliResult<()> {
    let started = Instant::now();
    io::ensure_out_dir(&cfg.out_dir)?;
    let view1 = io::read_counts(&cfg.y1)?;
    let view2 = io::read_counts(&cfg.y2)?;
    if view1.sample_ids.len() != view2.sample_ids.len() {
        return Err(CliError::Usage(format!(
            "{} has {} samples but {} has {}; the views must be aligned",
            cfg.y1.display(),
            view1.sample_ids.len(),
            cfg.y2.display(),
            view2.sample_ids.len()
        )));
    }
    if view1.sample_ids != view2.sample_ids {
        return Err(CliError::Usage(
            "sample ids differ between the two count files; the views must be aligned".into(),
        ));
    }
    let data = CountDatasetPair::with_labels(
        view1.counts,
        view2.counts,
        Some(view1.feature_names.clone()),
        Some(view2.feature_names.clone()),
        Some(view1.sample_ids),
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;

    let hp = Hyperparams::new(cfg.d);
    let draws = pscca::run_chain(&data, &hp, &cfg.chain)?;
    if !cfg.quiet {
        eprintln!("fit: {} retained draws in {:.2?}", draws.len(), started.elapsed());
    }

    let corr = summarize_correlations(&draws, cfg.level)?;
    export_heatmap_grid_with_names(
        &corr,
        &view1.feature_names,
        &view2.feature_names,
        &cfg.out_dir.join("correlation_summary.csv"),
    )?;

    let k = cfg.d.min(data.n_features(0)).min(data.n_features(1));
    let cca = summarize_cca(&draws, k, cfg.level)?;
    let mut cca_out = String::from("rank,mean,lower,upper\n");
    for rank in 0..cca.k() {
        cca_out.push_str(&format!(
            "{},{},{},{}\n",
            rank + 1,
            cca.means[rank],
            cca.lower[rank],
            cca.upper[rank]
        ));
    }
    io::write_text(&cfg.out_dir.join("cca_summary.csv"), &cca_out)?;

    // convergence diagnostics; a warning never fails the run
    let mut diag = String::from("quantity,value\n");
    let mut warn = false;
    let psrf_rows = [
        ("psrf_sigma2_1", ScalarParam::Sigma2(0)),
        ("psrf_sigma2_2", ScalarParam::Sigma2(1)),
        ("psrf_tau_1", ScalarParam::Tau(0)),
        ("psrf_tau_2", ScalarParam::Tau(1)),
        ("psrf_log_posterior", ScalarParam::LogPosterior),
    ];
    for (name, which) in psrf_rows {
        match draws.psrf_scalar(which) {
            Ok(value) => {
                if value > 1.1 {
                    warn = true;
                }
                diag.push_str(&format!("{name},{value}\n"));
            }
            Err(_) => diag.push_str(&format!("{name},na\n")),
        }
    }
    let divergent = draws.divergent_chains().len();
    if divergent > 0 {
        warn = true;
    }
    diag.push_str(&format!("divergent_chains,{divergent}\n"));
    diag.push_str(&format!("n_draws,{}\n", draws.len()));
    diag.push_str(&format!("mixing_warning,{}\n", u8::from(warn)));
    io::write_text(&cfg.out_dir.join("diagnostics.csv"), &diag)?;
    if warn && !cfg.quiet {
        eprintln!("fit: mixing warning recorded in diagnostics.csv");
    }

    let mut entries = vec![
        ("y1".to_string(), cfg.y1.display().to_string()),
        ("y2".to_string(), cfg.y2.display().to_string()),
        ("d".to_string(), cfg.d.to_string()),
        ("level".to_string(), cfg.level.to_string()),
        ("seed".to_string(), cfg.chain.seed.to_string()),
    ];
    entries.extend(chain_entries(&cfg.chain));
    io::write_manifest(&cfg.out_dir.join("run_manifest.txt"), "fit", &entries)?;
    Ok(())
}

pub fn compare(cfg: &CompareRunConfig) -> CliResult<()> {
    let started = Instant::now();
    io::ensure_out_dir(&cfg.out_dir)?;
    let rows = run_comparison(&cfg.spec, &cfg.methods, &cfg.compare)?;

    let mut losses = String::from("scenario,model,method,replicate,metric,value\n");
    for row in &rows {
        losses.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.scenario, row.model, row.method, row.replicate, row.metric, row.value
        ));
    }
    io::write_text(&cfg.out_dir.join("losses.csv"), &losses)?;

    let mut summary = String::from("method,metric,n,mean,median,std_error,lower95,upper95\n");
    for cell in aggregate(&rows) {
        summary.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            cell.method,
            cell.metric,
            cell.n,
            cell.mean,
            cell.median,
            cell.std_error,
            cell.lower95,
            cell.upper95
        ));
    }
    io::write_text(&cfg.out_dir.join("aggregate_summary.csv"), &summary)?;

    let mut entries = scenario_entries(&cfg.spec);
    entries.push((
        "methods".to_string(),
        cfg.methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(","),
    ));
    entries.push(("replicates".to_string(), cfg.compare.replicates.to_string()));
    entries.push(("fit_d".to_string(), cfg.compare.fit_d.to_string()));
    entries.push(("ridge".to_string(), cfg.compare.ridge.to_string()));
    entries.extend(chain_entries(&cfg.compare.chain));
    io::write_manifest(&cfg.out_dir.join("run_manifest.txt"), "compare", &entries)?;
    if !cfg.quiet {
        eprintln!(
            "compare: {} loss rows over {} replicates in {:.2?}",
            rows.len(),
            cfg.compare.replicates,
            started.elapsed()
        );
    }
    Ok(())
}
