//! Reading and writing each stage's artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use donut_core::analysis::{svg, Dendrogram, ImportanceRecord};
use donut_core::autoencoder::{Autoencoder, TrainedAutoencoder};
use donut_core::corpus::{load_corpus_dir, meta_csv, train_csv, META_FILE, TRAIN_FILE};
use donut_core::metrics::SeriesScores;
use donut_core::model_pool::ForecastMatrix;
use donut_core::neural::Checkpoint;
use donut_core::oracle::GreedyResult;
use donut_core::stat_features::StatFeatures;
use donut_core::weight_net::{feature_names, TrainedWeightNet, WeightNet, EMBEDDING_DIM};
use donut_core::{PeriodName, SeriesType, TimeSeries};

use crate::artifacts::{
    embedding_columns, fmt_f64, forecast_matrices, forecast_rows, read_csv, read_forecasts, read_split,
    read_stat_features, read_table, write_atomic, write_csv, write_forecasts, write_json, write_split,
    write_stat_features, write_table, ForecastRow, Role,
};
use crate::error::{CliError, Result};
use crate::stages::{Evaluation, OracleRow, OracleSummary, PooledEval, Predictions, ReportData, SeriesEval, DONUT_METHOD};

pub fn write_corpus(dir: &Path, corpus: &[TimeSeries]) -> Result<Vec<PathBuf>> {
    let train = dir.join(TRAIN_FILE);
    let meta = dir.join(META_FILE);
    write_atomic(&train, train_csv(corpus).as_bytes())?;
    write_atomic(&meta, meta_csv(corpus).as_bytes())?;
    Ok(vec![train, meta])
}

pub fn read_corpus(dir: &Path) -> Result<Vec<TimeSeries>> {
    Ok(load_corpus_dir(dir)?)
}

pub fn write_forecast_matrices(path: &Path, matrices: &[ForecastMatrix]) -> Result<()> {
    write_forecasts(path, &forecast_rows(matrices))
}

pub fn read_forecast_matrices(path: &Path) -> Result<Vec<ForecastMatrix>> {
    forecast_matrices(path, &read_forecasts(path)?)
}

/// Forecasts of several methods, each as id → values, in first-seen order.
pub type MethodForecasts = Vec<(String, BTreeMap<String, Vec<f64>>)>;

/// Forecast files grouped as method → id → values.
pub fn read_methods(paths: &[PathBuf]) -> Result<MethodForecasts> {
    let mut methods: MethodForecasts = Vec::new();
    for path in paths {
        for r in read_forecasts(path)? {
            let pos = match methods.iter().position(|(m, _)| *m == r.model) {
                Some(p) => p,
                None => {
                    methods.push((r.model.clone(), BTreeMap::new()));
                    methods.len() - 1
                }
            };
            methods[pos].1.insert(r.id, r.values);
        }
    }
    Ok(methods)
}

pub fn write_stats(path: &Path, rows: &[(String, StatFeatures)]) -> Result<()> {
    write_stat_features(path, rows)
}

pub fn read_stats(path: &Path) -> Result<Vec<(String, StatFeatures)>> {
    read_stat_features(path)
}

pub fn write_checkpoint(path: &Path, ck: &Checkpoint) -> Result<()> {
    write_atomic(path, (ck.to_json()? + "\n").as_bytes())
}

fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Checkpoint::from_json(&text).map_err(|e| CliError::artifact(path, e))
}

pub fn write_ae(path: &Path, trained: &TrainedAutoencoder) -> Result<()> {
    let epochs = trained.history.train_loss.len();
    let mut ck = trained.model.to_checkpoint(Some(&trained.optimizer), trained.seed, epochs);
    ck.metadata["history"] = serde_json::to_value(&trained.history).map_err(|e| CliError::artifact(path, e))?;
    write_checkpoint(path, &ck)
}

pub fn read_ae(path: &Path) -> Result<Autoencoder> {
    let model = Autoencoder::from_checkpoint(&read_checkpoint(path)?).map_err(|e| CliError::artifact(path, e))?;
    if !model.trained {
        return Err(CliError::artifact(path, "autoencoder checkpoint is not trained"));
    }
    Ok(model)
}

pub fn write_embeddings(path: &Path, rows: &[(String, Vec<f64>)]) -> Result<()> {
    write_table(path, &embedding_columns(EMBEDDING_DIM), rows)
}

pub fn read_embeddings(path: &Path) -> Result<Vec<(String, Vec<f64>)>> {
    read_table(path, &embedding_columns(EMBEDDING_DIM))
}

pub fn write_weightnet(path: &Path, trained: &TrainedWeightNet) -> Result<()> {
    let epochs = trained.history.train_owa.len() - 1;
    let mut ck = trained.net.to_checkpoint(Some(&trained.optimizer), trained.seed, epochs);
    ck.metadata["history"] = serde_json::to_value(&trained.history).map_err(|e| CliError::artifact(path, e))?;
    write_checkpoint(path, &ck)
}

pub fn read_weightnet(path: &Path) -> Result<WeightNet> {
    let net = WeightNet::from_checkpoint(&read_checkpoint(path)?).map_err(|e| CliError::artifact(path, e))?;
    if net.standardizer.is_none() {
        return Err(CliError::artifact(path, "weight net checkpoint lacks its standardizer"));
    }
    Ok(net)
}

pub fn write_roles(path: &Path, roles: &[(String, Role)]) -> Result<()> {
    write_split(path, roles)
}

pub fn read_roles(path: &Path) -> Result<BTreeMap<String, Role>> {
    read_split(path)
}

pub fn write_predictions(weights: &Path, finals: &Path, p: &Predictions) -> Result<()> {
    write_table(weights, &crate::artifacts::model_columns(), &p.weights)?;
    let rows: Vec<ForecastRow> = p
        .combined
        .iter()
        .map(|(id, v)| ForecastRow {
            id: id.clone(),
            model: DONUT_METHOD.to_string(),
            values: v.clone(),
            fallback: false,
        })
        .collect();
    write_forecasts(finals, &rows)
}

pub fn read_weights(path: &Path) -> Result<Vec<(String, Vec<f64>)>> {
    read_table(path, &crate::artifacts::model_columns())
}

const EVAL_HEADER: [&str; 12] = [
    "scope",
    "subset",
    "id",
    "period",
    "type",
    "method",
    "n",
    "smape",
    "mase",
    "owa",
    "smape_naive2",
    "mase_naive2",
];

/// Per-series rows followed by pooled rows. Pooled rows report the
/// ratio-of-means OWA in `owa` and the mean per-series OWA in the last column.
pub fn write_evaluation(path: &Path, eval: &Evaluation) -> Result<()> {
    let mut header: Vec<String> = EVAL_HEADER.iter().map(|s| s.to_string()).collect();
    header.push("mean_owa".into());
    let mut rows: Vec<Vec<String>> = eval
        .series
        .iter()
        .map(|e| {
            vec![
                "series".into(),
                e.role.clone().unwrap_or_default(),
                e.id.clone(),
                e.period.to_string(),
                e.series_type.to_string(),
                e.method.clone(),
                "1".into(),
                fmt_f64(e.scores.smape),
                fmt_f64(e.scores.mase),
                fmt_f64(e.scores.owa()),
                fmt_f64(e.scores.smape_naive2),
                fmt_f64(e.scores.mase_naive2),
                String::new(),
            ]
        })
        .collect();
    rows.extend(eval.pooled.iter().map(|p| {
        vec![
            "pooled".into(),
            p.subset.clone(),
            String::new(),
            String::new(),
            String::new(),
            p.method.clone(),
            p.n.to_string(),
            fmt_f64(p.smape),
            fmt_f64(p.mase),
            fmt_f64(p.owa),
            String::new(),
            String::new(),
            fmt_f64(p.mean_owa),
        ]
    }));
    write_csv(path, &header, &rows)
}

pub fn read_evaluation(path: &Path) -> Result<Evaluation> {
    let (header, rows) = read_csv(path, true)?;
    if header.len() != EVAL_HEADER.len() + 1 || header[..EVAL_HEADER.len()] != EVAL_HEADER {
        return Err(CliError::artifact(path, "not an evaluation file"));
    }
    let num = |c: &str| -> Result<f64> { c.parse().map_err(|_| CliError::artifact(path, format!("number '{c}'"))) };
    let mut eval = Evaluation {
        series: Vec::new(),
        pooled: Vec::new(),
    };
    for r in rows {
        if r.len() != header.len() {
            return Err(CliError::artifact(path, "ragged evaluation row"));
        }
        match r[0].as_str() {
            "series" => eval.series.push(SeriesEval {
                id: r[2].clone(),
                period: r[3].parse::<PeriodName>().map_err(|e| CliError::artifact(path, e))?,
                series_type: r[4].parse::<SeriesType>().map_err(|e| CliError::artifact(path, e))?,
                role: (!r[1].is_empty()).then(|| r[1].clone()),
                method: r[5].clone(),
                scores: SeriesScores {
                    smape: num(&r[7])?,
                    mase: num(&r[8])?,
                    smape_naive2: num(&r[10])?,
                    mase_naive2: num(&r[11])?,
                },
            }),
            "pooled" => eval.pooled.push(PooledEval {
                method: r[5].clone(),
                subset: r[1].clone(),
                n: r[6].parse().map_err(|_| CliError::artifact(path, "count"))?,
                smape: num(&r[7])?,
                mase: num(&r[8])?,
                owa: num(&r[9])?,
                mean_owa: num(&r[12])?,
            }),
            other => return Err(CliError::artifact(path, format!("scope '{other}'"))),
        }
    }
    Ok(eval)
}

pub fn write_oracle(csv_path: &Path, json_path: &Path, rows: &[OracleRow], summary: &OracleSummary) -> Result<()> {
    let mut header: Vec<String> = [
        "id",
        "objective",
        "e_loss_mase",
        "active_count",
        "selection",
        "selection_mase",
        "total_loss",
        "p_loss",
        "e_loss",
    ]
    .map(String::from)
    .to_vec();
    header.extend(summary.pool.iter().map(|m| format!("w_{m}")));
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let d = r.decomposition.as_ref();
            let mut c = vec![
                r.id.clone(),
                fmt_f64(r.solution.objective),
                fmt_f64(r.solution.e_loss_mase(r.scale)),
                r.solution.active_count.to_string(),
                r.selection.to_string(),
                fmt_f64(r.selection_mase),
                opt(d.map(|d| d.total_loss)),
                opt(d.map(|d| d.p_loss)),
                opt(d.map(|d| d.e_loss)),
            ];
            c.extend(r.solution.x.iter().map(|v| fmt_f64(*v)));
            c
        })
        .collect();
    write_csv(csv_path, &header, &cells)?;
    write_json(json_path, summary)
}

pub fn write_curve(path: &Path, g: &GreedyResult) -> Result<()> {
    let rows: Vec<Vec<String>> = g
        .order
        .iter()
        .zip(&g.curve)
        .enumerate()
        .map(|(k, (m, v))| vec![(k + 1).to_string(), m.to_string(), fmt_f64(*v)])
        .collect();
    write_csv(path, &["size".into(), "added".into(), "mean_optimal_mase".into()], &rows)
}

pub fn read_curve(path: &Path) -> Result<GreedyResult> {
    let (_, rows) = read_csv(path, true)?;
    let mut g = GreedyResult {
        order: Vec::new(),
        curve: Vec::new(),
    };
    for r in rows {
        if r.len() != 3 {
            return Err(CliError::artifact(path, "curve rows have three cells"));
        }
        g.order.push(r[1].parse().map_err(|e| CliError::artifact(path, e))?);
        g.curve.push(r[2].parse().map_err(|_| CliError::artifact(path, format!("number '{}'", r[2])))?);
    }
    Ok(g)
}

const IMPORTANCE_HEADER: [&str; 6] = ["feature", "importance", "t_stat", "p_value", "repeats", "sd"];

pub fn write_importance(path: &Path, records: &[ImportanceRecord]) -> Result<()> {
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            vec![
                r.feature.clone(),
                fmt_f64(r.importance),
                fmt_f64(r.t_stat),
                fmt_f64(r.p_value),
                r.repeats.to_string(),
                fmt_f64(r.sd),
            ]
        })
        .collect();
    write_csv(path, &IMPORTANCE_HEADER.map(String::from), &rows)
}

pub fn read_importance(path: &Path) -> Result<Vec<ImportanceRecord>> {
    let (header, rows) = read_csv(path, true)?;
    if header != IMPORTANCE_HEADER {
        return Err(CliError::artifact(path, "not an importance file"));
    }
    let num = |c: &str| -> Result<f64> { c.parse().map_err(|_| CliError::artifact(path, format!("number '{c}'"))) };
    rows.into_iter()
        .map(|r| {
            Ok(ImportanceRecord {
                feature: r[0].clone(),
                importance: num(&r[1])?,
                t_stat: num(&r[2])?,
                p_value: num(&r[3])?,
                repeats: r[4].parse().map_err(|_| CliError::artifact(path, "repeats"))?,
                sd: num(&r[5])?,
            })
        })
        .collect()
}

pub fn write_clusters(dendrogram_path: &Path, clusters_path: &Path, d: &Dendrogram, labels: &[usize]) -> Result<()> {
    write_json(dendrogram_path, d)?;
    let rows: Vec<Vec<String>> = d
        .labels
        .iter()
        .zip(labels)
        .map(|(f, c)| vec![f.clone(), format!("cluster_{}", c + 1)])
        .collect();
    write_csv(clusters_path, &["feature".into(), "cluster".into()], &rows)
}

/// Column index groups of a clusters file, by cluster number.
pub fn read_cluster_groups(path: &Path) -> Result<Vec<Vec<usize>>> {
    let (_, rows) = read_csv(path, true)?;
    let names = feature_names();
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for r in rows {
        let j = names
            .iter()
            .position(|n| *n == r[0])
            .ok_or_else(|| CliError::artifact(path, format!("unknown feature '{}'", r[0])))?;
        let k: usize = r[1]
            .strip_prefix("cluster_")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| CliError::artifact(path, format!("cluster label '{}'", r[1])))?;
        groups.entry(k).or_default().push(j);
    }
    Ok(groups.into_values().collect())
}

/// Files written by [`write_report`], relative to the report directory.
pub const REPORT_FILES: [&str; 7] = [
    "summary.md",
    "breakdown.csv",
    "breakdown.svg",
    "versus_uniform.csv",
    "usage.csv",
    "importance.svg",
    "cluster_importance.svg",
];

pub struct ReportInputs<'a> {
    pub eval: &'a Evaluation,
    pub data: &'a ReportData,
    pub oracle: Option<&'a OracleSummary>,
    pub curve: Option<&'a GreedyResult>,
    pub importance: &'a [ImportanceRecord],
    pub cluster_importance: &'a [ImportanceRecord],
    pub target_owa: Option<(f64, f64)>,
}

pub fn write_report(dir: &Path, r: &ReportInputs<'_>) -> Result<Vec<PathBuf>> {
    let b = &r.data.breakdown;
    let periods: Vec<String> = PeriodName::ALL.iter().map(|p| p.to_string()).collect();
    let types: Vec<String> = SeriesType::ALL.iter().map(|t| t.to_string()).collect();

    let mut rows = Vec::new();
    for (i, p) in periods.iter().enumerate() {
        for (j, t) in types.iter().enumerate() {
            if let Some(c) = b.cells[i][j] {
                rows.push(vec![p.clone(), t.clone(), c.n.to_string(), fmt_f64(c.mean), fmt_f64(c.p_value)]);
            }
        }
    }
    let paths: Vec<PathBuf> = REPORT_FILES.iter().map(|f| dir.join(f)).collect();
    write_csv(
        &paths[1],
        &["period", "type", "n", "mean_owa", "p_value"].map(String::from),
        &rows,
    )?;
    let grid: Vec<Vec<Option<f64>>> = b.cells.iter().map(|row| row.iter().map(|c| c.map(|c| c.mean)).collect()).collect();
    write_atomic(&paths[2], svg::heatmap("Mean OWA by period and type", &periods, &types, &grid).as_bytes())?;

    let vs: Vec<Vec<String>> = r
        .data
        .versus_uniform
        .iter()
        .map(|c| {
            vec![
                c.bucket.clone(),
                c.n.to_string(),
                fmt_f64(c.mean_diff),
                fmt_f64(c.t_stat),
                fmt_f64(c.p_value),
                c.significant.to_string(),
            ]
        })
        .collect();
    write_csv(
        &paths[3],
        &["bucket", "n", "mean_owa_diff", "t_stat", "p_value", "significant"].map(String::from),
        &vs,
    )?;

    let usage = &r.data.usage;
    let mut urows: Vec<Vec<String>> = usage
        .histogram
        .iter()
        .enumerate()
        .map(|(k, c)| vec!["active_models".into(), k.to_string(), c.to_string()])
        .collect();
    urows.extend(
        donut_core::ModelId::ALL
            .iter()
            .zip(&usage.mean_weight)
            .map(|(m, w)| vec!["mean_weight".into(), m.to_string(), fmt_f64(*w)]),
    );
    write_csv(&paths[4], &["kind", "key", "value"].map(String::from), &urows)?;

    let mut ranked: Vec<&ImportanceRecord> = r.importance.iter().collect();
    ranked.sort_by(|a, b| b.importance.total_cmp(&a.importance).then_with(|| a.feature.cmp(&b.feature)));
    let top: Vec<&ImportanceRecord> = ranked.into_iter().take(20).collect();
    write_atomic(
        &paths[5],
        svg::bar_chart(
            "Permutation importance (top 20)",
            &top.iter().map(|x| x.feature.clone()).collect::<Vec<_>>(),
            &top.iter().map(|x| x.importance).collect::<Vec<_>>(),
        )
        .as_bytes(),
    )?;
    write_atomic(
        &paths[6],
        svg::bar_chart(
            "Cluster importance",
            &r.cluster_importance.iter().map(|x| x.feature.clone()).collect::<Vec<_>>(),
            &r.cluster_importance.iter().map(|x| x.importance).collect::<Vec<_>>(),
        )
        .as_bytes(),
    )?;

    write_atomic(&paths[0], summary_markdown(r).as_bytes())?;
    Ok(paths)
}

fn summary_markdown(r: &ReportInputs<'_>) -> String {
    let mut s = String::from("# DONUT run report\n\n## Pooled accuracy\n\n");
    s.push_str("| method | subset | n | sMAPE | MASE | OWA | mean OWA |\n|---|---|---|---|---|---|---|\n");
    for p in &r.eval.pooled {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {:.4} | {:.4} | {:.4} | {:.4} |",
            p.method, p.subset, p.n, p.smape, p.mase, p.owa, p.mean_owa
        );
    }
    if let Some((target, tol)) = r.target_owa {
        let got = r
            .eval
            .pooled(DONUT_METHOD, Role::Validation.as_str())
            .or_else(|| r.eval.pooled(DONUT_METHOD, "all"))
            .map(|p| p.owa);
        if let Some(got) = got {
            let _ = writeln!(
                s,
                "\nReference OWA {target:.3} ± {tol:.3}: obtained {got:.4} ({}).",
                if (got - target).abs() <= tol { "within band" } else { "outside band" }
            );
        }
    }
    let _ = writeln!(s, "\n## OWA breakdown\n\nGlobal mean OWA {:.4} over {} series.", r.data.breakdown.global_mean, r.data.breakdown.n);
    let flagged: Vec<String> = r
        .data
        .versus_uniform
        .iter()
        .filter(|c| c.significant)
        .map(|c| format!("{} ({:+.4})", c.bucket, c.mean_diff))
        .collect();
    let _ = writeln!(
        s,
        "Buckets where DONUT and the uniform average differ significantly: {}.",
        if flagged.is_empty() { "none".to_string() } else { flagged.join(", ") }
    );
    if let Some(o) = r.oracle {
        let _ = writeln!(
            s,
            "\n## Oracle\n\nMean optimal MASE: combination {:.4}, selection {:.4} (gain {:.1}%). Single-model optima: {:.1}%.",
            o.mean_combination_mase,
            o.mean_selection_mase,
            100.0 * o.combination_gain,
            100.0 * o.histogram.single_model_share
        );
        if let (Some(t), Some(p), Some(e)) = (o.mean_total_loss, o.mean_p_loss, o.mean_e_loss) {
            let _ = writeln!(s, "DONUT loss split (MASE units): total {t:.4} = weighting {p:.4} + ensemble {e:.4}.");
        }
    }
    if let Some(g) = r.curve {
        let _ = writeln!(s, "\n## Greedy pool\n");
        for (k, (m, v)) in g.order.iter().zip(&g.curve).enumerate() {
            let _ = writeln!(s, "{}. {m}: {v:.4}", k + 1);
        }
    }
    let mut ranked: Vec<&ImportanceRecord> = r.importance.iter().collect();
    ranked.sort_by(|a, b| b.importance.total_cmp(&a.importance).then_with(|| a.feature.cmp(&b.feature)));
    let _ = writeln!(s, "\n## Most important features\n");
    for x in ranked.iter().take(10) {
        let _ = writeln!(s, "- {}: {:.5} (p = {:.3})", x.feature, x.importance, x.p_value);
    }
    s
}
