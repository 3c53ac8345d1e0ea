//! Flat CSV/JSON artifacts: atomic writes, digests, and the file formats
//! exchanged between stages.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;

use donut_core::model_pool::ForecastMatrix;
use donut_core::stat_features::{StatFeatures, N_STAT_FEATURES, STAT_FEATURE_NAMES};
use donut_core::{ModelId, N_MODELS};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub fn digest_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn digest_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(digest_bytes(&bytes))
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut builder = tempfile::Builder::new();
    builder.prefix(".donut-tmp-");
    // Temp files default to 0600; artifacts get the usual umask-filtered mode.
    #[cfg(unix)]
    builder.permissions(std::os::unix::fs::PermissionsExt::from_mode(0o666));
    let mut tmp = builder
        .tempfile_in(dir)
        .map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::artifact(path, e))? + "\n";
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::artifact(path, e))
}

/// Renders rows (header first) as CSV text.
pub fn csv_text(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    if !header.is_empty() {
        w.write_record(header).expect("in-memory csv");
    }
    for r in rows {
        w.write_record(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    write_atomic(path, csv_text(header, rows).as_bytes())
}

/// Reads a CSV into its header and rows of raw cells.
pub fn read_csv(path: &Path, has_header: bool) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::artifact(path, e))?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::artifact(path, e))?;
        rows.push(rec.iter().map(str::to_string).collect::<Vec<_>>());
    }
    let header = if has_header && !rows.is_empty() {
        rows.remove(0)
    } else {
        Vec::new()
    };
    Ok((header, rows))
}

pub fn fmt_f64(v: f64) -> String {
    v.to_string()
}

fn parse_f64(path: &Path, cell: &str) -> Result<f64> {
    cell.trim()
        .parse::<f64>()
        .map_err(|_| CliError::artifact(path, format!("not a number: '{cell}'")))
}

/// One line of a forecasts file: `id, model, v1..vh, fallback`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastRow {
    pub id: String,
    pub model: String,
    pub values: Vec<f64>,
    pub fallback: bool,
}

pub fn forecast_rows(matrices: &[ForecastMatrix]) -> Vec<ForecastRow> {
    matrices
        .iter()
        .flat_map(|fm| {
            ModelId::ALL.iter().map(move |m| ForecastRow {
                id: fm.id.clone(),
                model: m.name().to_string(),
                values: fm.rows[m.index()].clone(),
                fallback: fm.fallback[m.index()],
            })
        })
        .collect()
}

pub fn write_forecasts(path: &Path, rows: &[ForecastRow]) -> Result<()> {
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut c = vec![r.id.clone(), r.model.clone()];
            c.extend(r.values.iter().map(|v| fmt_f64(*v)));
            c.push(if r.fallback { "1" } else { "0" }.to_string());
            c
        })
        .collect();
    write_csv(path, &[], &cells)
}

pub fn read_forecasts(path: &Path) -> Result<Vec<ForecastRow>> {
    let (_, rows) = read_csv(path, false)?;
    rows.into_iter()
        .map(|r| {
            if r.len() < 4 {
                return Err(CliError::artifact(path, "forecast row needs id, model, values and a fallback flag"));
            }
            let fallback = match r[r.len() - 1].trim() {
                "0" => false,
                "1" => true,
                other => return Err(CliError::artifact(path, format!("fallback flag '{other}'"))),
            };
            let values = r[2..r.len() - 1].iter().map(|c| parse_f64(path, c)).collect::<Result<_>>()?;
            Ok(ForecastRow {
                id: r[0].clone(),
                model: r[1].clone(),
                values,
                fallback,
            })
        })
        .collect()
}

/// Groups pool forecasts into one matrix per series, in first-seen order.
/// Rows for names outside the pool (combined forecasts) are ignored.
pub fn forecast_matrices(path: &Path, rows: &[ForecastRow]) -> Result<Vec<ForecastMatrix>> {
    let mut order: Vec<String> = Vec::new();
    type Slots = Vec<Option<(Vec<f64>, bool)>>;
    let mut by_id: HashMap<String, Slots> = HashMap::new();
    for r in rows {
        let Ok(model) = r.model.parse::<ModelId>() else {
            continue;
        };
        let slot = by_id.entry(r.id.clone()).or_insert_with(|| {
            order.push(r.id.clone());
            vec![None; N_MODELS]
        });
        slot[model.index()] = Some((r.values.clone(), r.fallback));
    }
    order
        .into_iter()
        .map(|id| {
            let slots = by_id.remove(&id).expect("recorded id");
            let mut rows = Vec::with_capacity(N_MODELS);
            let mut fallback = Vec::with_capacity(N_MODELS);
            for (k, s) in slots.into_iter().enumerate() {
                let (v, f) =
                    s.ok_or_else(|| CliError::artifact(path, format!("series '{id}' lacks model {}", ModelId::ALL[k])))?;
                rows.push(v);
                fallback.push(f);
            }
            let fm = ForecastMatrix { id, rows, fallback };
            fm.validate().map_err(|e| CliError::artifact(path, e))?;
            Ok(fm)
        })
        .collect()
}

/// Statistical feature table; missing values are written as empty cells.
pub fn write_stat_features(path: &Path, rows: &[(String, StatFeatures)]) -> Result<()> {
    let mut header = vec!["id".to_string()];
    header.extend(STAT_FEATURE_NAMES.iter().map(|s| s.to_string()));
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|(id, f)| {
            let mut c = vec![id.clone()];
            c.extend(
                f.values
                    .iter()
                    .zip(&f.missing)
                    .map(|(v, &miss)| if miss { String::new() } else { fmt_f64(*v) }),
            );
            c
        })
        .collect();
    write_csv(path, &header, &cells)
}

pub fn read_stat_features(path: &Path) -> Result<Vec<(String, StatFeatures)>> {
    let (header, rows) = read_csv(path, true)?;
    let expected: Vec<&str> = std::iter::once("id").chain(STAT_FEATURE_NAMES.iter().copied()).collect();
    if header.iter().map(String::as_str).collect::<Vec<_>>() != expected {
        return Err(CliError::artifact(path, "header does not list the statistical features in order"));
    }
    rows.into_iter()
        .map(|r| {
            if r.len() != N_STAT_FEATURES + 1 {
                return Err(CliError::artifact(path, format!("row '{}' has {} cells", r[0], r.len())));
            }
            let mut values = Vec::with_capacity(N_STAT_FEATURES);
            let mut missing = Vec::with_capacity(N_STAT_FEATURES);
            for c in &r[1..] {
                if c.trim().is_empty() {
                    values.push(0.0);
                    missing.push(true);
                } else {
                    values.push(parse_f64(path, c)?);
                    missing.push(false);
                }
            }
            Ok((r[0].clone(), StatFeatures { values, missing }))
        })
        .collect()
}

/// A table keyed by id with named numeric columns (embeddings, weights).
pub fn write_table(path: &Path, columns: &[String], rows: &[(String, Vec<f64>)]) -> Result<()> {
    let mut header = vec!["id".to_string()];
    header.extend(columns.iter().cloned());
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|(id, v)| std::iter::once(id.clone()).chain(v.iter().map(|x| fmt_f64(*x))).collect())
        .collect();
    write_csv(path, &header, &cells)
}

pub fn read_table(path: &Path, columns: &[String]) -> Result<Vec<(String, Vec<f64>)>> {
    let (header, rows) = read_csv(path, true)?;
    if header.len() != columns.len() + 1 || header[1..] != *columns {
        return Err(CliError::artifact(path, format!("expected columns id,{}", columns.join(","))));
    }
    rows.into_iter()
        .map(|r| {
            if r.len() != columns.len() + 1 {
                return Err(CliError::artifact(path, format!("row '{}' has {} cells", r[0], r.len())));
            }
            let v = r[1..].iter().map(|c| parse_f64(path, c)).collect::<Result<_>>()?;
            Ok((r[0].clone(), v))
        })
        .collect()
}

pub fn embedding_columns(dim: usize) -> Vec<String> {
    (0..dim).map(|k| format!("lstm_{k}")).collect()
}

pub fn model_columns() -> Vec<String> {
    ModelId::ALL.iter().map(|m| m.name().to_string()).collect()
}

/// Role of a series in the weighting-network split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Role {
    Train,
    Validation,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Train => "train",
            Role::Validation => "validation",
        }
    }
}

pub fn write_split(path: &Path, roles: &[(String, Role)]) -> Result<()> {
    let rows: Vec<Vec<String>> = roles.iter().map(|(id, r)| vec![id.clone(), r.as_str().to_string()]).collect();
    write_csv(path, &["id".into(), "role".into()], &rows)
}

pub fn read_split(path: &Path) -> Result<BTreeMap<String, Role>> {
    let (_, rows) = read_csv(path, true)?;
    rows.into_iter()
        .map(|r| {
            let role = match r.get(1).map(String::as_str) {
                Some("train") => Role::Train,
                Some("validation") => Role::Validation,
                other => return Err(CliError::artifact(path, format!("role {other:?}"))),
            };
            Ok((r[0].clone(), role))
        })
        .collect()
}
