//! Series data model, M4-style CSV ingestion, holdout splitting and
//! train/validation partitioning.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sampling frequency of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PeriodName {
    Yearly,
    Quarterly,
    Monthly,
    Weekly,
    Daily,
    Hourly,
}

impl PeriodName {
    pub const ALL: [PeriodName; 6] = [
        PeriodName::Yearly,
        PeriodName::Quarterly,
        PeriodName::Monthly,
        PeriodName::Weekly,
        PeriodName::Daily,
        PeriodName::Hourly,
    ];

    /// Default `(m, h)` following the M4 competition conventions.
    pub fn defaults(self) -> (usize, usize) {
        match self {
            PeriodName::Yearly => (1, 6),
            PeriodName::Quarterly => (4, 8),
            PeriodName::Monthly => (12, 18),
            PeriodName::Weekly => (1, 13),
            PeriodName::Daily => (1, 14),
            PeriodName::Hourly => (24, 48),
        }
    }

    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PeriodName::Yearly => "Yearly",
            PeriodName::Quarterly => "Quarterly",
            PeriodName::Monthly => "Monthly",
            PeriodName::Weekly => "Weekly",
            PeriodName::Daily => "Daily",
            PeriodName::Hourly => "Hourly",
        }
    }
}

impl fmt::Display for PeriodName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PeriodName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PeriodName::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse {
                field: "period",
                value: s.to_string(),
            })
    }
}

/// A period together with its seasonal period `m` and horizon `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Period {
    pub name: PeriodName,
    pub m: usize,
    pub h: usize,
}

impl Period {
    pub fn new(name: PeriodName) -> Self {
        let (m, h) = name.defaults();
        Period { name, m, h }
    }

    /// Period with overridden `m`/`h`; both must be at least one.
    pub fn with_overrides(name: PeriodName, m: Option<usize>, h: Option<usize>) -> Result<Self> {
        let mut p = Period::new(name);
        if let Some(m) = m {
            p.m = m;
        }
        if let Some(h) = h {
            p.h = h;
        }
        if p.m == 0 || p.h == 0 {
            return Err(Error::InvalidArgument(format!(
                "period {name} needs m >= 1 and h >= 1"
            )));
        }
        Ok(p)
    }
}

/// Domain of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SeriesType {
    Demographic,
    Finance,
    Industry,
    Macro,
    Micro,
    Other,
}

impl SeriesType {
    pub const ALL: [SeriesType; 6] = [
        SeriesType::Demographic,
        SeriesType::Finance,
        SeriesType::Industry,
        SeriesType::Macro,
        SeriesType::Micro,
        SeriesType::Other,
    ];

    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SeriesType::Demographic => "Demographic",
            SeriesType::Finance => "Finance",
            SeriesType::Industry => "Industry",
            SeriesType::Macro => "Macro",
            SeriesType::Micro => "Micro",
            SeriesType::Other => "Other",
        }
    }
}

impl fmt::Display for SeriesType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SeriesType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SeriesType::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse {
                field: "type",
                value: s.to_string(),
            })
    }
}

/// One univariate series with its metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub id: String,
    pub values: Vec<f64>,
    pub period: Period,
    pub series_type: SeriesType,
    /// Generating-process label for synthetic data; `None` for real data.
    #[serde(default)]
    pub label: Option<String>,
}

impl TimeSeries {
    /// Builds a validated series: at least 3 observations, all finite.
    pub fn new(
        id: impl Into<String>,
        values: Vec<f64>,
        period: Period,
        series_type: SeriesType,
    ) -> Result<Self> {
        let id = id.into();
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { id, index });
        }
        if values.len() < 3 {
            return Err(Error::TooShort(id));
        }
        Ok(TimeSeries {
            id,
            values,
            period,
            series_type,
            label: None,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Holds out the last `h` observations.
    pub fn split(&self) -> Result<SplitSeries> {
        split(self)
    }
}

/// A series separated into fitting data and a held-out horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSeries {
    pub train: Vec<f64>,
    pub test: Vec<f64>,
}

/// Splits off the last `period.h` observations. Requires `n > h + 2`.
pub fn split(ts: &TimeSeries) -> Result<SplitSeries> {
    let n = ts.values.len();
    let h = ts.period.h;
    if n <= h + 2 {
        return Err(Error::TooShortForSplit(ts.id.clone()));
    }
    Ok(SplitSeries {
        train: ts.values[..n - h].to_vec(),
        test: ts.values[n - h..].to_vec(),
    })
}

/// Random disjoint partition keeping `round(fraction * n)` series in the
/// first part. Each part preserves the input order.
pub fn partition(
    corpus: &[TimeSeries],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<TimeSeries>, Vec<TimeSeries>)> {
    let (a, b) = partition_indices(corpus.len(), fraction, seed)?;
    Ok((
        a.into_iter().map(|i| corpus[i].clone()).collect(),
        b.into_iter().map(|i| corpus[i].clone()).collect(),
    ))
}

/// Index form of [`partition`].
pub fn partition_indices(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "partition fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let k = (fraction * n as f64).round() as usize;
    let mut first = idx[..k].to_vec();
    let mut second = idx[k..].to_vec();
    first.sort_unstable();
    second.sort_unstable();
    Ok((first, second))
}

/// One parsed row of a train file, before metadata is attached.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub id: String,
    pub values: Vec<f64>,
}

/// Parses a ragged train CSV. Trailing empty cells are padding; empty cells
/// followed by a value are an error. A first row whose first cell is `id`
/// is treated as a header.
pub fn parse_train_csv(text: &str) -> Result<Vec<RawRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let mut cells = record.iter();
        let id = match cells.next() {
            Some(id) => id.trim().trim_matches('"').to_string(),
            None => continue,
        };
        if line == 0 && id.eq_ignore_ascii_case("id") {
            continue;
        }
        if id.is_empty() {
            continue;
        }
        let cells: Vec<&str> = cells.map(str::trim).collect();
        let last = cells.iter().rposition(|c| !c.is_empty()).map_or(0, |p| p + 1);
        let mut values = Vec::with_capacity(last);
        for (index, cell) in cells[..last].iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::EmptyCell { id, index });
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                field: "value",
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { id, index });
            }
            values.push(v);
        }
        rows.push(RawRow { id, values });
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
struct MetaRow {
    series_type: SeriesType,
    period: Period,
    label: Option<String>,
}

fn parse_meta_csv(text: &str) -> Result<HashMap<String, MetaRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (id_col, type_col, period_col) = match (col("id"), col("type"), col("period")) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => {
            return Err(Error::Parse {
                field: "meta header",
                value: headers.join(","),
            })
        }
    };
    let (m_col, h_col, label_col) = (col("m"), col("h"), col("label"));
    let opt_usize = |record: &csv::StringRecord, c: Option<usize>, field: &'static str| {
        match c.and_then(|c| record.get(c)).filter(|s| !s.is_empty()) {
            None => Ok(None),
            Some(s) => s.parse::<usize>().map(Some).map_err(|_| Error::Parse {
                field,
                value: s.to_string(),
            }),
        }
    };
    let mut out = HashMap::new();
    for record in reader.records() {
        let record = record?;
        let get = |c: usize| record.get(c).unwrap_or("");
        let id = get(id_col).to_string();
        let series_type: SeriesType = get(type_col).parse()?;
        let name: PeriodName = get(period_col).parse()?;
        let period = Period::with_overrides(
            name,
            opt_usize(&record, m_col, "m")?,
            opt_usize(&record, h_col, "h")?,
        )?;
        let label = label_col
            .and_then(|c| record.get(c))
            .filter(|s| !s.is_empty())
            .map(str::to_string);
        out.insert(
            id,
            MetaRow {
                series_type,
                period,
                label,
            },
        );
    }
    Ok(out)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Loads a corpus from a train CSV and a meta CSV, preserving file order.
pub fn load_corpus(train_path: &Path, meta_path: &Path) -> Result<Vec<TimeSeries>> {
    let rows = parse_train_csv(&read_text(train_path)?)?;
    let meta = parse_meta_csv(&read_text(meta_path)?)?;
    rows.into_iter()
        .map(|row| {
            let m = meta
                .get(&row.id)
                .ok_or_else(|| Error::MissingMeta(row.id.clone()))?;
            let mut ts = TimeSeries::new(row.id, row.values, m.period, m.series_type)?;
            ts.label = m.label.clone();
            Ok(ts)
        })
        .collect()
}

pub const TRAIN_FILE: &str = "train.csv";
pub const META_FILE: &str = "meta.csv";

/// Loads a corpus directory holding `train.csv` and `meta.csv`.
pub fn load_corpus_dir(dir: &Path) -> Result<Vec<TimeSeries>> {
    load_corpus(&dir.join(TRAIN_FILE), &dir.join(META_FILE))
}

/// Renders the train CSV (no header, one row per series).
pub fn train_csv(corpus: &[TimeSeries]) -> String {
    let mut out = String::new();
    for ts in corpus {
        out.push_str(&ts.id);
        for v in &ts.values {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

/// Renders the meta CSV with explicit `m`/`h` and the optional label.
pub fn meta_csv(corpus: &[TimeSeries]) -> String {
    let mut out = String::from("id,type,period,m,h,label\n");
    for ts in corpus {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            ts.id,
            ts.series_type,
            ts.period.name,
            ts.period.m,
            ts.period.h,
            ts.label.as_deref().unwrap_or("")
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monthly(id: &str, n: usize) -> TimeSeries {
        TimeSeries::new(
            id,
            (0..n).map(|v| v as f64).collect(),
            Period::new(PeriodName::Monthly),
            SeriesType::Micro,
        )
        .unwrap()
    }

    #[test]
    fn parses_row_with_meta() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("t.csv"), "S1,1,2,3\n").unwrap();
        fs::write(dir.path().join("m.csv"), "id,type,period\nS1,Micro,Monthly\n").unwrap();
        let c = load_corpus(&dir.path().join("t.csv"), &dir.path().join("m.csv")).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].id, "S1");
        assert_eq!(c[0].values, vec![1.0, 2.0, 3.0]);
        assert_eq!(c[0].period.m, 12);
        assert_eq!(c[0].period.h, 18);
        assert_eq!(c[0].series_type, SeriesType::Micro);
    }

    #[test]
    fn trailing_empty_cells_are_padding() {
        let rows = parse_train_csv("S2,5,6,,\n").unwrap();
        assert_eq!(rows[0].values, vec![5.0, 6.0]);
        let err = parse_train_csv("S3,5,,6\n").unwrap_err();
        assert!(matches!(err, Error::EmptyCell { index: 1, .. }));
    }

    #[test]
    fn header_row_is_skipped() {
        let rows = parse_train_csv("id,v1,v2,v3\nA,1,2,3\n").unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].id, "A");
    }

    #[test]
    fn load_errors() {
        let dir = tempfile::tempdir().unwrap();
        let t = dir.path().join("t.csv");
        let m = dir.path().join("m.csv");
        fs::write(&m, "id,type,period\nS2,Micro,Monthly\n").unwrap();
        fs::write(&t, "S2,5,6,,\n").unwrap();
        assert!(matches!(load_corpus(&t, &m), Err(Error::TooShort(_))));
        fs::write(&t, "X,1,2,3\n").unwrap();
        assert!(matches!(load_corpus(&t, &m), Err(Error::MissingMeta(_))));
        fs::write(&t, "S2,1,NaN,3\n").unwrap();
        assert!(matches!(
            load_corpus(&t, &m),
            Err(Error::NonFiniteValue { index: 1, .. })
        ));
    }

    #[test]
    fn meta_overrides_m_and_h() {
        let meta = parse_meta_csv("id,type,period,m,h\nA,Finance,Weekly,52,\n").unwrap();
        let p = meta["A"].period;
        assert_eq!((p.m, p.h), (52, 13));
    }

    #[test]
    fn split_boundaries() {
        let s = monthly("a", 30).split().unwrap();
        assert_eq!((s.train.len(), s.test.len()), (12, 18));
        assert!(matches!(
            monthly("b", 19).split(),
            Err(Error::TooShortForSplit(_))
        ));
        let yearly = TimeSeries::new(
            "c",
            vec![1.0; 100],
            Period::new(PeriodName::Yearly),
            SeriesType::Macro,
        )
        .unwrap();
        let s = yearly.split().unwrap();
        assert_eq!((s.train.len(), s.test.len()), (94, 6));
    }

    #[test]
    fn partition_is_reproducible() {
        let corpus: Vec<_> = (0..10).map(|i| monthly(&format!("s{i}"), 30)).collect();
        let (a, b) = partition(&corpus, 0.8, 7).unwrap();
        assert_eq!((a.len(), b.len()), (8, 2));
        let (a2, b2) = partition(&corpus, 0.8, 7).unwrap();
        assert_eq!(a, a2);
        assert_eq!(b, b2);
        let (big_a, big_b) = partition_indices(100_000, 0.8, 3).unwrap();
        assert_eq!((big_a.len(), big_b.len()), (80_000, 20_000));
        assert!(partition(&corpus, 1.0, 7).is_err());
    }

    #[test]
    fn period_defaults() {
        let hs: Vec<_> = PeriodName::ALL.iter().map(|p| p.defaults()).collect();
        assert_eq!(hs, vec![(1, 6), (4, 8), (12, 18), (1, 13), (1, 14), (24, 48)]);
    }
}
