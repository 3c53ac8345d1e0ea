use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{PeriodName, SeriesType};
use crate::error::{Error, Result};
use crate::stats::{mean, t_test};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesOwa {
    pub id: String,
    pub period: PeriodName,
    pub series_type: SeriesType,
    pub owa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellStat {
    pub mean: f64,
    pub n: usize,
    /// Two-sided one-sample t-test of the cell against the global mean.
    pub p_value: f64,
}

/// Mean OWA per (period, type) cell; rows follow `PeriodName::ALL`,
/// columns `SeriesType::ALL`. Empty cells are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OwaBreakdown {
    pub cells: Vec<Vec<Option<CellStat>>>,
    pub period_means: Vec<Option<f64>>,
    pub type_means: Vec<Option<f64>>,
    pub global_mean: f64,
    pub n: usize,
}

fn mean_or_none(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| mean(v))
}

pub fn owa_breakdown(records: &[SeriesOwa]) -> Result<OwaBreakdown> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("breakdown needs at least one series".into()));
    }
    let all: Vec<f64> = records.iter().map(|r| r.owa).collect();
    let global_mean = mean(&all);
    let mut groups = vec![vec![Vec::new(); 6]; 6];
    for r in records {
        groups[r.period.ordinal()][r.series_type.ordinal()].push(r.owa);
    }
    let cells = groups
        .iter()
        .map(|row| {
            row.iter()
                .map(|v: &Vec<f64>| {
                    mean_or_none(v).map(|m| CellStat {
                        mean: m,
                        n: v.len(),
                        p_value: t_test(v, global_mean).p_two_sided,
                    })
                })
                .collect()
        })
        .collect();
    let period_means = groups.iter().map(|row| mean_or_none(&row.concat())).collect();
    let type_means = (0..6)
        .map(|t| {
            let col: Vec<f64> = groups.iter().flat_map(|row| row[t].iter().copied()).collect();
            mean_or_none(&col)
        })
        .collect();
    Ok(OwaBreakdown {
        cells,
        period_means,
        type_means,
        global_mean,
        n: records.len(),
    })
}

/// How paired series are grouped in [`compare_buckets`].
#[derive(Debug, Clone, PartialEq)]
pub enum Bucketing {
    /// One bucket per (period, type) cell, taken from the first result set.
    TypePeriod,
    /// Equal-count bins of a per-series feature value, lowest first.
    FeatureQuantile { values: HashMap<String, f64>, bins: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketCell {
    pub bucket: String,
    pub n: usize,
    /// Mean of `owa_a − owa_b`.
    pub mean_diff: f64,
    pub t_stat: f64,
    /// Two-sided paired t-test p-value.
    pub p_value: f64,
    pub significant: bool,
}

/// Paired comparison of two result sets per bucket.
pub fn compare_buckets(a: &[SeriesOwa], b: &[SeriesOwa], bucketing: &Bucketing, alpha: f64) -> Result<Vec<BucketCell>> {
    let b_by_id: HashMap<&str, f64> = b.iter().map(|r| (r.id.as_str(), r.owa)).collect();
    let a_ids: HashMap<&str, ()> = a.iter().map(|r| (r.id.as_str(), ())).collect();
    if let Some(r) = b.iter().find(|r| !a_ids.contains_key(r.id.as_str())) {
        return Err(Error::UnpairedSeries(r.id.clone()));
    }
    let mut keyed: Vec<((usize, String), f64)> = Vec::with_capacity(a.len());
    match bucketing {
        Bucketing::TypePeriod => {
            for r in a {
                let other = b_by_id.get(r.id.as_str()).ok_or_else(|| Error::UnpairedSeries(r.id.clone()))?;
                let key = r.period.ordinal() * 6 + r.series_type.ordinal();
                keyed.push(((key, format!("{}/{}", r.period, r.series_type)), r.owa - other));
            }
        }
        Bucketing::FeatureQuantile { values, bins } => {
            if *bins == 0 {
                return Err(Error::InvalidArgument("quantile bucketing needs at least one bin".into()));
            }
            let mut ranked: Vec<(&SeriesOwa, f64)> = a
                .iter()
                .map(|r| {
                    let v = values.get(&r.id).copied().ok_or_else(|| Error::MissingPart {
                        id: r.id.clone(),
                        part: "bucketing feature",
                    })?;
                    Ok((r, v))
                })
                .collect::<Result<_>>()?;
            ranked.sort_by(|x, y| x.1.total_cmp(&y.1).then_with(|| x.0.id.cmp(&y.0.id)));
            let n = ranked.len();
            for (rank, (r, _)) in ranked.iter().enumerate() {
                let other = b_by_id.get(r.id.as_str()).ok_or_else(|| Error::UnpairedSeries(r.id.clone()))?;
                let bin = rank * bins / n;
                keyed.push(((bin, format!("q{}", bin + 1)), r.owa - other));
            }
        }
    }
    let mut groups: BTreeMap<(usize, String), Vec<f64>> = BTreeMap::new();
    for (k, d) in keyed {
        groups.entry(k).or_default().push(d);
    }
    Ok(groups
        .into_iter()
        .map(|((_, bucket), d)| {
            let tt = t_test(&d, 0.0);
            BucketCell {
                bucket,
                n: d.len(),
                mean_diff: mean(&d),
                t_stat: tt.t,
                p_value: tt.p_two_sided,
                significant: tt.p_two_sided < alpha,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, p: PeriodName, t: SeriesType, owa: f64) -> SeriesOwa {
        SeriesOwa {
            id: id.into(),
            period: p,
            series_type: t,
            owa,
        }
    }

    #[test]
    fn hand_table() {
        let rs = vec![
            rec("a", PeriodName::Yearly, SeriesType::Macro, 0.8),
            rec("b", PeriodName::Yearly, SeriesType::Macro, 1.0),
            rec("c", PeriodName::Monthly, SeriesType::Finance, 0.6),
            rec("d", PeriodName::Yearly, SeriesType::Finance, 1.2),
        ];
        let b = owa_breakdown(&rs).unwrap();
        assert!((b.global_mean - 0.9).abs() < 1e-15);
        let ym = b.cells[PeriodName::Yearly.ordinal()][SeriesType::Macro.ordinal()].unwrap();
        assert!((ym.mean - 0.9).abs() < 1e-15 && ym.n == 2);
        assert!((b.period_means[PeriodName::Yearly.ordinal()].unwrap() - 1.0).abs() < 1e-15);
        assert!((b.type_means[SeriesType::Finance.ordinal()].unwrap() - 0.9).abs() < 1e-15);
        assert!(b.cells[PeriodName::Hourly.ordinal()][SeriesType::Other.ordinal()].is_none());
    }

    #[test]
    fn single_cell_has_unit_p() {
        let rs: Vec<SeriesOwa> = (0..5)
            .map(|i| rec(&i.to_string(), PeriodName::Daily, SeriesType::Micro, 0.5 + 0.1 * i as f64))
            .collect();
        let b = owa_breakdown(&rs).unwrap();
        let c = b.cells[PeriodName::Daily.ordinal()][SeriesType::Micro.ordinal()].unwrap();
        assert_eq!(c.mean, b.global_mean);
        assert_eq!(c.p_value, 1.0);
    }

    #[test]
    fn unpaired_is_an_error() {
        let a = vec![rec("x", PeriodName::Daily, SeriesType::Micro, 1.0)];
        let b = vec![rec("y", PeriodName::Daily, SeriesType::Micro, 1.0)];
        assert!(matches!(compare_buckets(&a, &b, &Bucketing::TypePeriod, 0.05), Err(Error::UnpairedSeries(_))));
    }
}
