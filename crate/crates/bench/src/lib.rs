//! Fixtures shared by the criterion benches in `benches/`.

use donut_core::model_pool::forecast_all;
use donut_core::oracle::OracleInstance;
use donut_core::synthetic::{make_synthetic, SyntheticSpec};
use donut_core::TimeSeries;

/// The first `n` series of the seeded desk corpus.
pub fn desk_series(n: usize) -> Vec<TimeSeries> {
    make_synthetic(&SyntheticSpec::desk(n), 42).expect("desk corpus generates")
}

/// Oracle instances built from the full pool's forecasts of `series`.
pub fn oracle_instances(series: &[TimeSeries]) -> Vec<OracleInstance> {
    series
        .iter()
        .filter_map(|ts| {
            let split = ts.split().ok()?;
            let fm = forecast_all(&ts.id, &split.train, ts.period.m, ts.period.h);
            let scale = donut_core::metrics::mase_scale(&split.train, ts.period.m).ok()?;
            Some(OracleInstance {
                id: ts.id.clone(),
                rows: fm.rows,
                actual: split.test,
                scale,
            })
        })
        .collect()
}
