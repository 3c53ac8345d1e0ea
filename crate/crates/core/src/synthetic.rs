//! Seeded synthetic corpora with known generating processes.
//!
//! Each series is drawn from one of five processes (linear trend, seasonal
//! sine, AR(1), Ornstein-Uhlenbeck, random walk) plus Gaussian noise, and
//! carries the process name in its `label`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::corpus::{Period, PeriodName, SeriesType, TimeSeries};
use crate::error::{Error, Result};

pub const PROCESSES: [&str; 5] = ["trend", "seasonal", "ar1", "ou", "random_walk"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthCell {
    pub period: PeriodName,
    pub series_type: SeriesType,
    pub count: usize,
}

/// Number of series to draw per (period, type) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub cells: Vec<SynthCell>,
}

impl SyntheticSpec {
    /// `total` series spread over periods with M4-like proportions and
    /// over types in rotation.
    pub fn desk(total: usize) -> Self {
        // Yearly, Quarterly, Monthly, Weekly, Daily, Hourly
        let shares = [0.23, 0.24, 0.40, 0.03, 0.06, 0.04];
        let mut counts: Vec<usize> = shares.iter().map(|s| (s * total as f64).floor() as usize).collect();
        let mut k = 0;
        while counts.iter().sum::<usize>() < total {
            counts[[2, 1, 0, 4, 5, 3][k % 6]] += 1;
            k += 1;
        }
        let mut cells = Vec::new();
        for (p, &c) in PeriodName::ALL.iter().zip(&counts) {
            for (t_idx, t) in SeriesType::ALL.iter().enumerate() {
                let share = c / 6 + usize::from(t_idx < c % 6);
                if share > 0 {
                    cells.push(SynthCell {
                        period: *p,
                        series_type: *t,
                        count: share,
                    });
                }
            }
        }
        SyntheticSpec { cells }
    }

    /// A single cell.
    pub fn uniform(period: PeriodName, series_type: SeriesType, count: usize) -> Self {
        SyntheticSpec {
            cells: vec![SynthCell {
                period,
                series_type,
                count,
            }],
        }
    }

    pub fn total(&self) -> usize {
        self.cells.iter().map(|c| c.count).sum()
    }
}

fn length_range(p: PeriodName) -> (usize, usize) {
    match p {
        PeriodName::Yearly => (24, 48),
        PeriodName::Quarterly => (40, 80),
        PeriodName::Monthly => (72, 144),
        PeriodName::Weekly => (80, 160),
        PeriodName::Daily => (100, 200),
        PeriodName::Hourly => (240, 360),
    }
}

fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

/// Draws one path of the named process with unit-scale innovations.
fn draw_process<R: Rng>(process: &str, n: usize, m: usize, rng: &mut R) -> Vec<f64> {
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    match process {
        "trend" => {
            let slope = rng.random_range(-1.0..1.0);
            let noise = rng.random_range(0.5..3.0);
            (0..n).map(|t| slope * t as f64 + noise * unit.sample(rng)).collect()
        }
        "seasonal" => {
            let period = if m > 1 { m as f64 } else { rng.random_range(5.0..13.0) };
            let amp = rng.random_range(3.0..10.0);
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            let slope = rng.random_range(-0.2..0.2);
            let noise = rng.random_range(0.3..2.0);
            (0..n)
                .map(|t| {
                    amp * (std::f64::consts::TAU * t as f64 / period + phase).sin()
                        + slope * t as f64
                        + noise * unit.sample(rng)
                })
                .collect()
        }
        "ar1" => {
            let phi = rng.random_range(0.3..0.9);
            let mut x = 0.0;
            (0..n)
                .map(|_| {
                    x = phi * x + 2.0 * unit.sample(rng);
                    x
                })
                .collect()
        }
        "ou" => {
            let gamma = rng.random_range(0.05..0.5);
            let target = rng.random_range(-10.0..10.0);
            let mut x = target + rng.random_range(-20.0..20.0);
            (0..n)
                .map(|_| {
                    x += gamma * (target - x) + 1.5 * unit.sample(rng);
                    x
                })
                .collect()
        }
        _ => {
            let drift = rng.random_range(-0.3..0.3);
            let mut x = 0.0;
            (0..n)
                .map(|_| {
                    x += drift + 2.0 * unit.sample(rng);
                    x
                })
                .collect()
        }
    }
}

/// Generates a corpus: ids are `S1, S2, ...` in cell order, every value is
/// positive and rounded to four decimals.
pub fn make_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<Vec<TimeSeries>> {
    if spec.cells.is_empty() || spec.cells.iter().any(|c| c.count == 0) {
        return Err(Error::InvalidArgument("every synthetic cell needs count >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(spec.total());
    let mut k = 0usize;
    for cell in &spec.cells {
        let period = Period::new(cell.period);
        let (lo, hi) = length_range(cell.period);
        for _ in 0..cell.count {
            let process = PROCESSES[k % PROCESSES.len()];
            k += 1;
            let n = rng.random_range(lo..=hi);
            let path = draw_process(process, n, period.m, &mut rng);
            let min = path.iter().cloned().fold(f64::INFINITY, f64::min);
            let level = rng.random_range(50.0..500.0);
            let shift = level - min.min(0.0);
            let values = path.iter().map(|v| round4(v + shift)).collect();
            let mut ts = TimeSeries::new(format!("S{k}"), values, period, cell.series_type)?;
            ts.label = Some(process.to_string());
            out.push(ts);
        }
    }
    Ok(out)
}

/// Clean and noisy sine pair used by the autoencoder experiments:
/// `cycles` full periods over `len` steps, unit amplitude, noise sd `noise`.
pub fn noisy_sine<R: Rng>(len: usize, cycles: f64, phase: f64, noise: f64, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let clean: Vec<f64> = (0..len)
        .map(|t| (std::f64::consts::TAU * cycles * t as f64 / len as f64 + phase).sin())
        .collect();
    let noisy = clean.iter().map(|v| v + noise * normal.sample(rng)).collect();
    (clean, noisy)
}

/// Random sine training set for the autoencoder experiment: frequencies
/// between half a cycle and three cycles per window, random phase, noise
/// sd `noise`.
pub fn sine_corpus(count: usize, len: usize, noise: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let cycles = rng.random_range(0.5..3.0);
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            noisy_sine(len, cycles, phase, noise, &mut rng).1
        })
        .collect()
}

/// `tanh` ramp from −1 to 1 over `len` steps.
pub fn tanh_ramp(len: usize) -> Vec<f64> {
    (0..len)
        .map(|t| (6.0 * (t as f64 / (len - 1) as f64 - 0.5)).tanh())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_positive() {
        let spec = SyntheticSpec::desk(60);
        assert_eq!(spec.total(), 60);
        let a = make_synthetic(&spec, 1).unwrap();
        let b = make_synthetic(&spec, 1).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|s| s.values.iter().all(|&v| v > 0.0)));
        assert!(a.iter().all(|s| s.split().is_ok()));
        let c = make_synthetic(&spec, 2).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn labels_cycle_through_processes() {
        let corpus = make_synthetic(&SyntheticSpec::uniform(PeriodName::Monthly, SeriesType::Micro, 10), 3).unwrap();
        let labels: Vec<&str> = corpus.iter().map(|s| s.label.as_deref().unwrap()).collect();
        assert_eq!(&labels[..5], &PROCESSES);
    }

    #[test]
    fn ramp_endpoints() {
        let r = tanh_ramp(100);
        assert!(r[0] < -0.99 && r[99] > 0.99);
    }
}
