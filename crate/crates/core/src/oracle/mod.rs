//! Ex-post analysis by linear programming: the best achievable convex
//! combination of a pool's forecasts, the best single model, the split of a
//! method's loss into weighting and ensemble parts, and greedy pool
//! construction.

mod simplex;

pub use simplex::{Constraint, LinearProgram, LpFailure, LpSolution, Sense};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model_pool::ModelId;

/// Weights above this count as active.
pub const ACTIVE_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    /// Simplex weights in pool order.
    pub x: Vec<f64>,
    pub z_plus: Vec<f64>,
    pub z_minus: Vec<f64>,
    /// `Σ_t |y_t − Σ_i x_i b_it|` in series units.
    pub objective: f64,
    pub active_count: usize,
    /// Smallest final reduced cost (≥ −1e-10 at an optimum).
    pub min_reduced_cost: f64,
    /// Largest constraint violation of the scaled program.
    pub max_violation: f64,
}

impl OracleSolution {
    /// Objective expressed as MASE: `objective / (h · D)`.
    pub fn e_loss_mase(&self, scale: f64) -> f64 {
        self.objective / (self.z_plus.len() as f64 * scale)
    }
}

fn validate(rows: &[Vec<f64>], y: &[f64]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("oracle pool is empty".into()));
    }
    if y.is_empty() {
        return Err(Error::InvalidArgument("oracle horizon is empty".into()));
    }
    if let Some(r) = rows.iter().find(|r| r.len() != y.len()) {
        return Err(Error::shape(y.len(), r.len()));
    }
    if rows.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("oracle inputs must be finite".into()));
    }
    Ok(())
}

/// `Σ_t |y_t − Σ_i x_i b_it|`, accumulated in pool order.
pub fn combination_loss(x: &[f64], rows: &[Vec<f64>], y: &[f64]) -> f64 {
    (0..y.len())
        .map(|t| {
            let mut f = 0.0;
            for (w, row) in x.iter().zip(rows) {
                f += w * row[t];
            }
            (y[t] - f).abs()
        })
        .sum()
}

/// Builds the program `min Σ(z⁺ + z⁻)` s.t. `y_t − Σ x_i b_it ≤ z⁺_t`,
/// `Σ x_i b_it − y_t ≤ z⁻_t`, `Σ x_i = 1`, all variables non-negative.
/// Variables are ordered `x, z⁺, z⁻`.
pub fn oracle_program(rows: &[Vec<f64>], y: &[f64]) -> LinearProgram {
    let k = rows.len();
    let h = y.len();
    let nv = k + 2 * h;
    let mut objective = vec![0.0; nv];
    objective[k..].iter_mut().for_each(|c| *c = 1.0);
    let mut constraints = Vec::with_capacity(2 * h + 1);
    for t in 0..h {
        let mut a = vec![0.0; nv];
        for i in 0..k {
            a[i] = -rows[i][t];
        }
        a[k + t] = -1.0;
        constraints.push(Constraint {
            coeffs: a,
            sense: Sense::Le,
            rhs: -y[t],
        });
        let mut b = vec![0.0; nv];
        for i in 0..k {
            b[i] = rows[i][t];
        }
        b[k + h + t] = -1.0;
        constraints.push(Constraint {
            coeffs: b,
            sense: Sense::Le,
            rhs: y[t],
        });
    }
    let mut sum = vec![0.0; nv];
    sum[..k].iter_mut().for_each(|c| *c = 1.0);
    constraints.push(Constraint {
        coeffs: sum,
        sense: Sense::Eq,
        rhs: 1.0,
    });
    LinearProgram {
        objective,
        constraints,
    }
}

/// Globally optimal simplex weights for the pool rows `rows` against the
/// actuals `y`.
pub fn optimal_weights(rows: &[Vec<f64>], y: &[f64]) -> Result<OracleSolution> {
    validate(rows, y)?;
    let k = rows.len();
    // Work on a unit-scale copy so tolerances are scale free.
    let s = rows
        .iter()
        .flatten()
        .chain(y)
        .fold(0.0f64, |a, v| a.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let srows: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v / s).collect()).collect();
    let sy: Vec<f64> = y.iter().map(|v| v / s).collect();
    let lp = oracle_program(&srows, &sy);
    let sol = simplex::lp_result(lp.solve())?;
    let mut x: Vec<f64> = sol.x[..k].to_vec();
    let max_violation = lp.max_violation(&sol.x);
    // A single-model vertex that ties the optimum up to rounding is
    // preferred, so the reported objective never exceeds the selection loss.
    let (best, sel_loss) = optimal_selection(rows, y)?;
    if sel_loss <= combination_loss(&x, rows, y) {
        x = vec![0.0; k];
        x[best] = 1.0;
    }
    let min_rc = sol.reduced_costs.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(finish(x, rows, y, min_rc, max_violation))
}

fn finish(x: Vec<f64>, rows: &[Vec<f64>], y: &[f64], min_reduced_cost: f64, max_violation: f64) -> OracleSolution {
    let mut z_plus = Vec::with_capacity(y.len());
    let mut z_minus = Vec::with_capacity(y.len());
    for t in 0..y.len() {
        let mut f = 0.0;
        for (w, row) in x.iter().zip(rows) {
            f += w * row[t];
        }
        z_plus.push((y[t] - f).max(0.0));
        z_minus.push((f - y[t]).max(0.0));
    }
    OracleSolution {
        objective: combination_loss(&x, rows, y),
        active_count: x.iter().filter(|&&v| v > ACTIVE_EPS).count(),
        x,
        z_plus,
        z_minus,
        min_reduced_cost,
        max_violation,
    }
}

/// As [`optimal_weights`], but returns `incumbent` (weights over the same
/// pool) instead when it is at least as good.
pub fn optimal_weights_with_incumbent(rows: &[Vec<f64>], y: &[f64], incumbent: &[f64]) -> Result<OracleSolution> {
    let sol = optimal_weights(rows, y)?;
    if incumbent.len() == rows.len() && combination_loss(incumbent, rows, y) <= sol.objective {
        return Ok(finish(incumbent.to_vec(), rows, y, sol.min_reduced_cost, sol.max_violation));
    }
    Ok(sol)
}

/// Best single model: `argmin_i Σ_t |b_it − y_t|`, ties to the lowest index.
pub fn optimal_selection(rows: &[Vec<f64>], y: &[f64]) -> Result<(usize, f64)> {
    validate(rows, y)?;
    let mut best = (0, f64::INFINITY);
    for (i, r) in rows.iter().enumerate() {
        let loss: f64 = r.iter().zip(y).map(|(b, v)| (b - v).abs()).sum();
        if loss < best.1 {
            best = (i, loss);
        }
    }
    Ok(best)
}

/// Total loss of a method split into weighting loss and ensemble loss, all
/// in MASE units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossDecomposition {
    pub total_loss: f64,
    pub p_loss: f64,
    pub e_loss: f64,
}

pub fn decompose_loss(forecast: &[f64], rows: &[Vec<f64>], y: &[f64], scale: f64) -> Result<LossDecomposition> {
    if forecast.len() != y.len() {
        return Err(Error::LengthMismatch(y.len(), forecast.len()));
    }
    let sol = optimal_weights(rows, y)?;
    let hd = y.len() as f64 * scale;
    let total_loss = forecast.iter().zip(y).map(|(f, v)| (f - v).abs()).sum::<f64>() / hd;
    let e_loss = sol.objective / hd;
    let p = total_loss - e_loss;
    if p < -1e-6 {
        return Err(Error::NegativePLoss(p));
    }
    if p <= 0.0 {
        return Ok(LossDecomposition {
            total_loss,
            p_loss: 0.0,
            e_loss: total_loss,
        });
    }
    let (p_loss, e_loss) = exact_split(total_loss, e_loss);
    Ok(LossDecomposition {
        total_loss,
        p_loss: p_loss.max(0.0),
        e_loss,
    })
}

fn step_ulps(mut v: f64, n: i32) -> f64 {
    for _ in 0..n.unsigned_abs() {
        v = if n > 0 { v.next_up() } else { v.next_down() };
    }
    v
}

/// Returns `(p, e)` within a few ulps of `(total − e, e)` such that
/// `p + e == total` in floating point.
fn exact_split(total: f64, e: f64) -> (f64, f64) {
    let mut p = total - e;
    for _ in 0..8 {
        let s = p + e;
        if s == total {
            return (p, e);
        }
        p += total - s;
    }
    // Ties-to-even can make some sums unreachable by moving `p` alone.
    for de in [0, 1, -1, 2, -2, 3, -3, 4, -4] {
        let e2 = step_ulps(e, de);
        for dp in -4..=4 {
            let p2 = step_ulps(p, dp);
            if p2 + e2 == total {
                return (p2, e2);
            }
        }
    }
    (p, e)
}

/// Data of one series for corpus-level oracle runs.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleInstance {
    pub id: String,
    /// Forecast rows of the full pool, indexed by `ModelId::index`.
    pub rows: Vec<Vec<f64>>,
    pub actual: Vec<f64>,
    /// MASE denominator.
    pub scale: f64,
}

impl OracleInstance {
    pub fn restrict(&self, pool: &[ModelId]) -> Vec<Vec<f64>> {
        pool.iter().map(|m| self.rows[m.index()].clone()).collect()
    }
}

/// Solves every instance for `pool` in parallel, input order kept.
pub fn solve_corpus(instances: &[OracleInstance], pool: &[ModelId]) -> Result<Vec<OracleSolution>> {
    instances
        .par_iter()
        .map(|inst| optimal_weights(&inst.restrict(pool), &inst.actual))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyResult {
    pub order: Vec<ModelId>,
    /// `curve[k]` is the corpus-mean optimal MASE of the first `k + 1`
    /// models of `order`.
    pub curve: Vec<f64>,
}

/// Grows a pool one model at a time, always adding the candidate with the
/// lowest corpus-mean optimal MASE. Each series keeps its best solution so
/// far as an incumbent, so the curve never increases.
pub fn greedy_build(instances: &[OracleInstance], pool: &[ModelId]) -> Result<GreedyResult> {
    if instances.is_empty() {
        return Err(Error::InvalidArgument("greedy search needs at least one series".into()));
    }
    let mut chosen: Vec<ModelId> = Vec::new();
    let mut remaining: Vec<ModelId> = pool.to_vec();
    let mut incumbents: Vec<Vec<f64>> = vec![Vec::new(); instances.len()];
    let mut result = GreedyResult {
        order: Vec::new(),
        curve: Vec::new(),
    };
    while !remaining.is_empty() {
        let mut best: Option<(usize, f64, Vec<OracleSolution>)> = None;
        for (ci, cand) in remaining.iter().enumerate() {
            let mut trial = chosen.clone();
            trial.push(*cand);
            let sols: Vec<OracleSolution> = instances
                .par_iter()
                .zip(&incumbents)
                .map(|(inst, inc)| {
                    let rows = inst.restrict(&trial);
                    let mut padded = inc.clone();
                    if !padded.is_empty() {
                        padded.push(0.0);
                    }
                    optimal_weights_with_incumbent(&rows, &inst.actual, &padded)
                })
                .collect::<Result<_>>()?;
            let mean = sols
                .iter()
                .zip(instances)
                .map(|(s, inst)| s.e_loss_mase(inst.scale))
                .sum::<f64>()
                / instances.len() as f64;
            if best.as_ref().is_none_or(|b| mean < b.1) {
                best = Some((ci, mean, sols));
            }
        }
        let (ci, mean, sols) = best.expect("non-empty candidate list");
        chosen.push(remaining.remove(ci));
        incumbents = sols.into_iter().map(|s| s.x).collect();
        result.order.push(*chosen.last().expect("just pushed"));
        result.curve.push(mean);
    }
    Ok(result)
}

/// Distribution of active-weight counts over solved series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeHistogram {
    /// `counts[k]` = series whose optimum uses exactly `k` models.
    pub counts: Vec<usize>,
    pub single_model_share: f64,
}

pub fn size_histogram(solutions: &[OracleSolution], eps: f64) -> SizeHistogram {
    let max_k = solutions.iter().map(|s| s.x.len()).max().unwrap_or(0);
    let mut counts = vec![0usize; max_k + 1];
    for s in solutions {
        counts[s.x.iter().filter(|&&v| v > eps).count()] += 1;
    }
    let single_model_share = if solutions.is_empty() {
        0.0
    } else {
        counts.get(1).copied().unwrap_or(0) as f64 / solutions.len() as f64
    };
    SizeHistogram {
        counts,
        single_model_share,
    }
}
