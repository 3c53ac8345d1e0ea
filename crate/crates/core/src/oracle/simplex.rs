//! Dense two-phase tableau simplex with Bland's anti-cycling rule.
//!
//! Solves `min cᵀx` subject to linear constraints and `x ≥ 0`.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-8;
const MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Final phase-2 reduced costs of every structural, slack and surplus
    /// column. All are ≥ −1e-10 at an optimum.
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpFailure {
    Infeasible,
    Unbounded,
    IterationLimit,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    /// Reduced-cost row; the last entry holds minus the objective value.
    z: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = self.z[c];
        if f != 0.0 {
            for (v, pv) in self.z.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.z[c] = 0.0;
        }
        self.basis[r] = c;
    }

    fn price(&mut self, costs: &[f64]) {
        let w = self.width;
        self.z = vec![0.0; w + 1];
        self.z[..costs.len()].copy_from_slice(costs);
        for (i, row) in self.rows.iter().enumerate() {
            let cb = costs.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for (zj, v) in self.z.iter_mut().zip(row) {
                    *zj -= cb * v;
                }
            }
        }
    }

    /// Runs Bland-rule iterations over columns `< allowed`.
    fn iterate(&mut self, allowed: usize, iterations: &mut usize) -> std::result::Result<(), LpFailure> {
        loop {
            let Some(enter) = (0..allowed).find(|&j| self.z[j] < -COST_TOL) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[enter];
                if a > PIVOT_TOL {
                    let ratio = row[self.width] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                            if ratio < best && !tie || tie && self.basis[i] < self.basis[k] {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Err(LpFailure::Unbounded);
            };
            self.pivot(r, enter);
            *iterations += 1;
            if *iterations > MAX_ITER {
                return Err(LpFailure::IterationLimit);
            }
        }
    }
}

impl LinearProgram {
    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn solve(&self) -> std::result::Result<LpSolution, LpFailure> {
        let n = self.n_vars();
        let m = self.constraints.len();
        // Normalize to non-negative right-hand sides.
        let normalized: Vec<(Vec<f64>, Sense, f64)> = self
            .constraints
            .iter()
            .map(|c| {
                if c.rhs < 0.0 {
                    let flipped = match c.sense {
                        Sense::Le => Sense::Ge,
                        Sense::Ge => Sense::Le,
                        Sense::Eq => Sense::Eq,
                    };
                    (c.coeffs.iter().map(|v| -v).collect(), flipped, -c.rhs)
                } else {
                    (c.coeffs.clone(), c.sense, c.rhs)
                }
            })
            .collect();
        let n_slack = normalized.iter().filter(|c| c.1 != Sense::Eq).count();
        let n_art = normalized.iter().filter(|c| c.1 != Sense::Le).count();
        let width = n + n_slack + n_art;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut s, mut a) = (n, n + n_slack);
        for (coeffs, sense, rhs) in &normalized {
            let mut row = vec![0.0; width + 1];
            row[..n].copy_from_slice(coeffs);
            row[width] = *rhs;
            match sense {
                Sense::Le => {
                    row[s] = 1.0;
                    basis.push(s);
                    s += 1;
                }
                Sense::Ge => {
                    row[s] = -1.0;
                    s += 1;
                    row[a] = 1.0;
                    basis.push(a);
                    a += 1;
                }
                Sense::Eq => {
                    row[a] = 1.0;
                    basis.push(a);
                    a += 1;
                }
            }
            rows.push(row);
        }
        let art_start = n + n_slack;
        let mut tab = Tableau {
            rows,
            z: Vec::new(),
            basis,
            width,
        };
        let mut iterations = 0;

        if n_art > 0 {
            let mut phase1 = vec![0.0; width];
            phase1[art_start..].iter_mut().for_each(|c| *c = 1.0);
            tab.price(&phase1);
            tab.iterate(width, &mut iterations)?;
            if -tab.z[width] > FEAS_TOL {
                return Err(LpFailure::Infeasible);
            }
            // Drive remaining artificials out of the basis.
            let mut r = 0;
            while r < tab.rows.len() {
                if tab.basis[r] >= art_start {
                    match (0..art_start).find(|&j| tab.rows[r][j].abs() > PIVOT_TOL) {
                        Some(j) => tab.pivot(r, j),
                        None => {
                            tab.rows.remove(r);
                            tab.basis.remove(r);
                            continue;
                        }
                    }
                }
                r += 1;
            }
        }
        let mut costs = vec![0.0; width];
        costs[..n].copy_from_slice(&self.objective);
        tab.price(&costs);
        tab.iterate(art_start, &mut iterations)?;

        let mut x = vec![0.0; n];
        for (i, &b) in tab.basis.iter().enumerate() {
            if b < n {
                x[b] = tab.rows[i][width].max(0.0);
            }
        }
        let objective = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution {
            x,
            objective,
            reduced_costs: tab.z[..art_start].to_vec(),
            iterations,
        })
    }

    /// Largest constraint violation of `x` (bounds included).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = x.iter().map(|v| (-v).max(0.0)).fold(0.0, f64::max);
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            let v = match c.sense {
                Sense::Le => lhs - c.rhs,
                Sense::Ge => c.rhs - lhs,
                Sense::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }
}

impl From<LpFailure> for Error {
    fn from(f: LpFailure) -> Self {
        Error::InvalidArgument(format!("linear program failed: {f:?}"))
    }
}

pub(crate) fn lp_result(r: std::result::Result<LpSolution, LpFailure>) -> Result<LpSolution> {
    r.map_err(Error::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(coeffs: &[f64], sense: Sense, rhs: f64) -> Constraint {
        Constraint {
            coeffs: coeffs.to_vec(),
            sense,
            rhs,
        }
    }

    #[test]
    fn textbook_maximisation() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36
        let lp = LinearProgram {
            objective: vec![-3.0, -5.0],
            constraints: vec![
                c(&[1.0, 0.0], Sense::Le, 4.0),
                c(&[0.0, 2.0], Sense::Le, 12.0),
                c(&[3.0, 2.0], Sense::Le, 18.0),
            ],
        };
        let s = lp.solve().unwrap();
        assert!((s.objective + 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
        assert!(s.reduced_costs.iter().all(|&r| r >= -1e-10));
    }

    #[test]
    fn phase_one_with_equalities_and_ge() {
        // min x + 2y s.t. x + y = 3, x ≥ 1, y ≥ 0.5 → (2.5, 0.5), 3.5
        let lp = LinearProgram {
            objective: vec![1.0, 2.0],
            constraints: vec![
                c(&[1.0, 1.0], Sense::Eq, 3.0),
                c(&[1.0, 0.0], Sense::Ge, 1.0),
                c(&[0.0, 1.0], Sense::Ge, 0.5),
            ],
        };
        let s = lp.solve().unwrap();
        assert!((s.objective - 3.5).abs() < 1e-12);
        assert!(lp.max_violation(&s.x) < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let lp = LinearProgram {
            objective: vec![1.0],
            constraints: vec![c(&[1.0], Sense::Le, 1.0), c(&[1.0], Sense::Ge, 2.0)],
        };
        assert_eq!(lp.solve().unwrap_err(), LpFailure::Infeasible);
        let lp = LinearProgram {
            objective: vec![-1.0, 0.0],
            constraints: vec![c(&[1.0, -1.0], Sense::Le, 1.0)],
        };
        assert_eq!(lp.solve().unwrap_err(), LpFailure::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let lp = LinearProgram {
            objective: vec![1.0, 1.0],
            constraints: vec![c(&[1.0, 1.0], Sense::Eq, 2.0), c(&[2.0, 2.0], Sense::Eq, 4.0)],
        };
        let s = lp.solve().unwrap();
        assert!((s.objective - 2.0).abs() < 1e-12);
    }
}
